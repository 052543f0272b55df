//! Support function, lower generalized support function, and the second
//! subderivative of indicator functions of polyhedral sets.

use crate::cones::{second_order_tangent_set, DirectionalContext};
use crate::error::Result;
use crate::extreal::ExtReal;
use crate::numeric::lp::{solve_lp, LpOutcome, LpProblem};
use crate::numeric::matrix::{dot, norm_inf, Matrix};
use crate::numeric::subspace::null_space;
use crate::numeric::Tolerance;
use crate::polyhedra::{pattern_regions, Face, PolyhedralSet};

/// Value of the support function together with an attaining point when the
/// supremum is finite.
#[derive(Debug, Clone)]
pub struct SupportResult {
    pub value: ExtReal,
    pub attaining_point: Option<Vec<f64>>,
    pub attaining_face: Option<Face>,
}

/// σ_S(z*) = sup { <z*, z> : z ∈ S }, the max of the per-piece LPs.
/// −∞ iff S is empty, +∞ iff some piece is unbounded in direction z*.
pub fn support_function(s: &PolyhedralSet, zstar: &[f64], tol: &Tolerance) -> Result<SupportResult> {
    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    for (pi, piece) in s.pieces.iter().enumerate() {
        let p = LpProblem::maximize(zstar.to_vec(), piece.a.clone(), piece.b.clone())
            .with_eq(piece.e.clone(), piece.f.clone());
        match solve_lp(&p, tol)? {
            LpOutcome::Unbounded { .. } => {
                return Ok(SupportResult {
                    value: ExtReal::PlusInf,
                    attaining_point: None,
                    attaining_face: None,
                })
            }
            LpOutcome::Optimal { x, value, .. } => {
                if best.as_ref().map(|(v, _, _)| value > *v).unwrap_or(true) {
                    best = Some((value, x, pi));
                }
            }
            LpOutcome::Infeasible { .. } => {}
        }
    }
    Ok(match best {
        None => SupportResult {
            value: ExtReal::MinusInf,
            attaining_point: None,
            attaining_face: None,
        },
        Some((v, x, pi)) => {
            let active = s.pieces[pi].active_set(&x, tol.eps_feas);
            SupportResult {
                value: ExtReal::Finite(v),
                attaining_face: Some(Face {
                    parent: pi,
                    active,
                    rep_point: x.clone(),
                }),
                attaining_point: Some(x),
            }
        }
    })
}

/// Lower generalized support function ĥσ_S(z*).
///
/// For polyhedral S the liminf collapses to a minimum over the pattern
/// regions of the row arrangement: min of <z*, rep> over regions whose
/// regular normal cone contains z*, +∞ if there is no such region, −∞ for
/// the empty set. On each admissible region <z*, .> is constant, which is
/// asserted at runtime.
pub fn lower_generalized_support(
    s: &PolyhedralSet,
    zstar: &[f64],
    tol: &Tolerance,
) -> Result<ExtReal> {
    LowerSupportEvaluator::new(s, tol)?.eval(zstar, tol)
}

/// Precomputed region decomposition for repeated ĥσ queries on one set.
pub struct LowerSupportEvaluator {
    empty: bool,
    regions: Vec<EvalRegion>,
}

struct EvalRegion {
    rep: Vec<f64>,
    normal: crate::polyhedra::ConvexPolyhedron,
    dirs: Vec<Vec<f64>>,
}

impl LowerSupportEvaluator {
    pub fn new(s: &PolyhedralSet, tol: &Tolerance) -> Result<Self> {
        if s.is_empty(tol) {
            return Ok(LowerSupportEvaluator {
                empty: true,
                regions: vec![],
            });
        }
        let mut regions = Vec::new();
        for region in pattern_regions(s, tol)? {
            let normal = crate::cones::regular_normal_from_pattern(s, &region.pattern, tol)?;
            let dirs = region_direction_space(s, &region, tol);
            regions.push(EvalRegion {
                rep: region.rep,
                normal,
                dirs,
            });
        }
        Ok(LowerSupportEvaluator {
            empty: false,
            regions,
        })
    }

    pub fn eval(&self, zstar: &[f64], tol: &Tolerance) -> Result<ExtReal> {
        if self.empty {
            return Ok(ExtReal::MinusInf);
        }
        let mut best: Option<f64> = None;
        for region in &self.regions {
            if !region.normal.contains(zstar, tol.eps_feas) {
                continue;
            }
            // z* must annihilate the region's direction space, making
            // <z*, .> constant on the region
            for d in &region.dirs {
                debug_assert!(
                    dot(zstar, d).abs() <= tol.eps_feas * 10.0 * (1.0 + norm_inf(zstar)),
                    "admissible region not orthogonal to z*"
                );
            }
            let v = dot(zstar, &region.rep);
            best = Some(best.map(|b: f64| b.min(v)).unwrap_or(v));
        }
        Ok(best.map(ExtReal::Finite).unwrap_or(ExtReal::PlusInf))
    }
}

/// Orthonormal basis of the direction space of an arrangement region:
/// the common null space of the rows active on it.
fn region_direction_space(
    s: &PolyhedralSet,
    region: &crate::polyhedra::Region,
    tol: &Tolerance,
) -> Vec<Vec<f64>> {
    let mut rows = Matrix::zeros(0, s.dim);
    for (pi, active) in &region.pattern {
        let piece = &s.pieces[*pi];
        for &i in active {
            rows.push_row(piece.a.row(i));
        }
        for i in 0..piece.e.rows() {
            rows.push_row(piece.e.row(i));
        }
    }
    null_space(&rows, tol.eps_zero)
}

/// Second subderivative of the indicator function, d²δ_S(z; z*)(w).
///
/// Case analysis for polyhedral S: +∞ when w is not tangent or <z*,w> < 0;
/// −∞ when <z*,w> > 0; otherwise 0 if z* lies in the polar of the
/// second-order tangent set and −∞ if not (the support of a nonempty cone
/// is 0 on its polar and +∞ off it).
pub fn second_subderivative_indicator(
    ctx: &DirectionalContext,
    zstar: &[f64],
    tol: &Tolerance,
) -> Result<ExtReal> {
    let t = ctx.set.tangent_cone(&ctx.z, tol)?;
    if !t.contains(&ctx.w, tol)? {
        return Ok(ExtReal::PlusInf);
    }
    let pairing = dot(zstar, &ctx.w);
    let scale = (1.0 + norm_inf(zstar)) * (1.0 + norm_inf(&ctx.w));
    if pairing < -tol.eps_zero * scale {
        return Ok(ExtReal::PlusInf);
    }
    if pairing > tol.eps_zero * scale {
        return Ok(ExtReal::MinusInf);
    }
    let t2 = second_order_tangent_set(ctx, tol)?.expect("w is tangent");
    let polar = t2.polar(tol)?;
    if polar.contains(zstar, tol.eps_feas) {
        Ok(ExtReal::Finite(0.0))
    } else {
        Ok(ExtReal::MinusInf)
    }
}
