//! Pointwise second-order variational analysis of the disjunctive system
//! Γ = G⁻¹(D): linearized cones, second-order tangent sets, multiplier
//! sets, constraint qualifications, and the support/subderivative formulas.

use crate::cones::apex_limiting_normal_cone;
use crate::error::{Error, Result};
use crate::extreal::ExtReal;
use crate::expr::jet::{second_directional, SmoothMapAtPoint};
use crate::numeric::dd::{dd_v_to_h, GeneratorRep};
use crate::numeric::lp::{solve_lp, LpOutcome, LpProblem, Sense};
use crate::numeric::matrix::{axpy, dot, norm2, norm_inf, Matrix};
use crate::numeric::subspace::{null_space, orthonormalize, subspace_intersection};
use crate::numeric::Tolerance;
use crate::polyhedra::{ConvexPolyhedron, PolyhedralCone, PolyhedralSet};

/// A feasible point of Γ = G⁻¹(D) with all derivative data frozen.
#[derive(Debug, Clone)]
pub struct SystemPoint {
    pub xbar: Vec<f64>,
    pub d_set: PolyhedralSet,
    pub map: SmoothMapAtPoint,
    pub kappa: Option<f64>,
}

impl SystemPoint {
    pub fn new(
        xbar: Vec<f64>,
        d_set: PolyhedralSet,
        map: SmoothMapAtPoint,
        kappa: Option<f64>,
        tol: &Tolerance,
    ) -> Result<Self> {
        if map.output_dim() != d_set.dim {
            return Err(Error::DimensionMismatch(
                "map output dimension does not match the set dimension".into(),
            ));
        }
        if !d_set.contains(&map.value, tol)? {
            let distance = match d_set.distance_inf(&map.value, tol)? {
                ExtReal::Finite(d) => d,
                _ => f64::INFINITY,
            };
            return Err(Error::PointNotInSet { distance });
        }
        if let Some(k) = kappa {
            if k <= 0.0 {
                return Err(Error::InvalidTolerance("kappa must be positive".into()));
            }
        }
        Ok(SystemPoint {
            xbar,
            d_set,
            map,
            kappa,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.map.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.map.output_dim()
    }

    /// T_D(G(xbar)).
    pub fn tangent_d(&self, tol: &Tolerance) -> Result<PolyhedralCone> {
        self.d_set.tangent_cone(&self.map.value, tol)
    }

    /// Linearization cone L_Γ(xbar) = {u : ∇G(xbar) u ∈ T_D(G(xbar))},
    /// as an explicit union of pre-image pieces in R^n.
    pub fn linearization_cone(&self, tol: &Tolerance) -> Result<PolyhedralCone> {
        let t = self.tangent_d(tol)?;
        preimage_cone(&self.map.jacobian, &t)
    }
}

/// Pull back a polyhedral cone through a linear map: {u : J u ∈ K}.
pub fn preimage_cone(jac: &Matrix, k: &PolyhedralCone) -> Result<PolyhedralCone> {
    let n = jac.cols();
    let pieces = k
        .pieces()
        .iter()
        .map(|p| ConvexPolyhedron::cone(p.a.matmul(jac), p.e.matmul(jac)))
        .collect();
    PolyhedralCone::from_pieces(n, pieces)
}

/// Pull back a polyhedral set through an affine map: {p : J p + c ∈ S}.
pub fn preimage_set(jac: &Matrix, c: &[f64], s: &PolyhedralSet) -> Result<PolyhedralSet> {
    let n = jac.cols();
    let pieces = s
        .pieces
        .iter()
        .map(|piece| {
            let a = piece.a.matmul(jac);
            let b: Vec<f64> = (0..piece.a.rows())
                .map(|i| piece.b[i] - dot(piece.a.row(i), c))
                .collect();
            let e = piece.e.matmul(jac);
            let f: Vec<f64> = (0..piece.e.rows())
                .map(|i| piece.f[i] - dot(piece.e.row(i), c))
                .collect();
            ConvexPolyhedron::new(a, b, e, f)
        })
        .collect::<Result<Vec<_>>>()?;
    PolyhedralSet::new(n, pieces)
}

/// Push a polyhedral cone forward through a linear map (image cone), via
/// generators.
pub fn image_cone(m: &Matrix, k: &PolyhedralCone, tol: &Tolerance) -> Result<PolyhedralCone> {
    let out_dim = m.rows();
    let mut pieces = Vec::new();
    for g in k.generators(tol)? {
        let img = GeneratorRep {
            dim: out_dim,
            rays: g.rays.iter().map(|r| m.matvec(r)).collect(),
            lines: g.lines.iter().map(|l| m.matvec(l)).collect(),
        };
        let (a, e) = dd_v_to_h(&img, tol)?;
        pieces.push(ConvexPolyhedron::cone(a, e));
    }
    PolyhedralCone::from_pieces(out_dim, pieces)
}

/// The system point together with a direction u ∈ L_Γ(xbar) and the cones
/// cached at that direction.
#[derive(Debug, Clone)]
pub struct DirectionalSystem {
    pub base: SystemPoint,
    pub u: Vec<f64>,
    /// ∇G(xbar) u.
    pub gu: Vec<f64>,
    /// ∇²G(xbar)(u, u).
    pub curvature: Vec<f64>,
    /// T_D(G(xbar)).
    pub tangent_d: PolyhedralCone,
    /// T_{T_D}(∇G u) — by exactness also T²_D(G(xbar); ∇G u).
    pub tangent_tangent: PolyhedralCone,
    /// N_{T_D}(∇G u) = N_D(G(xbar); ∇G u), the M-multiplier cone.
    pub limiting_normal: PolyhedralCone,
    /// N̂_{T_D}(∇G u), the S-multiplier cone (polar of `tangent_tangent`).
    pub regular_normal: ConvexPolyhedron,
}

impl DirectionalSystem {
    pub fn new(base: SystemPoint, u: Vec<f64>, tol: &Tolerance) -> Result<Self> {
        if u.len() != base.input_dim() {
            return Err(Error::DimensionMismatch(
                "direction length does not match the input dimension".into(),
            ));
        }
        let gu = base.map.jacobian.matvec(&u);
        let tangent_d = base.tangent_d(tol)?;
        if !tangent_d.contains(&gu, tol)? {
            return Err(Error::DirectionNotTangent);
        }
        let tangent_tangent = tangent_d.as_set().tangent_cone(&gu, tol)?;
        let limiting_normal = apex_limiting_normal_cone(&tangent_tangent, tol)?;
        let regular_normal = tangent_tangent.polar(tol)?;
        let curvature = second_directional(&base.map, &u)?;
        Ok(DirectionalSystem {
            base,
            u,
            gu,
            curvature,
            tangent_d,
            tangent_tangent,
            limiting_normal,
            regular_normal,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.base.input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.base.output_dim()
    }

    /// Basis of ker ∇G(xbar)^T.
    pub fn jacobian_cokernel(&self, tol: &Tolerance) -> Vec<Vec<f64>> {
        null_space(&self.base.map.jacobian.transpose(), tol.eps_zero)
    }

    /// Span of the directional limiting normal cone, from piece generators.
    pub fn normal_span(&self, tol: &Tolerance) -> Result<Vec<Vec<f64>>> {
        let dirs = self.limiting_normal.all_directions(tol)?;
        Ok(orthonormalize(dirs, tol.eps_zero))
    }
}

/// Outcome of a constraint-qualification check with a witness on failure.
#[derive(Debug, Clone)]
pub struct CqOutcome {
    pub holds: bool,
    pub witness: Option<Vec<f64>>,
}

/// First-order sufficient condition for metric subregularity in direction u:
/// ker ∇G^T ∩ N_D(G(xbar); ∇G u) = {0}. The witness is a nonzero normal in
/// the kernel when the condition fails.
pub fn foscms_check(ds: &DirectionalSystem, tol: &Tolerance) -> Result<CqOutcome> {
    let jac_t = ds.base.map.jacobian.transpose();
    let n = ds.input_dim();
    for piece in ds.limiting_normal.pieces() {
        // the cone piece intersected with the kernel, in H-representation
        let mut e = piece.e.clone();
        for i in 0..jac_t.rows() {
            e.push_row(jac_t.row(i));
        }
        let _ = n;
        let inter = ConvexPolyhedron::cone(piece.a.clone(), e);
        let gens = inter.cone_generators(tol)?;
        if let Some(w) = gens.directions().into_iter().find(|v| norm2(v) > 1e-7) {
            return Ok(CqOutcome {
                holds: false,
                witness: Some(w),
            });
        }
    }
    Ok(CqOutcome {
        holds: true,
        witness: None,
    })
}

/// Directional nondegeneracy: ker ∇G^T ∩ span N_D(G(xbar); ∇G u) = {0}.
pub fn nondegeneracy_check(ds: &DirectionalSystem, tol: &Tolerance) -> Result<CqOutcome> {
    let span = ds.normal_span(tol)?;
    let kernel = ds.jacobian_cokernel(tol);
    let inter = subspace_intersection(&span, &kernel, ds.output_dim(), tol.eps_zero);
    match inter.into_iter().next() {
        Some(w) => Ok(CqOutcome {
            holds: false,
            witness: Some(w),
        }),
        None => Ok(CqOutcome {
            holds: true,
            witness: None,
        }),
    }
}

/// Generalized directional nondegeneracy: every y* in
/// ker ∇G^T ∩ span N_D(...) must annihilate the curvature ∇²G(u,u).
pub fn generalized_nondegeneracy_check(ds: &DirectionalSystem, tol: &Tolerance) -> Result<CqOutcome> {
    let span = ds.normal_span(tol)?;
    let kernel = ds.jacobian_cokernel(tol);
    let inter = subspace_intersection(&span, &kernel, ds.output_dim(), tol.eps_zero);
    let scale = 1.0 + norm_inf(&ds.curvature);
    for v in inter {
        if dot(&v, &ds.curvature).abs() > tol.eps_feas * scale {
            return Ok(CqOutcome {
                holds: false,
                witness: Some(v),
            });
        }
    }
    Ok(CqOutcome {
        holds: true,
        witness: None,
    })
}

/// T²_Γ(xbar; u) = {p : ∇G p + ∇²G(u,u) ∈ T_{T_D}(∇G u)}, a union of
/// affine pre-image pieces. The formula certifies T²_Γ under MSCQ.
pub fn second_order_tangent_gamma(ds: &DirectionalSystem) -> Result<PolyhedralSet> {
    preimage_set(
        &ds.base.map.jacobian,
        &ds.curvature,
        ds.tangent_tangent.as_set(),
    )
}

/// σ_{T²_Γ(xbar;u)}(x*) with an attaining point and, when finite, a
/// multiplier y* ∈ Λ_{x*}(xbar; u) realizing σ = −<y*, ∇²G(u,u)>.
#[derive(Debug, Clone)]
pub struct T2Support {
    pub value: ExtReal,
    pub attaining_point: Option<Vec<f64>>,
    pub multiplier: Option<Vec<f64>>,
}

pub fn support_t2_gamma(
    ds: &DirectionalSystem,
    xstar: &[f64],
    tol: &Tolerance,
) -> Result<T2Support> {
    let t2 = second_order_tangent_gamma(ds)?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for piece in &t2.pieces {
        let p = LpProblem::maximize(xstar.to_vec(), piece.a.clone(), piece.b.clone())
            .with_eq(piece.e.clone(), piece.f.clone());
        match solve_lp(&p, tol)? {
            LpOutcome::Unbounded { .. } => {
                return Ok(T2Support {
                    value: ExtReal::PlusInf,
                    attaining_point: None,
                    multiplier: None,
                })
            }
            LpOutcome::Optimal { x, value, .. } => {
                if best.as_ref().map(|(v, _)| value > *v).unwrap_or(true) {
                    best = Some((value, x));
                }
            }
            LpOutcome::Infeasible { .. } => {}
        }
    }
    let Some((sigma, pbar)) = best else {
        return Ok(T2Support {
            value: ExtReal::MinusInf,
            attaining_point: None,
            multiplier: None,
        });
    };
    // search for y* in the M-multiplier set with <y*, curvature> = -sigma
    let multiplier = attaining_multiplier(ds, xstar, sigma, tol)?;
    Ok(T2Support {
        value: ExtReal::Finite(sigma),
        attaining_point: Some(pbar),
        multiplier,
    })
}

/// Find y* with ∇G^T y* = x*, y* in a piece of N_{T_D}(∇G u), and
/// <y*, ∇²G(u,u)> = −σ. Existence is guaranteed under MSCQ.
fn attaining_multiplier(
    ds: &DirectionalSystem,
    xstar: &[f64],
    sigma: f64,
    tol: &Tolerance,
) -> Result<Option<Vec<f64>>> {
    let jac_t = ds.base.map.jacobian.transpose();
    let d = ds.output_dim();
    for piece in ds.limiting_normal.pieces() {
        let mut e = piece.e.clone();
        let mut f = vec![0.0; piece.e.rows()];
        for i in 0..jac_t.rows() {
            e.push_row(jac_t.row(i));
            f.push(xstar[i]);
        }
        e.push_row(&ds.curvature);
        f.push(-sigma);
        let p = LpProblem::maximize(vec![0.0; d], piece.a.clone(), vec![0.0; piece.a.rows()])
            .with_eq(e, f);
        if let LpOutcome::Optimal { x, .. } = solve_lp(&p, tol)? {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// d²δ_Γ(xbar; x*)(u) per the exact support-function formula, valid under
/// MSCQ in direction u.
pub fn second_subderivative_gamma(
    ds: &DirectionalSystem,
    xstar: &[f64],
    tol: &Tolerance,
) -> Result<ExtReal> {
    let pairing = dot(xstar, &ds.u);
    let scale = (1.0 + norm_inf(xstar)) * (1.0 + norm_inf(&ds.u));
    if pairing < -tol.eps_zero * scale {
        return Ok(ExtReal::PlusInf);
    }
    if pairing > tol.eps_zero * scale {
        return Ok(ExtReal::MinusInf);
    }
    Ok(support_t2_gamma(ds, xstar, tol)?.value.neg())
}

/// Which multiplier cone a multiplier set is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierKind {
    /// Limiting normals N_{T_D}(∇G u) — M-multipliers.
    M,
    /// Regular normals N̂_{T_D}(∇G u) — S-multipliers.
    S,
}

/// Polyhedral description of Λ_{x*}(xbar; u) (kind M) or Λ^s_{x*}(xbar; u)
/// (kind S): the affine system ∇G^T y* = x* intersected with the normal
/// cone.
#[derive(Debug, Clone)]
pub struct MultiplierSet {
    pub kind: MultiplierKind,
    /// ∇G(xbar)^T as an n x d matrix.
    pub affine: Matrix,
    pub rhs: Vec<f64>,
    /// Convex pieces of the normal cone (one for kind S).
    pub cone_pieces: Vec<ConvexPolyhedron>,
}

pub fn multiplier_set(ds: &DirectionalSystem, xstar: &[f64], kind: MultiplierKind) -> MultiplierSet {
    let cone_pieces = match kind {
        MultiplierKind::M => ds.limiting_normal.pieces().to_vec(),
        MultiplierKind::S => vec![ds.regular_normal.clone()],
    };
    MultiplierSet {
        kind,
        affine: ds.base.map.jacobian.transpose(),
        rhs: xstar.to_vec(),
        cone_pieces,
    }
}

impl MultiplierSet {
    pub fn membership(&self, y: &[f64], tol: &Tolerance) -> bool {
        let img = self.affine.matvec(y);
        let scale = 1.0 + norm_inf(&self.rhs) + norm_inf(y);
        if img
            .iter()
            .zip(&self.rhs)
            .any(|(a, b)| (a - b).abs() > tol.eps_feas * scale)
        {
            return false;
        }
        self.cone_pieces.iter().any(|p| p.contains(y, tol.eps_feas))
    }

    /// One convex piece of the multiplier set as an H-system over y.
    fn piece_system(&self, piece: &ConvexPolyhedron) -> (Matrix, Vec<f64>, Matrix, Vec<f64>) {
        let mut e = piece.e.clone();
        let mut f = vec![0.0; piece.e.rows()];
        for i in 0..self.affine.rows() {
            e.push_row(self.affine.row(i));
            f.push(self.rhs[i]);
        }
        (piece.a.clone(), vec![0.0; piece.a.rows()], e, f)
    }

    pub fn is_empty(&self, tol: &Tolerance) -> Result<bool> {
        for piece in &self.cone_pieces {
            let (a, b, e, f) = self.piece_system(piece);
            let d = a.cols();
            let p = LpProblem::maximize(vec![0.0; d], a, b).with_eq(e, f);
            if !solve_lp(&p, tol)?.is_infeasible() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn any_element(&self, tol: &Tolerance) -> Result<Option<Vec<f64>>> {
        for piece in &self.cone_pieces {
            let (a, b, e, f) = self.piece_system(piece);
            let d = a.cols();
            let p = LpProblem::maximize(vec![0.0; d], a, b).with_eq(e, f);
            if let LpOutcome::Optimal { x, .. } = solve_lp(&p, tol)? {
                return Ok(Some(x));
            }
        }
        Ok(None)
    }

    /// Extremes of a linear functional over the set, optionally clipped to
    /// the max-norm ball of radius `clip`. Returns (inf, sup, attaining sup
    /// point).
    pub fn linear_extremes(
        &self,
        c: &[f64],
        clip: Option<f64>,
        tol: &Tolerance,
    ) -> Result<(ExtReal, ExtReal, Option<Vec<f64>>)> {
        let d = self.affine.cols();
        let mut lo = ExtReal::PlusInf;
        let mut hi = ExtReal::MinusInf;
        let mut attaining = None;
        for piece in &self.cone_pieces {
            let (mut a, mut b, e, f) = self.piece_system(piece);
            if let Some(r) = clip {
                for j in 0..d {
                    let mut row = vec![0.0; d];
                    row[j] = 1.0;
                    a.push_row(&row);
                    b.push(r);
                    let mut row = vec![0.0; d];
                    row[j] = -1.0;
                    a.push_row(&row);
                    b.push(r);
                }
            }
            let pmax = LpProblem {
                c: c.to_vec(),
                a_ineq: a.clone(),
                b_ineq: b.clone(),
                a_eq: e.clone(),
                b_eq: f.clone(),
                sense: Sense::Max,
            };
            match solve_lp(&pmax, tol)? {
                LpOutcome::Optimal { x, value, .. } => {
                    if hi.cmp_total(ExtReal::Finite(value)) == std::cmp::Ordering::Less {
                        hi = ExtReal::Finite(value);
                        attaining = Some(x);
                    }
                }
                LpOutcome::Unbounded { .. } => {
                    hi = ExtReal::PlusInf;
                    attaining = None;
                }
                LpOutcome::Infeasible { .. } => continue,
            }
            let pmin = LpProblem {
                c: c.to_vec(),
                a_ineq: a,
                b_ineq: b,
                a_eq: e,
                b_eq: f,
                sense: Sense::Min,
            };
            match solve_lp(&pmin, tol)? {
                LpOutcome::Optimal { value, .. } => {
                    lo = lo.min(ExtReal::Finite(value));
                }
                LpOutcome::Unbounded { .. } => lo = ExtReal::MinusInf,
                LpOutcome::Infeasible { .. } => {}
            }
        }
        Ok((lo, hi, attaining))
    }

    /// Coordinate extents decide singleton-ness.
    pub fn is_singleton(&self, tol: &Tolerance) -> Result<Option<Vec<f64>>> {
        let d = self.affine.cols();
        let Some(y0) = self.any_element(tol)? else {
            return Ok(None);
        };
        for j in 0..d {
            let mut c = vec![0.0; d];
            c[j] = 1.0;
            let (lo, hi, _) = self.linear_extremes(&c, None, tol)?;
            match (lo, hi) {
                (ExtReal::Finite(a), ExtReal::Finite(b)) if (a - b).abs() <= 1e-7 => {}
                _ => return Ok(None),
            }
        }
        Ok(Some(y0))
    }
}

/// Bounds on <y*, ∇²G(u,u)> over the M-multiplier set, clipped to the
/// kappa ball when a modulus is available, plus the S-multiplier lower
/// bound.
#[derive(Debug, Clone)]
pub struct MultiplierBounds {
    pub lower: ExtReal,
    pub upper: ExtReal,
    /// sup over Λ^s of <y*, ∇²G(u,u)> — a lower bound for d²δ.
    pub s_lower: ExtReal,
    pub attaining: Option<Vec<f64>>,
    /// Whether the kappa ball was applied.
    pub clipped: bool,
}

pub fn multiplier_bounds(
    ds: &DirectionalSystem,
    xstar: &[f64],
    tol: &Tolerance,
) -> Result<MultiplierBounds> {
    let curvature = ds.curvature.clone();
    let m_set = multiplier_set(ds, xstar, MultiplierKind::M);
    let clip = ds.base.kappa.map(|k| k * norm2(xstar));
    let (lower, upper, attaining) = m_set.linear_extremes(&curvature, clip, tol)?;
    let s_set = multiplier_set(ds, xstar, MultiplierKind::S);
    let (_, s_lower, _) = s_set.linear_extremes(&curvature, None, tol)?;
    Ok(MultiplierBounds {
        lower,
        upper,
        s_lower,
        attaining,
        clipped: clip.is_some(),
    })
}

/// −ĥσ_{T²_Γ(xbar;u)}(x*) via the translated-cone representation
/// T²_Γ = p0 + K: requires the generalized nondegeneracy condition, under
/// which ĥσ(x*) = <x*, p0> on N_K(0) and +∞ elsewhere.
pub fn lower_support_t2_gamma(
    ds: &DirectionalSystem,
    xstar: &[f64],
    tol: &Tolerance,
) -> Result<ExtReal> {
    let cq = generalized_nondegeneracy_check(ds, tol)?;
    if !cq.holds {
        return Err(Error::AssumptionViolated(
            "generalized directional nondegeneracy fails; only multiplier bounds are available"
                .into(),
        ));
    }
    let p0 = translation_point(ds, tol)?;
    // K = {p : ∇G p ∈ T_{T_D}(∇G u)}; dom ĥσ = N_K(0)
    let k = preimage_cone(&ds.base.map.jacobian, &ds.tangent_tangent)?;
    let nk = apex_limiting_normal_cone(&k, tol)?;
    if nk.contains(xstar, tol)? {
        Ok(ExtReal::Finite(dot(xstar, &p0)))
    } else {
        Ok(ExtReal::PlusInf)
    }
}

/// Any p0 with ∇G p0 + ∇²G(u,u) in the lineality space of the directional
/// regular tangent cone (the polar of span N), which sits inside the
/// generalized lineality space of T_{T_D}(∇G u).
pub fn translation_point(ds: &DirectionalSystem, tol: &Tolerance) -> Result<Vec<f64>> {
    let d = ds.output_dim();
    let n = ds.input_dim();
    let span = ds.normal_span(tol)?;
    let lin_basis = if span.is_empty() {
        Matrix::identity(d).row_vecs()
    } else {
        null_space(&Matrix::from_rows(span, d), tol.eps_zero)
    };
    // solve ∇G p0 - W q = -curvature in least-squares-exact form via LP
    // (feasible under the generalized nondegeneracy condition)
    let k = lin_basis.len();
    let mut e = Matrix::zeros(0, n + k);
    let mut f = Vec::new();
    for i in 0..d {
        let mut row = Vec::with_capacity(n + k);
        row.extend_from_slice(ds.base.map.jacobian.row(i));
        for basis_vec in &lin_basis {
            row.push(-basis_vec[i]);
        }
        e.push_row(&row);
        f.push(-ds.curvature[i]);
    }
    let p = LpProblem::maximize(vec![0.0; n + k], Matrix::zeros(0, n + k), vec![]).with_eq(e, f);
    match solve_lp(&p, tol)? {
        LpOutcome::Optimal { x, .. } => Ok(x[..n].to_vec()),
        _ => Err(Error::AssumptionViolated(
            "translation point system is infeasible".into(),
        )),
    }
}

/// The four sets of the directional normal-cone identity. Under directional
/// nondegeneracy they coincide and `image` is the certified common value;
/// otherwise `image` is only an upper bound for N_Γ(xbar; u) and
/// N_{T_Γ(xbar)}(u).
#[derive(Debug, Clone)]
pub struct NormalEqualityReport {
    pub nondegenerate: bool,
    /// ∇G^T N_{T_D}(∇G u) = ∇G^T N_D(G(xbar); ∇G u).
    pub image: PolyhedralCone,
    /// N_{T_Γ(xbar)}(u), computed on the explicit linearization cone.
    pub preimage_normal: PolyhedralCone,
}

pub fn directional_normal_equalities(
    ds: &DirectionalSystem,
    tol: &Tolerance,
) -> Result<NormalEqualityReport> {
    let nondegenerate = nondegeneracy_check(ds, tol)?.holds;
    let jac_t = ds.base.map.jacobian.transpose();
    let image = image_cone(&jac_t, &ds.limiting_normal, tol)?;
    let t_gamma = ds.base.linearization_cone(tol)?;
    let preimage_normal = crate::cones::limiting_normal_cone(t_gamma.as_set(), &ds.u, tol)?;
    Ok(NormalEqualityReport {
        nondegenerate,
        image,
        preimage_normal,
    })
}

/// A Hoffman-type modulus for the linearized mapping
/// Φ(p) = ∇G p + ∇²G(u,u) − T_{T_D}(∇G u): per-piece Hoffman constants of
/// the pre-image systems times the row norms, maximized over pieces with
/// nonempty pre-image. Exact when ∇G is surjective; otherwise an estimate
/// tightened by deterministic sampling.
pub fn kappa_oracle(ds: &DirectionalSystem, tol: &Tolerance) -> Result<f64> {
    let t2 = second_order_tangent_gamma(ds)?;
    let n = ds.input_dim();
    if n > 8 || t2.pieces.len() > 16 {
        return Err(Error::ScaleCapExceeded(
            "kappa oracle limited to 8 variables and 16 pieces".into(),
        ));
    }
    let mut kappa: f64 = 0.0;
    let mut any_nonempty = false;
    for (piece, dpiece) in t2.pieces.iter().zip(ds.tangent_tangent.pieces()) {
        if piece.is_empty(tol) {
            continue;
        }
        any_nonempty = true;
        let h = hoffman_constant(piece, tol)?;
        // residual of the pre-image rows at q = ∇G p + c equals the residual
        // of the cone rows at q; a row's 1-norm converts max-norm distance
        // to residual
        let mut lip: f64 = 0.0;
        for i in 0..dpiece.a.rows() {
            lip = lip.max(dpiece.a.row(i).iter().map(|v| v.abs()).sum());
        }
        for i in 0..dpiece.e.rows() {
            lip = lip.max(dpiece.e.row(i).iter().map(|v| v.abs()).sum());
        }
        kappa = kappa.max(h * lip.max(1e-12));
    }
    if !any_nonempty {
        return Err(Error::AssumptionViolated(
            "second-order tangent set is empty; no subregularity modulus exists".into(),
        ));
    }
    kappa = kappa.max(1e-12);

    // deterministic sampling backstop: inflate the per-piece bound to cover
    // observed distance ratios, with headroom (the value is an estimate)
    let mut worst: f64 = 0.0;
    let mut halton_idx = 1u64;
    for _ in 0..200 {
        let p: Vec<f64> = (0..n)
            .map(|j| {
                let h = halton(halton_idx, PRIMES[j % PRIMES.len()]);
                halton_idx += 1;
                (2.0 * h - 1.0) * 8.0
            })
            .collect();
        let num = match t2.distance_inf(&p, tol)? {
            ExtReal::Finite(v) => v,
            _ => continue,
        };
        let q = axpy(&ds.curvature, 1.0, &ds.base.map.jacobian.matvec(&p));
        let den = match ds.tangent_tangent.as_set().distance_inf(&q, tol)? {
            ExtReal::Finite(v) => v,
            _ => continue,
        };
        if den > 1e-9 {
            worst = worst.max(num / den);
        }
    }
    if worst > kappa * (1.0 + 1e-7) {
        kappa = worst * 1.25;
    }
    Ok(kappa)
}

pub const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Radical-inverse Halton point in [0, 1).
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Hoffman constant of a nonempty H-system in (max-norm distance,
/// max-norm residual): the maximum of dist(v, P) over the vertices of the
/// unit-residual inflation of P, computed by double description of the
/// homogenization.
fn hoffman_constant(piece: &ConvexPolyhedron, tol: &Tolerance) -> Result<f64> {
    let n = piece.dim();
    // inflate: Ap <= b+1, |Ep - f| <= 1, homogenize with t
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..piece.a.rows() {
        let mut r = piece.a.row(i).to_vec();
        r.push(-(piece.b[i] + 1.0));
        rows.push(r);
    }
    for i in 0..piece.e.rows() {
        let mut r = piece.e.row(i).to_vec();
        r.push(-(piece.f[i] + 1.0));
        rows.push(r.clone());
        let mut rneg: Vec<f64> = piece.e.row(i).iter().map(|v| -v).collect();
        rneg.push(piece.f[i] - 1.0);
        rows.push(rneg);
    }
    // t >= 0
    let mut tr = vec![0.0; n + 1];
    tr[n] = -1.0;
    rows.push(tr);
    let hom = Matrix::from_rows(rows, n + 1);
    let gens = crate::numeric::dd::dd_h_to_v(&hom, &Matrix::empty(n + 1), tol)?;
    let mut h: f64 = 0.0;
    for ray in gens.directions() {
        let t = ray[n];
        if t.abs() > 1e-7 {
            let v: Vec<f64> = ray[..n].iter().map(|x| x / t).collect();
            if let Some(dist) = piece.distance_inf(&v, tol)? {
                h = h.max(dist);
            }
        }
    }
    Ok(h)
}
