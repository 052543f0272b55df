//! Cone calculus on polyhedral sets: second-order tangent sets and the
//! regular, limiting, directional, proximal and Clarke normal cones.
//!
//! Everything reduces to tangent cones and pattern regions: for a polyhedral
//! set the tangent cone is exact near the base point, so the limiting normal
//! cone at a point is the union of the regular normal cones realized on the
//! cells of the tangent-cone row arrangement.

use crate::error::{Error, Result};
use crate::numeric::dd::{dd_v_to_h, GeneratorRep};
use crate::numeric::matrix::Matrix;
use crate::numeric::Tolerance;
use crate::polyhedra::{pattern_regions, ConvexPolyhedron, PolyhedralCone, PolyhedralSet};

/// The triple (S, z, w) all directional objects are anchored to. The
/// direction may be zero, in which case the directional cones reduce to
/// their classical counterparts.
#[derive(Debug, Clone)]
pub struct DirectionalContext<'a> {
    pub set: &'a PolyhedralSet,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

impl<'a> DirectionalContext<'a> {
    pub fn new(set: &'a PolyhedralSet, z: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if z.len() != set.dim || w.len() != set.dim {
            return Err(Error::DimensionMismatch(
                "context point or direction has wrong dimension".into(),
            ));
        }
        Ok(DirectionalContext { set, z, w })
    }
}

/// T²_S(z; w): equals the tangent cone to T_S(z) at w for polyhedral S.
/// `None` when w is not tangent (the set is then empty).
pub fn second_order_tangent_set(
    ctx: &DirectionalContext,
    tol: &Tolerance,
) -> Result<Option<PolyhedralCone>> {
    let t = ctx.set.tangent_cone(&ctx.z, tol)?;
    if !t.contains(&ctx.w, tol)? {
        return Ok(None);
    }
    Ok(Some(t.as_set().tangent_cone(&ctx.w, tol)?))
}

/// Regular normal cone N̂_S(z) = T_S(z)°.
pub fn regular_normal_cone(
    set: &PolyhedralSet,
    z: &[f64],
    tol: &Tolerance,
) -> Result<ConvexPolyhedron> {
    let t = set.tangent_cone(z, tol)?;
    t.polar(tol)
}

/// Limiting normal cone N_S(z), as the union of the regular normal cones
/// realized on the cells of the tangent-cone arrangement.
pub fn limiting_normal_cone(
    set: &PolyhedralSet,
    z: &[f64],
    tol: &Tolerance,
) -> Result<PolyhedralCone> {
    let t = set.tangent_cone(z, tol)?;
    apex_limiting_normal_cone(&t, tol)
}

/// N_K(0) for a polyhedral cone K: union over arrangement cells of the
/// regular normal cone of the union at the cell representative.
pub fn apex_limiting_normal_cone(k: &PolyhedralCone, tol: &Tolerance) -> Result<PolyhedralCone> {
    let regions = pattern_regions(k.as_set(), tol)?;
    let dim = k.dim();
    let mut pieces: Vec<ConvexPolyhedron> = Vec::new();
    let mut seen_patterns: Vec<Vec<(usize, Vec<usize>)>> = Vec::new();
    for region in &regions {
        if seen_patterns.contains(&region.pattern) {
            continue;
        }
        let polar = regular_normal_from_pattern(k.as_set(), &region.pattern, tol)?;
        seen_patterns.push(region.pattern.clone());
        pieces.push(polar);
    }
    dedupe_cone_pieces(&mut pieces);
    PolyhedralCone::from_pieces(dim, pieces)
}

/// Regular normal cone of the union at any point realizing `pattern`:
/// the intersection over member pieces of the polars of their active cones.
pub(crate) fn regular_normal_from_pattern(
    s: &PolyhedralSet,
    pattern: &[(usize, Vec<usize>)],
    tol: &Tolerance,
) -> Result<ConvexPolyhedron> {
    let mut a = Matrix::zeros(0, s.dim);
    let mut e = Matrix::zeros(0, s.dim);
    for (piece_idx, active) in pattern {
        let piece = &s.pieces[*piece_idx];
        let gens = GeneratorRep {
            dim: s.dim,
            rays: active.iter().map(|&i| piece.a.row(i).to_vec()).collect(),
            lines: piece.e.row_vecs(),
        };
        let (pa, pe) = dd_v_to_h(&gens, tol)?;
        for i in 0..pa.rows() {
            a.push_row(pa.row(i));
        }
        for i in 0..pe.rows() {
            e.push_row(pe.row(i));
        }
    }
    Ok(ConvexPolyhedron::cone(a, e))
}

fn dedupe_cone_pieces(pieces: &mut Vec<ConvexPolyhedron>) {
    let mut keys: Vec<Vec<(i64, Vec<i64>)>> = Vec::new();
    let mut out = Vec::new();
    for p in pieces.iter() {
        let key = piece_key(p);
        if !keys.contains(&key) {
            keys.push(key);
            out.push(p.clone());
        }
    }
    *pieces = out;
}

fn piece_key(p: &ConvexPolyhedron) -> Vec<(i64, Vec<i64>)> {
    let quant = |v: f64| (v / 1e-9).round() as i64;
    let mut rows: Vec<(i64, Vec<i64>)> = Vec::new();
    for i in 0..p.a.rows() {
        rows.push((0, p.a.row(i).iter().map(|&v| quant(v)).collect()));
    }
    for i in 0..p.e.rows() {
        rows.push((1, p.e.row(i).iter().map(|&v| quant(v)).collect()));
    }
    rows.sort();
    rows
}

/// Directional limiting normal cone N_S(z; w) = N_{T_S(z)}(w).
/// `None` when w is not tangent.
pub fn directional_limiting_normal_cone(
    ctx: &DirectionalContext,
    tol: &Tolerance,
) -> Result<Option<PolyhedralCone>> {
    let t = ctx.set.tangent_cone(&ctx.z, tol)?;
    if !t.contains(&ctx.w, tol)? {
        return Ok(None);
    }
    Ok(Some(limiting_normal_cone(t.as_set(), &ctx.w, tol)?))
}

/// Directional proximal normal cone N̂^p_S(z; w) = N̂_{T_S(z)}(w).
pub fn directional_proximal_normal_cone(
    ctx: &DirectionalContext,
    tol: &Tolerance,
) -> Result<Option<ConvexPolyhedron>> {
    let t = ctx.set.tangent_cone(&ctx.z, tol)?;
    if !t.contains(&ctx.w, tol)? {
        return Ok(None);
    }
    Ok(Some(regular_normal_cone(t.as_set(), &ctx.w, tol)?))
}

/// Clarke directional normal cone: closed convex hull of N_S(z; w),
/// assembled by merging piece generators.
pub fn clarke_directional_normal_cone(
    ctx: &DirectionalContext,
    tol: &Tolerance,
) -> Result<Option<ConvexPolyhedron>> {
    let Some(n) = directional_limiting_normal_cone(ctx, tol)? else {
        return Ok(None);
    };
    let mut rays = Vec::new();
    let mut lines = Vec::new();
    for g in n.generators(tol)? {
        rays.extend(g.rays);
        lines.extend(g.lines);
    }
    let merged = GeneratorRep {
        dim: n.dim(),
        rays,
        lines,
    };
    let (a, e) = dd_v_to_h(&merged, tol)?;
    Ok(Some(ConvexPolyhedron::cone(a, e)))
}

/// Directional regular (Clarke) tangent cone T̂_S(z; w) = N_S(z; w)°.
pub fn directional_regular_tangent_cone(
    ctx: &DirectionalContext,
    tol: &Tolerance,
) -> Result<Option<ConvexPolyhedron>> {
    let Some(n) = directional_limiting_normal_cone(ctx, tol)? else {
        return Ok(None);
    };
    Ok(Some(n.polar(tol)?))
}
