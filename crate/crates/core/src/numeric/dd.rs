use super::matrix::{dot, norm2, norm_inf, Matrix};
use super::subspace::orthonormalize;
use super::tolerance::Tolerance;
use crate::error::{Error, Result};

/// Finitely generated representation of a convex polyhedral cone:
/// cone{rays} + span{lines}.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRep {
    pub dim: usize,
    pub rays: Vec<Vec<f64>>,
    pub lines: Vec<Vec<f64>>,
}

impl GeneratorRep {
    pub fn space(dim: usize) -> Self {
        GeneratorRep {
            dim,
            rays: vec![],
            lines: Matrix::identity(dim).row_vecs(),
        }
    }

    pub fn origin(dim: usize) -> Self {
        GeneratorRep {
            dim,
            rays: vec![],
            lines: vec![],
        }
    }

    /// All generators with lines emitted in both directions.
    pub fn directions(&self) -> Vec<Vec<f64>> {
        let mut out = self.rays.clone();
        for l in &self.lines {
            out.push(l.clone());
            out.push(l.iter().map(|v| -v).collect());
        }
        out
    }

    pub fn is_origin_only(&self) -> bool {
        self.rays.is_empty() && self.lines.is_empty()
    }
}

const MAX_DD_DIM: usize = 12;
const MAX_DD_ROWS: usize = 64;

#[derive(Clone)]
struct Ray {
    v: Vec<f64>,
    active: u64,
}

fn act_eps(h: &[f64]) -> f64 {
    1e-9 * (1.0 + norm2(h))
}

/// Incremental double description: generators of the cone
/// {w : A w <= 0, E w = 0}. Adjacency is decided by the rank test.
pub fn dd_h_to_v(a: &Matrix, e: &Matrix, tol: &Tolerance) -> Result<GeneratorRep> {
    let dim = if a.rows() > 0 || a.cols() > 0 {
        a.cols()
    } else {
        e.cols()
    };
    if a.rows() > 0 && e.rows() > 0 && a.cols() != e.cols() {
        return Err(Error::DimensionMismatch(
            "inequality and equality blocks disagree on the ambient dimension".into(),
        ));
    }
    if dim > MAX_DD_DIM {
        return Err(Error::ScaleCapExceeded(format!(
            "double description capped at dimension {MAX_DD_DIM}, got {dim}"
        )));
    }
    let total_rows = a.rows() + e.rows();
    if total_rows > MAX_DD_ROWS {
        return Err(Error::ScaleCapExceeded(format!(
            "double description capped at {MAX_DD_ROWS} rows, got {total_rows}"
        )));
    }

    // equalities first: each consumes a line outright
    let mut constraints: Vec<(Vec<f64>, bool)> = Vec::new();
    for i in 0..e.rows() {
        constraints.push((e.row(i).to_vec(), true));
    }
    for i in 0..a.rows() {
        constraints.push((a.row(i).to_vec(), false));
    }

    let mut lines: Vec<Vec<f64>> = Matrix::identity(dim).row_vecs();
    let mut rays: Vec<Ray> = Vec::new();
    let mut processed: Vec<Vec<f64>> = Vec::new();

    for (idx, (h, is_eq)) in constraints.iter().enumerate() {
        let bit = 1u64 << idx;
        if norm_inf(h) <= tol.eps_zero {
            processed.push(h.clone());
            for r in rays.iter_mut() {
                r.active |= bit;
            }
            continue;
        }
        let eps = act_eps(h);
        let pivot = lines
            .iter()
            .enumerate()
            .map(|(i, l)| (i, dot(h, l)))
            .filter(|(_, s)| s.abs() > eps)
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap());

        if let Some((li, s0)) = pivot {
            let l0 = lines.remove(li);
            for l in lines.iter_mut() {
                let s = dot(h, l);
                if s.abs() > 0.0 {
                    for (x, y) in l.iter_mut().zip(&l0) {
                        *x -= (s / s0) * y;
                    }
                }
            }
            lines = orthonormalize(std::mem::take(&mut lines), tol.eps_zero);
            for r in rays.iter_mut() {
                let s = dot(h, &r.v);
                if s.abs() > 0.0 {
                    for (x, y) in r.v.iter_mut().zip(&l0) {
                        *x -= (s / s0) * y;
                    }
                }
                normalize(&mut r.v);
                r.active |= bit;
            }
            if !is_eq {
                let sign = if s0 > 0.0 { -1.0 } else { 1.0 };
                let mut v: Vec<f64> = l0.iter().map(|x| sign * x).collect();
                normalize(&mut v);
                // a former line is orthogonal to every processed row
                let prior: u64 = (1u64 << idx) - 1;
                rays.push(Ray { v, active: prior });
            }
        } else {
            let quotient_dim = dim - lines.len();
            let vals: Vec<f64> = rays.iter().map(|r| dot(h, &r.v)).collect();
            let mut keep: Vec<Ray> = Vec::new();
            let mut pos_idx = Vec::new();
            let mut neg_idx = Vec::new();
            for (i, s) in vals.iter().enumerate() {
                if *s > eps {
                    pos_idx.push(i);
                } else if *s < -eps {
                    neg_idx.push(i);
                }
            }
            for (i, r) in rays.iter().enumerate() {
                let s = vals[i];
                if s.abs() <= eps {
                    let mut nr = r.clone();
                    nr.active |= bit;
                    keep.push(nr);
                } else if s < 0.0 && !is_eq {
                    keep.push(r.clone());
                }
            }
            for &p in &pos_idx {
                for &m in &neg_idx {
                    if !adjacent(&rays[p], &rays[m], &processed, quotient_dim, tol) {
                        continue;
                    }
                    let (sp, sm) = (vals[p], vals[m]);
                    let mut v: Vec<f64> = rays[p]
                        .v
                        .iter()
                        .zip(&rays[m].v)
                        .map(|(pv, mv)| sp * mv - sm * pv)
                        .collect();
                    if norm2(&v) <= 1e-9 {
                        continue;
                    }
                    normalize(&mut v);
                    keep.push(Ray {
                        v,
                        active: (rays[p].active & rays[m].active) | bit,
                    });
                }
            }
            rays = dedupe(keep);
        }
        processed.push(h.clone());
    }

    let mut out_rays: Vec<Vec<f64>> = rays
        .into_iter()
        .map(|mut r| {
            super::matrix::snap(&mut r.v, 1e-12);
            r.v
        })
        .collect();
    sort_canonical(&mut out_rays);
    let mut out_lines = orthonormalize(lines, tol.eps_zero);
    for l in out_lines.iter_mut() {
        canonical_sign(l);
        super::matrix::snap(l, 1e-12);
    }
    sort_canonical(&mut out_lines);
    Ok(GeneratorRep {
        dim,
        rays: out_rays,
        lines: out_lines,
    })
}

fn adjacent(p: &Ray, m: &Ray, processed: &[Vec<f64>], quotient_dim: usize, tol: &Tolerance) -> bool {
    if quotient_dim < 2 {
        return false;
    }
    if quotient_dim == 2 {
        // every pair of extreme rays in a pointed planar cone is adjacent
        return true;
    }
    let common = p.active & m.active;
    let rows: Vec<Vec<f64>> = processed
        .iter()
        .enumerate()
        .filter(|(i, _)| common & (1u64 << i) != 0)
        .map(|(_, h)| h.clone())
        .collect();
    if rows.is_empty() {
        return false;
    }
    let dim = rows[0].len();
    let rank = Matrix::from_rows(rows, dim).rank(tol.eps_zero.max(1e-9));
    rank == quotient_dim - 2
}

fn normalize(v: &mut [f64]) {
    let n = norm2(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

fn canonical_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-9) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

fn dedupe(rays: Vec<Ray>) -> Vec<Ray> {
    let mut out: Vec<Ray> = Vec::new();
    for r in rays {
        let dup = out
            .iter()
            .any(|q| dot(&q.v, &r.v) > 1.0 - 1e-9);
        if !dup {
            out.push(r);
        }
    }
    out
}

fn sort_canonical(vs: &mut [Vec<f64>]) {
    vs.sort_by(|a, b| {
        for (x, y) in a.iter().zip(b) {
            let qx = (x / 1e-9).round() as i64;
            let qy = (y / 1e-9).round() as i64;
            if qx != qy {
                return qx.cmp(&qy);
            }
        }
        std::cmp::Ordering::Equal
    });
}

/// Inverse of [`dd_h_to_v`] up to representation equivalence: an H-rep
/// (A, E) of cone{rays} + span{lines}, obtained by double description of
/// the polar cone.
pub fn dd_v_to_h(g: &GeneratorRep, tol: &Tolerance) -> Result<(Matrix, Matrix)> {
    let a_pol = Matrix::from_rows(g.rays.clone(), g.dim);
    let e_pol = Matrix::from_rows(g.lines.clone(), g.dim);
    let polar = dd_h_to_v(&a_pol, &e_pol, tol)?;
    Ok((
        Matrix::from_rows(polar.rays, g.dim),
        Matrix::from_rows(polar.lines, g.dim),
    ))
}

/// Membership of `x` in the H-rep cone {Aw <= 0, Ew = 0}.
pub fn hrep_cone_contains(a: &Matrix, e: &Matrix, x: &[f64], eps: f64) -> bool {
    let scale = 1.0 + norm_inf(x);
    (0..a.rows()).all(|i| dot(a.row(i), x) <= eps * scale)
        && (0..e.rows()).all(|i| dot(e.row(i), x).abs() <= eps * scale)
}

/// Membership of `x` in cone{rays} + span{lines}, decided by an LP.
pub fn generator_contains(g: &GeneratorRep, x: &[f64], tol: &Tolerance) -> Result<bool> {
    use super::lp::{solve_lp, LpOutcome, LpProblem};
    let k = g.rays.len();
    let l = g.lines.len();
    if k + l == 0 {
        return Ok(norm_inf(x) <= tol.eps_feas);
    }
    // x = R^T lam + L^T mu, lam >= 0
    let nv = k + l;
    let a_eq = Matrix::from_fn(g.dim, nv, |i, j| {
        if j < k {
            g.rays[j][i]
        } else {
            g.lines[j - k][i]
        }
    });
    let mut a_ineq = Matrix::zeros(0, nv);
    for j in 0..k {
        let mut row = vec![0.0; nv];
        row[j] = -1.0;
        a_ineq.push_row(&row);
    }
    let p = LpProblem::maximize(vec![0.0; nv], a_ineq, vec![0.0; k]).with_eq(a_eq, x.to_vec());
    Ok(!matches!(solve_lp(&p, tol)?, LpOutcome::Infeasible { .. }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn orthant_rays() {
        // first orthant in R^2: {w : -w <= 0}
        let a = Matrix::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]], 2);
        let g = dd_h_to_v(&a, &Matrix::empty(2), &tol()).unwrap();
        assert_eq!(g.lines.len(), 0);
        assert_eq!(g.rays.len(), 2);
        for r in &g.rays {
            assert!(r.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn hyperplane_line() {
        // {w : w_1 = 0} is the x2-axis
        let e = Matrix::from_rows(vec![vec![1.0, 0.0]], 2);
        let g = dd_h_to_v(&Matrix::empty(2), &e, &tol()).unwrap();
        assert_eq!(g.rays.len(), 0);
        assert_eq!(g.lines.len(), 1);
        assert!(g.lines[0][0].abs() < 1e-12);
    }

    #[test]
    fn wedge_round_trip() {
        let a = Matrix::from_rows(vec![vec![1.0, 1.0], vec![-1.0, 1.0]], 2);
        let g = dd_h_to_v(&a, &Matrix::empty(2), &tol()).unwrap();
        assert_eq!(g.rays.len(), 2);
        let (a2, e2) = dd_v_to_h(&g, &tol()).unwrap();
        // round trip preserves membership for a fan of directions
        for k in 0..64 {
            let th = k as f64 * std::f64::consts::TAU / 64.0;
            let x = [th.cos(), th.sin()];
            let in_orig = hrep_cone_contains(&a, &Matrix::empty(2), &x, 1e-9);
            let in_round = hrep_cone_contains(&a2, &e2, &x, 1e-9);
            assert_eq!(in_orig, in_round, "direction {th}");
        }
    }

    #[test]
    fn origin_cone() {
        let a = Matrix::from_rows(
            vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]],
            2,
        );
        let g = dd_h_to_v(&a, &Matrix::empty(2), &tol()).unwrap();
        assert!(g.is_origin_only());
    }
}
