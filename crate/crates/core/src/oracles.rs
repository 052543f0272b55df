//! Definition-level sampling oracles: every closed-form cone and support
//! computation in this crate can be cross-checked against first principles
//! on a geometric t-sequence. Oracles report memberships or bands, never
//! sharpened point values.

use crate::error::Result;
use crate::expr::jet::eval_value;
use crate::expr::parse::Expr;
use crate::extreal::ExtReal;
use crate::numeric::lp::{solve_lp, LpOutcome, LpProblem};
use crate::numeric::matrix::{axpy, dot, norm2, norm_inf, scale, sub, Matrix};
use crate::numeric::Tolerance;
use crate::polyhedra::{ConvexPolyhedron, PolyhedralCone, PolyhedralSet};

/// Geometric t-sequence and probe bookkeeping for all oracles.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub seed: u64,
    pub t0: f64,
    pub ratio: f64,
    pub count: usize,
    pub probe_count: usize,
    /// Directional-neighborhood parameters (δ, ρ).
    pub dir_neighborhood: (f64, f64),
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0x5EED,
            t0: 1e-1,
            ratio: 0.5,
            count: 20,
            probe_count: 1000,
            dir_neighborhood: (1e-1, 1e-1),
        }
    }
}

impl SamplerConfig {
    pub fn quick() -> Self {
        SamplerConfig {
            count: 10,
            ..SamplerConfig::default()
        }
    }

    pub fn t_sequence(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.t0 * self.ratio.powi(k as i32))
    }
}

/// The membership predicate oracles run against: an explicit polyhedral set
/// or an expression-defined pre-image Γ = G⁻¹(D).
pub enum SetPredicate<'a> {
    Polyhedral(&'a PolyhedralSet),
    Preimage {
        constraints: &'a [Expr],
        d_set: &'a PolyhedralSet,
    },
}

impl<'a> SetPredicate<'a> {
    pub fn dim(&self) -> usize {
        match self {
            SetPredicate::Polyhedral(s) => s.dim,
            SetPredicate::Preimage { constraints, .. } => constraints
                .iter()
                .map(|e| e.min_vars())
                .max()
                .unwrap_or(0),
        }
    }

    /// Max-norm distance from a candidate point to the set (infinity when
    /// the image cannot be evaluated).
    fn distance(&self, x: &[f64], tol: &Tolerance) -> Result<f64> {
        match self {
            SetPredicate::Polyhedral(s) => Ok(match s.distance_inf(x, tol)? {
                ExtReal::Finite(v) => v,
                _ => f64::INFINITY,
            }),
            SetPredicate::Preimage {
                constraints,
                d_set,
            } => {
                let gx: Result<Vec<f64>> =
                    constraints.iter().map(|e| eval_value(e, x)).collect();
                match gx {
                    Ok(v) => Ok(match d_set.distance_inf(&v, tol)? {
                        ExtReal::Finite(d) => d,
                        _ => f64::INFINITY,
                    }),
                    Err(_) => Ok(f64::INFINITY),
                }
            }
        }
    }

    /// Distance from w' to the best direction w'' with z + t w'' in the
    /// set, within a search radius around w.
    fn direction_gap(&self, z: &[f64], t: f64, w: &[f64], tol: &Tolerance) -> Result<f64> {
        match self {
            SetPredicate::Polyhedral(s) => {
                // per-piece LP: min ||w' - w||_inf s.t. z + t w' in piece
                let n = s.dim;
                let mut best = f64::INFINITY;
                for piece in &s.pieces {
                    let mut a = Matrix::zeros(0, n + 1);
                    let mut b = Vec::new();
                    for i in 0..piece.a.rows() {
                        let mut row = scale(piece.a.row(i), t);
                        row.push(0.0);
                        a.push_row(&row);
                        b.push(piece.b[i] - dot(piece.a.row(i), z));
                    }
                    for j in 0..n {
                        let mut row = vec![0.0; n + 1];
                        row[j] = 1.0;
                        row[n] = -1.0;
                        a.push_row(&row);
                        b.push(w[j]);
                        let mut row = vec![0.0; n + 1];
                        row[j] = -1.0;
                        row[n] = -1.0;
                        a.push_row(&row);
                        b.push(-w[j]);
                    }
                    let mut e = Matrix::zeros(0, n + 1);
                    let mut f = Vec::new();
                    for i in 0..piece.e.rows() {
                        let mut row = scale(piece.e.row(i), t);
                        row.push(0.0);
                        e.push_row(&row);
                        f.push(piece.f[i] - dot(piece.e.row(i), z));
                    }
                    let mut c = vec![0.0; n + 1];
                    c[n] = 1.0;
                    let p = LpProblem::minimize(c, a, b).with_eq(e, f);
                    if let LpOutcome::Optimal { value, .. } = solve_lp(&p, tol)? {
                        best = best.min(value.max(0.0));
                    }
                }
                Ok(best)
            }
            SetPredicate::Preimage { .. } => {
                // local descent on w' -> dist(z + t w', set)
                let mut w_cur = w.to_vec();
                let mut gap = self.distance(&axpy(z, t, &w_cur), tol)? / t;
                let mut step = 0.5 * (1.0 + norm_inf(w));
                for _ in 0..60 {
                    if gap <= 1e-10 {
                        break;
                    }
                    let mut improved = false;
                    for j in 0..w_cur.len() {
                        for s in [step, -step] {
                            let mut cand = w_cur.clone();
                            cand[j] += s;
                            let g = self.distance(&axpy(z, t, &cand), tol)? / t;
                            if g < gap - 1e-14 {
                                w_cur = cand;
                                gap = g;
                                improved = true;
                            }
                        }
                    }
                    if !improved {
                        step *= 0.5;
                    }
                }
                Ok(norm_inf(&sub(&w_cur, w)).max(gap))
            }
        }
    }
}

/// Tangency by definition: along the t-sequence, directions w_k -> w with
/// z + t_k w_k in S must exist. The oracle accepts when the best direction
/// gap vanishes as t decreases.
pub fn tangent_membership_oracle(
    set: &SetPredicate,
    z: &[f64],
    w: &[f64],
    cfg: &SamplerConfig,
    tol: &Tolerance,
) -> Result<bool> {
    let mut last_gap = f64::INFINITY;
    for t in cfg.t_sequence() {
        last_gap = set.direction_gap(z, t, w, tol)?;
    }
    Ok(last_gap <= oracle_eps(w))
}

/// Second-order tangency by definition: curvature directions s_k -> s with
/// z + t w + t²/2 s_k in S.
pub fn second_order_tangent_oracle(
    set: &SetPredicate,
    z: &[f64],
    w: &[f64],
    s: &[f64],
    cfg: &SamplerConfig,
    tol: &Tolerance,
) -> Result<bool> {
    let mut last_gap = f64::INFINITY;
    for t in cfg.t_sequence() {
        let base = axpy(z, t, w);
        // z + t w + (t²/2) s' in S, as a direction problem at scale t²/2
        last_gap = set.direction_gap(&base, 0.5 * t * t, s, tol)?;
    }
    Ok(last_gap <= oracle_eps(s))
}

fn oracle_eps(v: &[f64]) -> f64 {
    1e-6 * (1.0 + norm_inf(v))
}

/// Approximate band for the second subderivative of the indicator:
/// at each t the inner problem minimizes −2<z*, w'>/t over feasible w'
/// near w; the band covers the tail of the sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum D2Band {
    PlusInf,
    MinusInf,
    Finite { lo: f64, hi: f64 },
}

impl D2Band {
    /// Does an exact extended-real value fall into the band?
    pub fn contains(&self, v: ExtReal, slack: f64) -> bool {
        match (self, v) {
            (D2Band::PlusInf, ExtReal::PlusInf) => true,
            (D2Band::MinusInf, ExtReal::MinusInf) => true,
            (D2Band::Finite { lo, hi }, ExtReal::Finite(x)) => {
                x >= lo - slack && x <= hi + slack
            }
            _ => false,
        }
    }
}

pub fn d2_indicator_oracle(
    set: &SetPredicate,
    z: &[f64],
    zstar: &[f64],
    w: &[f64],
    cfg: &SamplerConfig,
    tol: &Tolerance,
) -> Result<D2Band> {
    let n = z.len();
    let mut tail: Vec<f64> = Vec::new();
    let mut any_feasible = false;
    for (k, t) in cfg.t_sequence().enumerate() {
        // minimize -2 <z*, w'> / t over w' in a shrinking box around w with
        // z + t w' in S; the box must shrink slower than t so that the
        // window infima converge to the liminf
        let radius = cfg.dir_neighborhood.0 * (1.0 + norm2(w)) * 0.75f64.powi(k as i32);
        let value = match set {
            SetPredicate::Polyhedral(s) => {
                let mut best: Option<f64> = None;
                for piece in &s.pieces {
                    let mut a = piece.a.scale(t);
                    let mut b: Vec<f64> = (0..piece.a.rows())
                        .map(|i| piece.b[i] - dot(piece.a.row(i), z))
                        .collect();
                    for j in 0..n {
                        let mut row = vec![0.0; n];
                        row[j] = 1.0;
                        a.push_row(&row);
                        b.push(w[j] + radius);
                        let mut row = vec![0.0; n];
                        row[j] = -1.0;
                        a.push_row(&row);
                        b.push(-(w[j] - radius));
                    }
                    let e = piece.e.scale(t);
                    let f: Vec<f64> = (0..piece.e.rows())
                        .map(|i| piece.f[i] - dot(piece.e.row(i), z))
                        .collect();
                    // maximize <z*, w'>
                    let p = LpProblem::maximize(zstar.to_vec(), a, b).with_eq(e, f);
                    if let LpOutcome::Optimal { value, .. } = solve_lp(&p, tol)? {
                        best = Some(best.map(|x: f64| x.max(value)).unwrap_or(value));
                    }
                }
                best.map(|v| -2.0 * v / t)
            }
            SetPredicate::Preimage { .. } => {
                // coordinate descent on -2<z*,w'>/t with feasibility filter
                let mut w_cur = w.to_vec();
                let feasible = |wc: &[f64]| -> Result<bool> {
                    Ok(set.distance(&axpy(z, t, wc), tol)? <= t * 1e-7)
                };
                // pull w onto the set first
                let gap = set.direction_gap(z, t, &w_cur, tol)?;
                if gap > radius {
                    None
                } else {
                    // greedy improvement within the box
                    let mut improved = true;
                    let mut step = radius / 2.0;
                    let mut bestv = f64::INFINITY;
                    while step > 1e-9 {
                        if !improved {
                            step *= 0.5;
                        }
                        improved = false;
                        for j in 0..n {
                            for sgn in [1.0, -1.0] {
                                let mut cand = w_cur.clone();
                                cand[j] += sgn * step;
                                if norm_inf(&sub(&cand, w)) <= radius && feasible(&cand)? {
                                    let v = -2.0 * dot(zstar, &cand) / t;
                                    if v < bestv - 1e-14 {
                                        bestv = v;
                                        w_cur = cand;
                                        improved = true;
                                    }
                                }
                            }
                        }
                        if bestv.is_infinite() && !feasible(&w_cur)? {
                            break;
                        }
                        if feasible(&w_cur)? {
                            bestv = bestv.min(-2.0 * dot(zstar, &w_cur) / t);
                        }
                    }
                    if bestv.is_finite() {
                        Some(bestv)
                    } else {
                        None
                    }
                }
            }
        };
        if let Some(v) = value {
            any_feasible = true;
            tail.push(v);
        }
    }
    if !any_feasible {
        return Ok(D2Band::PlusInf);
    }
    let k = tail.len();
    if k >= 2 {
        let last = tail[k - 1];
        let prev = tail[k - 2];
        let swing = 0.4 * prev.abs().max(10.0);
        if last > 1e3 && last - prev > swing {
            return Ok(D2Band::PlusInf);
        }
        if last < -1e3 && prev - last > swing {
            return Ok(D2Band::MinusInf);
        }
    }
    let tail_slice = &tail[k.saturating_sub(4)..];
    let lo = tail_slice.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = tail_slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(D2Band::Finite { lo, hi })
}

/// Def-level directional limiting normals: sample base points z + t_k w_k
/// in S inside a shrinking directional neighborhood of w, compute the
/// regular normal cones there, and return the generator directions found.
/// Every returned direction is a genuine limiting normal up to sampling
/// tolerance; completeness is checked separately by
/// [`generator_approached`].
pub fn normal_limit_oracle(
    s: &PolyhedralSet,
    z: &[f64],
    w: &[f64],
    cfg: &SamplerConfig,
    tol: &Tolerance,
) -> Result<Vec<Vec<f64>>> {
    let mut collected: Vec<Vec<f64>> = Vec::new();
    let mut push = |v: Vec<f64>| {
        let nv = norm2(&v);
        if nv > 1e-9 {
            let vn: Vec<f64> = v.iter().map(|x| x / nv).collect();
            if !collected
                .iter()
                .any(|c| sub(c, &vn).iter().all(|d| d.abs() < 1e-7))
            {
                collected.push(vn);
            }
        }
    };
    let n = z.len();
    let wnorm = norm2(w).max(1.0);
    for t in cfg.t_sequence() {
        // per Def the probe directions must converge to w
        let radius = cfg.dir_neighborhood.1 * wnorm * (t / cfg.t0).sqrt();
        let mut dirs: Vec<Vec<f64>> = vec![w.to_vec()];
        for sig in 0..(3usize.pow(n as u32)).min(27) {
            let mut p = w.to_vec();
            let mut c = sig;
            for item in p.iter_mut().take(n) {
                let s3 = c % 3;
                c /= 3;
                *item += radius * ((s3 as f64) - 1.0);
            }
            dirs.push(p);
        }
        for wk in dirs {
            for piece in &s.pieces {
                let Some(zk) = best_piece_point(piece, z, t, &wk, tol)? else {
                    continue;
                };
                let achieved = scale(&sub(&zk, z), 1.0 / t);
                if norm_inf(&sub(&achieved, w)) > radius * 2.0 + 1e-9 {
                    continue;
                }
                let normal = crate::cones::regular_normal_cone(s, &zk, tol)?;
                let gens = crate::numeric::dd::dd_h_to_v(&normal.a, &normal.e, tol)?;
                for d in gens.directions() {
                    push(d);
                }
            }
        }
    }
    Ok(collected)
}

/// Completeness side of the normal-limit cross-check: by definition, the
/// generator g belongs to N_S(z; w) iff points z + t w' with w' -> w exist
/// where g is a regular normal. For each t the candidate base point is the
/// maximizer of <g, .> over each piece near direction w; the check passes
/// when such points exist down the whole t-sequence.
pub fn generator_approached(
    s: &PolyhedralSet,
    z: &[f64],
    w: &[f64],
    g: &[f64],
    cfg: &SamplerConfig,
    tol: &Tolerance,
) -> Result<bool> {
    let n = z.len();
    let wnorm = norm2(w).max(1.0);
    let mut witnessed_tail = 0usize;
    for t in cfg.t_sequence() {
        let radius = cfg.dir_neighborhood.1 * wnorm * (t / cfg.t0).sqrt();
        let mut found = false;
        for piece in &s.pieces {
            // maximize <g, w'> over {w' in B_inf(w, radius) : z + t w' in piece}
            let mut a = piece.a.scale(t);
            let mut b: Vec<f64> = (0..piece.a.rows())
                .map(|i| piece.b[i] - dot(piece.a.row(i), z))
                .collect();
            for j in 0..n {
                let mut row = vec![0.0; n];
                row[j] = 1.0;
                a.push_row(&row);
                b.push(w[j] + radius);
                let mut row = vec![0.0; n];
                row[j] = -1.0;
                a.push_row(&row);
                b.push(-(w[j] - radius));
            }
            let e = piece.e.scale(t);
            let f: Vec<f64> = (0..piece.e.rows())
                .map(|i| piece.f[i] - dot(piece.e.row(i), z))
                .collect();
            let p = LpProblem::maximize(g.to_vec(), a.clone(), b.clone()).with_eq(e.clone(), f.clone());
            let LpOutcome::Optimal { value: vstar, .. } = solve_lp(&p, tol)? else {
                continue;
            };
            // tie-break: the maximizer nearest to w decides membership
            let mut a2 = Matrix::zeros(0, n + 1);
            let mut b2 = Vec::new();
            for i in 0..a.rows() {
                let mut row = a.row(i).to_vec();
                row.push(0.0);
                a2.push_row(&row);
                b2.push(b[i]);
            }
            for j in 0..n {
                let mut row = vec![0.0; n + 1];
                row[j] = 1.0;
                row[n] = -1.0;
                a2.push_row(&row);
                b2.push(w[j]);
                let mut row = vec![0.0; n + 1];
                row[j] = -1.0;
                row[n] = -1.0;
                a2.push_row(&row);
                b2.push(-w[j]);
            }
            let mut e2 = Matrix::zeros(0, n + 1);
            let mut f2 = Vec::new();
            for i in 0..e.rows() {
                let mut row = e.row(i).to_vec();
                row.push(0.0);
                e2.push_row(&row);
                f2.push(f[i]);
            }
            let mut grow = g.to_vec();
            grow.push(0.0);
            e2.push_row(&grow);
            f2.push(vstar);
            let mut c2 = vec![0.0; n + 1];
            c2[n] = 1.0;
            let p2 = LpProblem::minimize(c2, a2, b2).with_eq(e2, f2);
            let LpOutcome::Optimal { x: wt, .. } = solve_lp(&p2, tol)? else {
                continue;
            };
            let zk = axpy(z, t, &wt[..n]);
            let normal = crate::cones::regular_normal_cone(s, &zk, tol)?;
            if normal.contains(g, tol.eps_feas) {
                found = true;
                break;
            }
        }
        if found {
            witnessed_tail += 1;
        } else {
            witnessed_tail = 0;
        }
    }
    // approached if the witness persists along the tail of the sequence
    Ok(witnessed_tail >= cfg.count.min(4))
}

/// The point of `piece` reachable as z + t w' with w' nearest to w.
fn best_piece_point(
    piece: &ConvexPolyhedron,
    z: &[f64],
    t: f64,
    w: &[f64],
    tol: &Tolerance,
) -> Result<Option<Vec<f64>>> {
    let n = piece.dim();
    let mut a = Matrix::zeros(0, n + 1);
    let mut b = Vec::new();
    for i in 0..piece.a.rows() {
        let mut row = scale(piece.a.row(i), t);
        row.push(0.0);
        a.push_row(&row);
        b.push(piece.b[i] - dot(piece.a.row(i), z));
    }
    for j in 0..n {
        let mut row = vec![0.0; n + 1];
        row[j] = 1.0;
        row[n] = -1.0;
        a.push_row(&row);
        b.push(w[j]);
        let mut row = vec![0.0; n + 1];
        row[j] = -1.0;
        row[n] = -1.0;
        a.push_row(&row);
        b.push(-w[j]);
    }
    let mut e = Matrix::zeros(0, n + 1);
    let mut f = Vec::new();
    for i in 0..piece.e.rows() {
        let mut row = scale(piece.e.row(i), t);
        row.push(0.0);
        e.push_row(&row);
        f.push(piece.f[i] - dot(piece.e.row(i), z));
    }
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let p = LpProblem::minimize(c, a, b).with_eq(e, f);
    match solve_lp(&p, tol)? {
        LpOutcome::Optimal { x, .. } => {
            let wbest = &x[..n];
            Ok(Some(axpy(z, t, wbest)))
        }
        _ => Ok(None),
    }
}

/// Two-sided membership comparison between a closed-form polyhedral cone
/// and an oracle membership predicate, on probes drawn from the cone's
/// generators and integer lattice directions. Returns the first
/// disagreement found.
pub fn cone_vs_oracle<F>(
    cone: &PolyhedralCone,
    mut oracle: F,
    probes: &[Vec<f64>],
    tol: &Tolerance,
) -> Result<Option<Vec<f64>>>
where
    F: FnMut(&[f64]) -> Result<bool>,
{
    for p in probes {
        let closed = cone.contains(p, tol)?;
        let sampled = oracle(p)?;
        if closed != sampled {
            return Ok(Some(p.clone()));
        }
    }
    Ok(None)
}
