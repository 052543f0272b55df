//! Critical cones and second-order necessary/sufficient optimality checks
//! for disjunctive programs min f(x) s.t. g(x) ∈ D, plus the copositivity
//! engine and the essential-local-minimizer / quadratic-growth sampling
//! oracles.

use crate::error::{Error, Result};
use crate::expr::jet::{differentiate_at, eval_value, SmoothMapAtPoint};
use crate::expr::parse::Expr;
use crate::extreal::ExtReal;
use crate::numeric::dd::dd_h_to_v;
use crate::numeric::lp::{solve_lp, LpOutcome, LpProblem};
use crate::numeric::matrix::{
    axpy, dot, norm2, norm_inf, sub, symmetric_eigen, Matrix,
};
use crate::numeric::Tolerance;
use crate::polyhedra::{pattern_regions, ConvexPolyhedron, PolyhedralCone, PolyhedralSet};
use crate::systems::{
    foscms_check, multiplier_set, nondegeneracy_check, support_t2_gamma, DirectionalSystem,
    MultiplierKind, SystemPoint,
};

pub const DEFAULT_SEED: u64 = 0x5EED;

/// A disjunctive program frozen at a candidate point.
#[derive(Debug, Clone)]
pub struct ProblemPoint {
    pub objective: Expr,
    pub constraints: Vec<Expr>,
    pub d_set: PolyhedralSet,
    pub xbar: Vec<f64>,
    /// f at xbar: value, gradient, Hessian.
    pub f_at: SmoothMapAtPoint,
    /// g at xbar.
    pub g_at: SmoothMapAtPoint,
    pub kappa: Option<f64>,
}

impl ProblemPoint {
    pub fn new(
        objective: Expr,
        constraints: Vec<Expr>,
        d_set: PolyhedralSet,
        xbar: Vec<f64>,
        kappa: Option<f64>,
        tol: &Tolerance,
    ) -> Result<Self> {
        let f_at = differentiate_at(std::slice::from_ref(&objective), &xbar)?;
        let g_at = differentiate_at(&constraints, &xbar)?;
        if g_at.output_dim() != d_set.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} constraint components but the set has dimension {}",
                g_at.output_dim(),
                d_set.dim
            )));
        }
        if !d_set.contains(&g_at.value, tol)? {
            let distance = match d_set.distance_inf(&g_at.value, tol)? {
                ExtReal::Finite(d) => d,
                _ => f64::INFINITY,
            };
            return Err(Error::PointNotInSet { distance });
        }
        Ok(ProblemPoint {
            objective,
            constraints,
            d_set,
            xbar,
            f_at,
            g_at,
            kappa,
        })
    }

    pub fn dim(&self) -> usize {
        self.xbar.len()
    }

    pub fn grad_f(&self) -> &[f64] {
        self.f_at.jacobian.row(0)
    }

    pub fn system_point(&self, tol: &Tolerance) -> Result<SystemPoint> {
        SystemPoint::new(
            self.xbar.clone(),
            self.d_set.clone(),
            self.g_at.clone(),
            self.kappa,
            tol,
        )
    }

    pub fn eval_f(&self, x: &[f64]) -> Result<f64> {
        eval_value(&self.objective, x)
    }

    pub fn eval_g(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.constraints.iter().map(|e| eval_value(e, x)).collect()
    }

    /// α ∇²f + Σ λ_i ∇²g_i at xbar.
    pub fn lagrangian_hessian(&self, alpha: f64, lambda: &[f64]) -> Matrix {
        let n = self.dim();
        let mut q = self.f_at.hessians[0].scale(alpha);
        for (i, h) in self.g_at.hessians.iter().enumerate() {
            if lambda[i] != 0.0 {
                for r in 0..n {
                    for c in 0..n {
                        q.set(r, c, q.get(r, c) + lambda[i] * h.get(r, c));
                    }
                }
            }
        }
        q
    }
}

/// One cell of the refined critical cone: the direction pattern (and hence
/// every directional cone of D at ∇g u) is constant on its relative
/// interior.
#[derive(Debug, Clone)]
pub struct RefinedPiece {
    pub closure: ConvexPolyhedron,
    pub rep_dir: Vec<f64>,
}

/// Critical cone C(xbar) with its pattern refinement.
#[derive(Debug, Clone)]
pub struct CriticalCone {
    pub cone: PolyhedralCone,
    pub refined: Vec<RefinedPiece>,
}

/// C(xbar) = {u : ∇g u ∈ T_D(g(xbar)), ∇f u <= 0}, refined into the cells
/// of the pulled-back row arrangement (plus the objective hyperplane).
pub fn critical_cone(pp: &ProblemPoint, tol: &Tolerance) -> Result<CriticalCone> {
    let t = pp.d_set.tangent_cone(&pp.g_at.value, tol)?;
    let jac = &pp.g_at.jacobian;
    let n = pp.dim();
    let grad_f = pp.grad_f().to_vec();
    let mut pieces = Vec::new();
    for p in t.pieces() {
        let mut a = p.a.matmul(jac);
        a.push_row(&grad_f);
        pieces.push(ConvexPolyhedron::cone(a, p.e.matmul(jac)));
    }
    let cone = PolyhedralCone::from_pieces(n, pieces.clone())?;
    let pulled = PolyhedralSet::new(n, pieces)?;
    let regions = pattern_regions(&pulled, tol)?;
    let mut refined = Vec::new();
    for region in &regions {
        let closure = region_closure(&pulled, region, n);
        let mut rep = region.rep.clone();
        if norm_inf(&rep) <= 1e-7 {
            // a subspace cell reports the origin; any basis direction of it
            // realizes the same pattern. A zero-dimensional cell is the
            // apex and carries no nonzero directions.
            match closure.lineality_space(tol).into_iter().next() {
                Some(dir) => rep = dir,
                None => continue,
            }
        }
        let s = norm2(&rep);
        for v in rep.iter_mut() {
            *v /= s;
        }
        refined.push(RefinedPiece {
            closure,
            rep_dir: rep,
        });
    }
    Ok(CriticalCone { cone, refined })
}

/// Closed H-representation of a pattern region from the rows it pins.
fn region_closure(
    pulled: &PolyhedralSet,
    region: &crate::polyhedra::Region,
    n: usize,
) -> ConvexPolyhedron {
    // the closure of a cell is cut out by the rows of one member piece with
    // its active rows tightened to equalities
    let (pi, active) = &region.pattern[0];
    let piece = &pulled.pieces[*pi];
    let mut a = Matrix::zeros(0, n);
    let mut e = piece.e.clone();
    for i in 0..piece.a.rows() {
        if active.contains(&i) {
            e.push_row(piece.a.row(i));
        } else {
            a.push_row(piece.a.row(i));
        }
    }
    ConvexPolyhedron::cone(a, e)
}

#[derive(Debug, Clone)]
pub enum Verdict {
    Satisfied,
    Violated { witness: Vec<f64>, detail: String },
    Proven,
    Disproven { witness: Vec<f64> },
    Unknown { reason: String },
}

impl Verdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::Satisfied)
    }
    pub fn is_proven(&self) -> bool {
        matches!(self, Verdict::Proven)
    }
    pub fn is_violated(&self) -> bool {
        matches!(self, Verdict::Violated { .. })
    }
}

/// Result of the directional second-order necessary check.
#[derive(Debug, Clone)]
pub struct NecessaryReport {
    pub verdict: Verdict,
    pub mode: MultiplierKind,
    pub cq_holds: bool,
    /// sup over the multiplier set of ∇²L(u,u).
    pub sup_value: Option<ExtReal>,
    pub multiplier: Option<Vec<f64>>,
}

/// Thm-style necessary condition in direction u: some multiplier λ in the
/// directional set satisfies ∇²_xx L(xbar, λ)(u, u) >= 0. Mode S requires
/// directional nondegeneracy, mode M rests on MSCQ (checked via FOSCMS).
pub fn necessary_check(
    pp: &ProblemPoint,
    u: &[f64],
    mode: MultiplierKind,
    tol: &Tolerance,
) -> Result<NecessaryReport> {
    let sp = pp.system_point(tol)?;
    let ds = DirectionalSystem::new(sp, u.to_vec(), tol)?;
    let cq = match mode {
        MultiplierKind::S => nondegeneracy_check(&ds, tol)?,
        MultiplierKind::M => foscms_check(&ds, tol)?,
    };
    let xstar: Vec<f64> = pp.grad_f().iter().map(|v| -v).collect();
    let mset = multiplier_set(&ds, &xstar, mode);
    if mset.is_empty(tol)? {
        return Ok(if cq.holds {
            NecessaryReport {
                verdict: Verdict::Violated {
                    witness: u.to_vec(),
                    detail: "no multiplier satisfies the first-order system".into(),
                },
                mode,
                cq_holds: true,
                sup_value: None,
                multiplier: None,
            }
        } else {
            NecessaryReport {
                verdict: Verdict::Unknown {
                    reason: "multiplier set empty and the constraint qualification fails".into(),
                },
                mode,
                cq_holds: false,
                sup_value: None,
                multiplier: None,
            }
        });
    }
    // ∇²L(u,u) = u^T ∇²f u + <λ, ∇²g(u,u)> is affine in λ
    let f_term = {
        let hu = pp.f_at.hessians[0].matvec(u);
        dot(u, &hu)
    };
    let (_, sup, attaining) = mset.linear_extremes(&ds.curvature, None, tol)?;
    let total = sup.add(ExtReal::Finite(f_term))?;
    let satisfied = match total {
        ExtReal::PlusInf => true,
        ExtReal::Finite(v) => v >= -tol.eps_opt,
        ExtReal::MinusInf => false,
    };
    let verdict = if satisfied {
        Verdict::Satisfied
    } else if cq.holds {
        Verdict::Violated {
            witness: u.to_vec(),
            detail: format!("sup of the Lagrangian quadratic is {total}"),
        }
    } else {
        Verdict::Unknown {
            reason: format!(
                "Lagrangian quadratic sup {total} is negative but the constraint qualification fails"
            ),
        }
    };
    Ok(NecessaryReport {
        verdict,
        mode,
        cq_holds: cq.holds,
        sup_value: Some(total),
        multiplier: attaining,
    })
}

/// Strict-copositivity decision for Q on a convex polyhedral cone.
#[derive(Debug, Clone)]
pub enum CopositivityOutcome {
    /// u^T Q u >= margin ||u||² on the cone.
    Proven { margin: f64 },
    /// A unit direction in the cone with u^T Q u <= 0.
    Disproven { witness: Vec<f64> },
    Unknown,
}

const MAX_SIMPLICES: usize = 20_000;

/// Simplicial-partition test for u^T Q u > 0 on P \ {0}. The lineality part
/// is handled by an eigen check and a Schur-complement reduction; the
/// pointed part by edge-bisection refinement of the generator simplex with
/// the all-pairs-positive vertex criterion.
pub fn copositivity_test(
    q: &Matrix,
    cone: &ConvexPolyhedron,
    depth: usize,
    tol: &Tolerance,
) -> Result<CopositivityOutcome> {
    let n = q.rows();
    let lin = cone.lineality_space(tol);
    let mut margin_lineality = f64::INFINITY;
    let mut q_eff = q.clone();
    if !lin.is_empty() {
        let k = lin.len();
        let b = Matrix::from_fn(n, k, |i, j| lin[j][i]);
        let btqb = b.transpose().matmul(q).matmul(&b);
        let (eigs, vecs) = symmetric_eigen(&btqb);
        let (mut min_eig, mut min_idx) = (f64::INFINITY, 0);
        for (i, e) in eigs.iter().enumerate() {
            if *e < min_eig {
                min_eig = *e;
                min_idx = i;
            }
        }
        if min_eig <= tol.eps_zero {
            // a lineality direction kills positivity
            let coeffs: Vec<f64> = (0..k).map(|i| vecs.get(i, min_idx)).collect();
            let mut w = vec![0.0; n];
            for (c, l) in coeffs.iter().zip(&lin) {
                w = axpy(&w, *c, l);
            }
            let s = norm2(&w);
            for v in w.iter_mut() {
                *v /= s;
            }
            let quad = dot(&w, &q.matvec(&w));
            if quad <= tol.eps_feas {
                return Ok(CopositivityOutcome::Disproven { witness: w });
            }
            return Ok(CopositivityOutcome::Unknown);
        }
        margin_lineality = min_eig;
        // Schur complement: Q - QB (B^T Q B)^{-1} B^T Q
        let qb = q.matmul(&b); // n x k
        let mut inv_cols = Matrix::zeros(k, k);
        for j in 0..k {
            let mut ej = vec![0.0; k];
            ej[j] = 1.0;
            let col = btqb
                .solve(&ej, 1e-12)
                .ok_or_else(|| Error::AssumptionViolated("singular lineality block".into()))?;
            for i in 0..k {
                inv_cols.set(i, j, col[i]);
            }
        }
        let corr = qb.matmul(&inv_cols).matmul(&qb.transpose());
        q_eff = Matrix::from_fn(n, n, |i, j| q.get(i, j) - corr.get(i, j));
    }

    // pointed part: generators of the cone orthogonal to the lineality
    let mut pointed = cone.clone();
    for l in &lin {
        pointed.e.push_row(l);
        pointed.f.push(0.0);
    }
    let gens = dd_h_to_v(&pointed.a, &pointed.e, tol)?;
    let rays: Vec<Vec<f64>> = gens.rays;
    if !gens.lines.is_empty() {
        return Err(Error::AssumptionViolated(
            "pointed part still contains lines".into(),
        ));
    }
    if rays.is_empty() {
        // the cone is its lineality space (or {0})
        return Ok(CopositivityOutcome::Proven {
            margin: if lin.is_empty() { f64::INFINITY } else { margin_lineality },
        });
    }

    let mut queue: Vec<(Vec<Vec<f64>>, usize)> = vec![(rays, 0)];
    let mut processed = 0usize;
    let mut margin_pointed = f64::INFINITY;
    let mut exhausted = false;
    while let Some((verts, d)) = queue.pop() {
        processed += 1;
        if processed > MAX_SIMPLICES {
            exhausted = true;
            break;
        }
        let k = verts.len();
        let gram = Matrix::from_fn(k, k, |i, j| dot(&verts[i], &q_eff.matvec(&verts[j])));
        // vertex directions themselves
        let mut worst = (f64::INFINITY, 0, 0);
        for i in 0..k {
            if gram.get(i, i) <= tol.eps_zero {
                if let Some(w) = rebuild_witness(&verts[i], q, &lin, &q_eff, tol) {
                    return Ok(CopositivityOutcome::Disproven { witness: w });
                }
                return Ok(CopositivityOutcome::Unknown);
            }
        }
        let mut minval = f64::INFINITY;
        for i in 0..k {
            for j in 0..k {
                let v = gram.get(i, j);
                if v < minval {
                    minval = v;
                }
                if i < j && v < worst.0 {
                    worst = (v, i, j);
                }
            }
        }
        if minval > tol.eps_zero {
            margin_pointed = margin_pointed.min(minval);
            continue;
        }
        if d >= depth {
            exhausted = true;
            continue;
        }
        // bisect the worst edge
        let (_, i, j) = worst;
        let mut mid = axpy(&verts[i], 1.0, &verts[j]);
        let s = norm2(&mid);
        if s <= 1e-12 {
            // opposite directions inside a pointed cone: numerically odd
            exhausted = true;
            continue;
        }
        for v in mid.iter_mut() {
            *v /= s;
        }
        let mut left = verts.clone();
        left[i] = mid.clone();
        let mut right = verts;
        right[j] = mid;
        queue.push((left, d + 1));
        queue.push((right, d + 1));
    }
    if exhausted {
        return Ok(CopositivityOutcome::Unknown);
    }
    Ok(CopositivityOutcome::Proven {
        margin: margin_lineality.min(margin_pointed),
    })
}

/// Lift a pointed-part witness back to the full cone, minimizing over the
/// lineality component, and re-verify it against the original form.
fn rebuild_witness(
    v: &[f64],
    q: &Matrix,
    lin: &[Vec<f64>],
    q_eff: &Matrix,
    tol: &Tolerance,
) -> Option<Vec<f64>> {
    let mut w = v.to_vec();
    if !lin.is_empty() {
        let n = v.len();
        let k = lin.len();
        let b = Matrix::from_fn(n, k, |i, j| lin[j][i]);
        let btqb = b.transpose().matmul(q).matmul(&b);
        let rhs: Vec<f64> = (0..k).map(|i| -dot(&b.transpose().row(i), &q.matvec(v))).collect();
        if let Some(coeffs) = btqb.solve(&rhs, 1e-12) {
            for (c, l) in coeffs.iter().zip(lin) {
                w = axpy(&w, *c, l);
            }
        }
    }
    let s = norm2(&w);
    if s <= 1e-12 {
        return None;
    }
    for x in w.iter_mut() {
        *x /= s;
    }
    let quad = dot(&w, &q.matvec(&w));
    let _ = q_eff;
    if quad <= tol.eps_feas {
        Some(w)
    } else {
        None
    }
}

/// Certificate for one refined critical piece.
#[derive(Debug, Clone)]
pub struct PieceCertificate {
    pub rep_dir: Vec<f64>,
    pub alpha: f64,
    pub lambda: Vec<f64>,
    pub margin: f64,
}

/// Result of the sufficiency search.
#[derive(Debug, Clone)]
pub struct SufficientReport {
    pub verdict: Verdict,
    pub certificates: Vec<PieceCertificate>,
    /// Smallest certified copositivity margin across pieces.
    pub margin: Option<f64>,
    pub failing_pieces: Vec<Vec<f64>>,
}

const CANDIDATE_BOX: f64 = 8.0;

/// Second-order sufficiency: for every refined critical piece find (α, λ),
/// α ∈ {0, 1}, λ in the directional regular normal cone with
/// α ∇f + ∇g^T λ = 0, making ∇²_xx L^α strictly copositive on the piece.
/// `Proven` certifies an essential local minimizer of second order; the
/// search is sound but incomplete, so failures yield `Unknown`.
pub fn sufficient_check(pp: &ProblemPoint, depth: usize, tol: &Tolerance) -> Result<SufficientReport> {
    let cc = critical_cone(pp, tol)?;
    let mut certificates = Vec::new();
    let mut failing = Vec::new();
    let mut global_margin = f64::INFINITY;
    for piece in &cc.refined {
        let sp = pp.system_point(tol)?;
        let ds = DirectionalSystem::new(sp, piece.rep_dir.clone(), tol)?;
        let mut found = None;
        for alpha in [1.0, 0.0] {
            let candidates = multiplier_candidates(pp, &ds, alpha, tol)?;
            for lambda in candidates {
                if alpha == 0.0 && norm_inf(&lambda) <= tol.eps_zero {
                    continue; // (α, λ) must not both vanish
                }
                let q = pp.lagrangian_hessian(alpha, &lambda);
                if let CopositivityOutcome::Proven { margin } =
                    copositivity_test(&q, &piece.closure, depth, tol)?
                {
                    found = Some(PieceCertificate {
                        rep_dir: piece.rep_dir.clone(),
                        alpha,
                        lambda,
                        margin,
                    });
                    break;
                }
            }
            if found.is_some() {
                break;
            }
        }
        match found {
            Some(cert) => {
                global_margin = global_margin.min(cert.margin);
                certificates.push(cert);
            }
            None => failing.push(piece.rep_dir.clone()),
        }
    }
    let verdict = if failing.is_empty() {
        Verdict::Proven
    } else {
        Verdict::Unknown {
            reason: format!(
                "{} critical piece(s) lack a certified multiplier",
                failing.len()
            ),
        }
    };
    let margin = if certificates.is_empty() {
        None
    } else {
        Some(global_margin)
    };
    Ok(SufficientReport {
        verdict,
        certificates,
        margin,
        failing_pieces: failing,
    })
}

/// Candidate multipliers: vertices of the admissible polytope
/// {λ ∈ N̂_{T_D}(∇g u) : ∇g^T λ = −α ∇f, ||λ||_∞ <= ρ}, enumerated through
/// the homogenization, plus the LP-dual multiplier of the second-order
/// support program when it lands in the regular normal cone.
fn multiplier_candidates(
    pp: &ProblemPoint,
    ds: &DirectionalSystem,
    alpha: f64,
    tol: &Tolerance,
) -> Result<Vec<Vec<f64>>> {
    let d = ds.output_dim();
    let reg = &ds.regular_normal;
    // homogenized system in (λ, t)
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..reg.a.rows() {
        let mut r = reg.a.row(i).to_vec();
        r.push(0.0);
        rows.push(r);
    }
    for j in 0..d {
        let mut r = vec![0.0; d + 1];
        r[j] = 1.0;
        r[d] = -CANDIDATE_BOX;
        rows.push(r);
        let mut r = vec![0.0; d + 1];
        r[j] = -1.0;
        r[d] = -CANDIDATE_BOX;
        rows.push(r);
    }
    let mut tr = vec![0.0; d + 1];
    tr[d] = -1.0;
    rows.push(tr);
    let a = Matrix::from_rows(rows, d + 1);
    let mut erows: Vec<Vec<f64>> = Vec::new();
    for i in 0..reg.e.rows() {
        let mut r = reg.e.row(i).to_vec();
        r.push(0.0);
        erows.push(r);
    }
    let jac_t = pp.g_at.jacobian.transpose();
    let grad_f = pp.grad_f();
    for i in 0..jac_t.rows() {
        let mut r = jac_t.row(i).to_vec();
        r.push(alpha * grad_f[i]);
        erows.push(r);
    }
    let e = Matrix::from_rows(erows, d + 1);
    let gens = dd_h_to_v(&a, &e, tol)?;
    let mut out = Vec::new();
    for ray in gens.rays {
        let t = ray[d];
        if t > 1e-9 {
            out.push(ray[..d].iter().map(|v| v / t).collect::<Vec<f64>>());
        }
    }
    if alpha == 1.0 {
        let xstar: Vec<f64> = grad_f.iter().map(|v| -v).collect();
        let sup = support_t2_gamma(ds, &xstar, tol)?;
        if let Some(y) = sup.multiplier {
            if reg.contains(&y, tol.eps_feas) {
                out.push(y);
            }
        }
    }
    // deterministic order, shortest multipliers first
    out.sort_by(|x, y| {
        norm2(x)
            .partial_cmp(&norm2(y))
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

/// Outcome of the sampling oracles.
#[derive(Debug, Clone)]
pub enum OracleOutcome {
    Holds,
    FailsAt { x: Vec<f64> },
}

impl OracleOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, OracleOutcome::Holds)
    }
}

/// Essential-local-minimizer test: max{f(x) − f(xbar), dist(g(x), D)} >=
/// eps ||x − xbar||² on Halton samples in the delta ball. A reported
/// failure point is re-verified by direct evaluation.
pub fn essential_min_oracle(
    pp: &ProblemPoint,
    eps: f64,
    delta: f64,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<OracleOutcome> {
    let n = pp.dim();
    let f0 = pp.eval_f(&pp.xbar)?;
    let mut idx = 1 + (seed % 1024);
    let mut tested = 0usize;
    while tested < samples {
        let x = halton_ball_point(&pp.xbar, delta, n, &mut idx);
        let Some(x) = x else { continue };
        tested += 1;
        let r2 = {
            let d = sub(&x, &pp.xbar);
            dot(&d, &d)
        };
        if r2 <= 0.0 {
            continue;
        }
        let need = eps * r2;
        let fgrow = pp.eval_f(&x)? - f0;
        if fgrow >= need {
            continue;
        }
        let gx = pp.eval_g(&x)?;
        let dist = match pp.d_set.distance_inf(&gx, tol)? {
            ExtReal::Finite(v) => v,
            ExtReal::PlusInf => f64::INFINITY,
            ExtReal::MinusInf => 0.0,
        };
        if fgrow.max(dist) < need - 1e-12 {
            return Ok(OracleOutcome::FailsAt { x });
        }
    }
    Ok(OracleOutcome::Holds)
}

/// Quadratic-growth test on feasible samples: points are pulled onto Γ by a
/// per-piece Gauss-Newton projection with LP steps.
pub fn quadratic_growth_oracle(
    pp: &ProblemPoint,
    eps: f64,
    delta: f64,
    samples: usize,
    seed: u64,
    tol: &Tolerance,
) -> Result<OracleOutcome> {
    let n = pp.dim();
    let f0 = pp.eval_f(&pp.xbar)?;
    let mut idx = 1 + (seed % 1024);
    let mut tested = 0usize;
    let mut attempts = 0usize;
    while tested < samples && attempts < samples * 4 {
        attempts += 1;
        let Some(x) = halton_ball_point(&pp.xbar, delta, n, &mut idx) else {
            continue;
        };
        let Some(xf) = project_feasible(pp, &x, tol)? else {
            continue;
        };
        let d = sub(&xf, &pp.xbar);
        let r2 = dot(&d, &d);
        if r2 <= 1e-20 || r2.sqrt() > delta {
            continue;
        }
        tested += 1;
        let fgrow = pp.eval_f(&xf)? - f0;
        if fgrow < eps * r2 - 1e-12 {
            // re-verify feasibility before reporting
            let gx = pp.eval_g(&xf)?;
            if pp.d_set.contains(&gx, &tol.scaled(10.0))? {
                return Ok(OracleOutcome::FailsAt { x: xf });
            }
        }
    }
    Ok(OracleOutcome::Holds)
}

/// Nearest feasible point via per-piece Gauss-Newton with max-norm LP
/// steps; `None` if no piece projection converges.
pub fn project_feasible(
    pp: &ProblemPoint,
    x: &[f64],
    tol: &Tolerance,
) -> Result<Option<Vec<f64>>> {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for piece in &pp.d_set.pieces {
        let mut xk = x.to_vec();
        for _ in 0..12 {
            let gmap = differentiate_at(&pp.constraints, &xk);
            let Ok(gmap) = gmap else { break };
            if piece.contains(&gmap.value, tol.eps_feas) {
                let dist = norm_inf(&sub(&xk, x));
                if best.as_ref().map(|(d, _)| dist < *d).unwrap_or(true) {
                    best = Some((dist, xk.clone()));
                }
                break;
            }
            // min ||Δ||_∞ s.t. A(g + JΔ) <= b, E(g + JΔ) = f
            let n = pp.dim();
            let mut a = Matrix::zeros(0, n + 1);
            let mut b = Vec::new();
            for i in 0..piece.a.rows() {
                let row_g = piece.a.row(i);
                let mut r = gmap.jacobian.tr_matvec(row_g);
                r.push(0.0);
                a.push_row(&r);
                b.push(piece.b[i] - dot(row_g, &gmap.value));
            }
            for j in 0..n {
                let mut r = vec![0.0; n + 1];
                r[j] = 1.0;
                r[n] = -1.0;
                a.push_row(&r);
                b.push(0.0);
                let mut r = vec![0.0; n + 1];
                r[j] = -1.0;
                r[n] = -1.0;
                a.push_row(&r);
                b.push(0.0);
            }
            let mut e = Matrix::zeros(0, n + 1);
            let mut f = Vec::new();
            for i in 0..piece.e.rows() {
                let row_g = piece.e.row(i);
                let mut r = gmap.jacobian.tr_matvec(row_g);
                r.push(0.0);
                e.push_row(&r);
                f.push(piece.f[i] - dot(row_g, &gmap.value));
            }
            let mut c = vec![0.0; n + 1];
            c[n] = 1.0;
            let lp = LpProblem::minimize(c, a, b).with_eq(e, f);
            match solve_lp(&lp, tol)? {
                LpOutcome::Optimal { x: step, .. } => {
                    let delta_step = &step[..n];
                    if norm_inf(delta_step) <= 1e-14 {
                        break;
                    }
                    xk = axpy(&xk, 1.0, delta_step);
                }
                _ => break,
            }
        }
    }
    Ok(best.map(|(_, x)| x))
}

/// Search for a feasible descent point near xbar along a violated critical
/// direction: confirms that the necessary condition's failure witnesses a
/// non-minimizer.
pub fn find_descent_point(
    pp: &ProblemPoint,
    u: &[f64],
    delta: f64,
    tol: &Tolerance,
) -> Result<Option<Vec<f64>>> {
    let f0 = pp.eval_f(&pp.xbar)?;
    let un = norm2(u);
    if un <= 0.0 {
        return Ok(None);
    }
    let step: Vec<f64> = u.iter().map(|v| v / un).collect();
    let mut t = delta;
    for _ in 0..40 {
        let x = axpy(&pp.xbar, t, &step);
        if let Some(xf) = project_feasible(pp, &x, tol)? {
            if norm2(&sub(&xf, &pp.xbar)) <= delta && pp.eval_f(&xf)? < f0 - 1e-14 {
                return Ok(Some(xf));
            }
        }
        t *= 0.7;
    }
    Ok(None)
}

fn halton_ball_point(
    center: &[f64],
    delta: f64,
    n: usize,
    idx: &mut u64,
) -> Option<Vec<f64>> {
    use crate::systems::{halton, PRIMES};
    let i = *idx;
    *idx += 1;
    let x: Vec<f64> = (0..n)
        .map(|j| center[j] + delta * (2.0 * halton(i, PRIMES[j % PRIMES.len()]) - 1.0))
        .collect();
    let d = sub(&x, center);
    if dot(&d, &d).sqrt() <= delta {
        Some(x)
    } else {
        None
    }
}
