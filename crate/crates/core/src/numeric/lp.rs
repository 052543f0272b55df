use super::matrix::{dot, norm_inf, Matrix};
use super::tolerance::Tolerance;
use crate::error::{Error, Result};

/// Linear program
/// `opt c^T x  s.t.  A_ineq x <= b_ineq,  A_eq x = b_eq`
/// over free variables.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub c: Vec<f64>,
    pub a_ineq: Matrix,
    pub b_ineq: Vec<f64>,
    pub a_eq: Matrix,
    pub b_eq: Vec<f64>,
    pub sense: Sense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

impl LpProblem {
    pub fn maximize(c: Vec<f64>, a_ineq: Matrix, b_ineq: Vec<f64>) -> Self {
        let n = c.len();
        LpProblem {
            c,
            a_ineq,
            b_ineq,
            a_eq: Matrix::empty(n),
            b_eq: vec![],
            sense: Sense::Max,
        }
    }

    pub fn with_eq(mut self, a_eq: Matrix, b_eq: Vec<f64>) -> Self {
        self.a_eq = a_eq;
        self.b_eq = b_eq;
        self
    }

    pub fn minimize(c: Vec<f64>, a_ineq: Matrix, b_ineq: Vec<f64>) -> Self {
        LpProblem {
            sense: Sense::Min,
            ..LpProblem::maximize(c, a_ineq, b_ineq)
        }
    }

    pub fn num_vars(&self) -> usize {
        self.c.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.len();
        if self.a_ineq.cols() != n || self.a_eq.cols() != n {
            return Err(Error::DimensionMismatch(format!(
                "LP has {} variables but constraint blocks have {} / {} columns",
                n,
                self.a_ineq.cols(),
                self.a_eq.cols()
            )));
        }
        if self.a_ineq.rows() != self.b_ineq.len() || self.a_eq.rows() != self.b_eq.len() {
            return Err(Error::DimensionMismatch(
                "constraint row counts do not match right-hand sides".into(),
            ));
        }
        Ok(())
    }
}

/// Solver outcome with certificates.
///
/// For `Optimal`, the duals satisfy (within tolerances)
/// `A^T dual_ineq + E^T dual_eq = c` for `Max` and `= -c` for `Min`,
/// `dual_ineq >= 0`, complementary slackness, and strong duality
/// `value = b^T dual_ineq + f^T dual_eq` (negated for `Min`).
/// For `Unbounded`, `ray` is feasible for the recession system and improves
/// the objective. For `Infeasible`, `farkas` stacks multipliers for the
/// inequality rows (nonnegative) and equality rows with
/// `A^T far_in + E^T far_eq = 0` and `b^T far_in + f^T far_eq < 0`.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        value: f64,
        dual_ineq: Vec<f64>,
        dual_eq: Vec<f64>,
    },
    Unbounded {
        ray: Vec<f64>,
    },
    Infeasible {
        farkas: Vec<f64>,
    },
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpOutcome::Optimal { x, value, .. } => Some((x, *value)),
            _ => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible { .. })
    }
}

const PIVOT_EPS: f64 = 1e-9;
const MAX_ITERS: usize = 50_000;

struct Tableau {
    /// m x (ncols+1) dense tableau, last column is the rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let d = self.t[row][col];
        let w = self.ncols + 1;
        for j in 0..w {
            self.t[row][j] /= d;
        }
        for i in 0..self.t.len() {
            if i != row {
                let f = self.t[i][col];
                if f != 0.0 {
                    for j in 0..w {
                        self.t[i][j] -= f * self.t[row][j];
                    }
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule primal simplex on min c^T x over the current tableau.
    /// `allowed` masks columns permitted to enter. Returns entering column
    /// on unboundedness.
    fn run(&mut self, cost: &[f64], allowed: &[bool], tol: &Tolerance) -> Result<Option<usize>> {
        for _ in 0..MAX_ITERS {
            let m = self.t.len();
            // simplex multipliers' contribution folded into reduced costs
            let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
            let mut enter = None;
            for j in 0..self.ncols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut z = cost[j];
                for i in 0..m {
                    if cb[i] != 0.0 {
                        z -= cb[i] * self.t[i][j];
                    }
                }
                if z < -tol.eps_opt {
                    enter = Some(j);
                    break; // Bland: smallest index
                }
            }
            let Some(j) = enter else {
                return Ok(None); // optimal
            };
            let mut leave: Option<usize> = None;
            let mut best = f64::INFINITY;
            for i in 0..m {
                let a = self.t[i][j];
                if a > PIVOT_EPS {
                    let ratio = self.t[i][self.ncols] / a;
                    let better = ratio < best - PIVOT_EPS
                        || (ratio < best + PIVOT_EPS
                            && leave.map(|l| self.basis[i] < self.basis[l]).unwrap_or(true));
                    if better {
                        best = ratio;
                        leave = Some(i);
                    }
                }
            }
            match leave {
                Some(r) => self.pivot(r, j),
                None => return Ok(Some(j)), // unbounded along column j
            }
        }
        Err(Error::AssumptionViolated(
            "simplex iteration cap exceeded".into(),
        ))
    }

    /// y = c_B^T B^{-1}, read off the artificial block at `art_start`.
    fn multipliers(&self, cost: &[f64], art_start: usize) -> Vec<f64> {
        let m = self.t.len();
        let cb: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        (0..m)
            .map(|i| (0..m).map(|k| cb[k] * self.t[k][art_start + i]).sum())
            .collect()
    }
}

/// Two-phase dense primal simplex with Bland's anti-cycling rule.
///
/// Deterministic: identical inputs produce identical outcomes bit-for-bit.
pub fn solve_lp(p: &LpProblem, tol: &Tolerance) -> Result<LpOutcome> {
    p.validate()?;
    let n = p.num_vars();
    let m1 = p.a_ineq.rows();
    let m2 = p.a_eq.rows();
    let m = m1 + m2;

    // standard form columns: x+ (n), x- (n), slack (m1), artificial (m)
    let nreal = 2 * n + m1;
    let ncols = nreal + m;

    let mut rhs: Vec<f64> = p.b_ineq.iter().chain(p.b_eq.iter()).cloned().collect();
    let mut sigma = vec![1.0; m];
    let mut t = vec![vec![0.0; ncols + 1]; m];
    for i in 0..m {
        let arow = if i < m1 {
            p.a_ineq.row(i)
        } else {
            p.a_eq.row(i - m1)
        };
        if rhs[i] < 0.0 {
            sigma[i] = -1.0;
            rhs[i] = -rhs[i];
        }
        for j in 0..n {
            t[i][j] = sigma[i] * arow[j];
            t[i][n + j] = -sigma[i] * arow[j];
        }
        if i < m1 {
            t[i][2 * n + i] = sigma[i];
        }
        t[i][nreal + i] = 1.0;
        t[i][ncols] = rhs[i];
    }
    let mut tab = Tableau {
        t,
        basis: (nreal..ncols).collect(),
        ncols,
    };

    // Phase I: minimize the sum of artificials.
    let mut cost1 = vec![0.0; ncols];
    for j in nreal..ncols {
        cost1[j] = 1.0;
    }
    let allowed_all = vec![true; ncols];
    let unb = tab.run(&cost1, &allowed_all, tol)?;
    debug_assert!(unb.is_none(), "phase I is bounded below by zero");
    let phase1: f64 = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= nreal)
        .map(|(i, _)| tab.t[i][ncols])
        .sum();
    if phase1 > tol.eps_feas {
        let y = tab.multipliers(&cost1, nreal);
        let mut farkas: Vec<f64> = (0..m).map(|i| -sigma[i] * y[i]).collect();
        for v in farkas.iter_mut().take(m1) {
            if *v < 0.0 {
                *v = 0.0; // roundoff clamp; dual feasibility guarantees >= 0
            }
        }
        let scale = norm_inf(&farkas);
        if scale > 0.0 {
            for v in farkas.iter_mut() {
                *v /= scale;
            }
        }
        return Ok(LpOutcome::Infeasible { farkas });
    }

    // Drive basic artificials out where a real pivot exists.
    for i in 0..m {
        if tab.basis[i] >= nreal {
            if let Some(j) = (0..nreal).find(|&j| tab.t[i][j].abs() > 1e-7) {
                tab.pivot(i, j);
            }
        }
    }

    // Phase II.
    let mut cost2 = vec![0.0; ncols];
    for j in 0..n {
        let cj = p.c[j];
        let (cp, cm) = match p.sense {
            Sense::Max => (-cj, cj),
            Sense::Min => (cj, -cj),
        };
        cost2[j] = cp;
        cost2[n + j] = cm;
    }
    let mut allowed = vec![true; ncols];
    for a in allowed.iter_mut().skip(nreal) {
        *a = false;
    }
    if let Some(jcol) = tab.run(&cost2, &allowed, tol)? {
        // unbounded: ray from the entering column
        let mut d = vec![0.0; nreal];
        d[jcol] = 1.0;
        for (i, &bj) in tab.basis.iter().enumerate() {
            if bj < nreal {
                d[bj] = -tab.t[i][jcol];
            }
        }
        let ray: Vec<f64> = (0..n).map(|j| d[j] - d[n + j]).collect();
        return Ok(LpOutcome::Unbounded { ray });
    }

    let mut xs = vec![0.0; nreal];
    for (i, &bj) in tab.basis.iter().enumerate() {
        if bj < nreal {
            xs[bj] = tab.t[i][ncols];
        }
    }
    let x: Vec<f64> = (0..n).map(|j| xs[j] - xs[n + j]).collect();
    let value = dot(&p.c, &x);

    let y = tab.multipliers(&cost2, nreal);
    let mut dual_ineq: Vec<f64> = (0..m1).map(|i| -sigma[i] * y[i]).collect();
    let dual_eq: Vec<f64> = (m1..m).map(|i| -sigma[i] * y[i]).collect();
    for v in dual_ineq.iter_mut() {
        if *v < 0.0 && *v > -1e-7 {
            *v = 0.0;
        }
    }
    Ok(LpOutcome::Optimal {
        x,
        value,
        dual_ineq,
        dual_eq,
    })
}
