//! Second-order forward-mode dual numbers: value, gradient and full
//! symmetric Hessian propagated together. Exact for the expression grammar.

use super::parse::Expr;
use crate::error::{Error, Result};
use crate::numeric::matrix::Matrix;

/// Value, gradient and Hessian of a scalar function at a point.
#[derive(Debug, Clone)]
pub struct Jet {
    pub n: usize,
    pub val: f64,
    pub grad: Vec<f64>,
    /// Row-major n x n, symmetric by construction.
    pub hess: Vec<f64>,
}

impl Jet {
    fn constant(n: usize, v: f64) -> Jet {
        Jet {
            n,
            val: v,
            grad: vec![0.0; n],
            hess: vec![0.0; n * n],
        }
    }

    fn variable(n: usize, i: usize, v: f64) -> Jet {
        let mut j = Jet::constant(n, v);
        j.grad[i] = 1.0;
        j
    }

    fn add(&self, o: &Jet) -> Jet {
        Jet {
            n: self.n,
            val: self.val + o.val,
            grad: zip(&self.grad, &o.grad, |a, b| a + b),
            hess: zip(&self.hess, &o.hess, |a, b| a + b),
        }
    }

    fn sub(&self, o: &Jet) -> Jet {
        Jet {
            n: self.n,
            val: self.val - o.val,
            grad: zip(&self.grad, &o.grad, |a, b| a - b),
            hess: zip(&self.hess, &o.hess, |a, b| a - b),
        }
    }

    fn neg(&self) -> Jet {
        Jet {
            n: self.n,
            val: -self.val,
            grad: self.grad.iter().map(|v| -v).collect(),
            hess: self.hess.iter().map(|v| -v).collect(),
        }
    }

    fn mul(&self, o: &Jet) -> Jet {
        let n = self.n;
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = self.val * o.hess[i * n + j]
                    + o.val * self.hess[i * n + j]
                    + self.grad[i] * o.grad[j]
                    + o.grad[i] * self.grad[j];
            }
        }
        Jet {
            n,
            val: self.val * o.val,
            grad: (0..n)
                .map(|i| self.val * o.grad[i] + o.val * self.grad[i])
                .collect(),
            hess,
        }
    }

    /// Chain rule for a scalar map with first and second derivatives d1, d2.
    fn unary(&self, val: f64, d1: f64, d2: f64) -> Jet {
        let n = self.n;
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = d1 * self.hess[i * n + j] + d2 * self.grad[i] * self.grad[j];
            }
        }
        Jet {
            n,
            val,
            grad: self.grad.iter().map(|g| d1 * g).collect(),
            hess,
        }
    }

    fn recip(&self) -> Result<Jet> {
        if self.val.abs() < 1e-300 {
            return Err(Error::DomainError("division by zero".into()));
        }
        let v = 1.0 / self.val;
        Ok(self.unary(v, -v * v, 2.0 * v * v * v))
    }

    fn powi(&self, k: i32) -> Result<Jet> {
        if k == 0 {
            return Ok(Jet::constant(self.n, 1.0));
        }
        if k < 0 && self.val.abs() < 1e-300 {
            return Err(Error::DomainError(
                "negative power of zero at the evaluation point".into(),
            ));
        }
        let v = self.val.powi(k);
        let d1 = k as f64 * self.val.powi(k - 1);
        let d2 = (k as f64) * (k - 1) as f64 * self.val.powi(k - 2);
        Ok(self.unary(v, d1, d2))
    }
}

fn zip(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

/// Evaluate an expression as a second-order jet at x.
pub fn eval_jet(e: &Expr, x: &[f64]) -> Result<Jet> {
    let n = x.len();
    Ok(match e {
        Expr::Const(v) => Jet::constant(n, *v),
        Expr::Var(i) => {
            if *i >= n {
                return Err(Error::DimensionMismatch(format!(
                    "expression uses x{} but the point has {} coordinates",
                    i + 1,
                    n
                )));
            }
            Jet::variable(n, *i, x[*i])
        }
        Expr::Add(a, b) => eval_jet(a, x)?.add(&eval_jet(b, x)?),
        Expr::Sub(a, b) => eval_jet(a, x)?.sub(&eval_jet(b, x)?),
        Expr::Mul(a, b) => eval_jet(a, x)?.mul(&eval_jet(b, x)?),
        Expr::Div(a, b) => eval_jet(a, x)?.mul(&eval_jet(b, x)?.recip()?),
        Expr::Neg(a) => eval_jet(a, x)?.neg(),
        Expr::Pow(a, k) => eval_jet(a, x)?.powi(*k)?,
        Expr::Exp(a) => {
            let j = eval_jet(a, x)?;
            let v = j.val.exp();
            j.unary(v, v, v)
        }
        Expr::Log(a) => {
            let j = eval_jet(a, x)?;
            if j.val <= 0.0 {
                return Err(Error::DomainError(format!(
                    "log of a nonpositive value ({})",
                    j.val
                )));
            }
            j.unary(j.val.ln(), 1.0 / j.val, -1.0 / (j.val * j.val))
        }
        Expr::Sin(a) => {
            let j = eval_jet(a, x)?;
            j.unary(j.val.sin(), j.val.cos(), -j.val.sin())
        }
        Expr::Cos(a) => {
            let j = eval_jet(a, x)?;
            j.unary(j.val.cos(), -j.val.sin(), -j.val.cos())
        }
    })
}

/// Plain value evaluation.
pub fn eval_value(e: &Expr, x: &[f64]) -> Result<f64> {
    Ok(match e {
        Expr::Const(v) => *v,
        Expr::Var(i) => *x.get(*i).ok_or_else(|| {
            Error::DimensionMismatch(format!("expression uses x{}", i + 1))
        })?,
        Expr::Add(a, b) => eval_value(a, x)? + eval_value(b, x)?,
        Expr::Sub(a, b) => eval_value(a, x)? - eval_value(b, x)?,
        Expr::Mul(a, b) => eval_value(a, x)? * eval_value(b, x)?,
        Expr::Div(a, b) => {
            let d = eval_value(b, x)?;
            if d.abs() < 1e-300 {
                return Err(Error::DomainError("division by zero".into()));
            }
            eval_value(a, x)? / d
        }
        Expr::Neg(a) => -eval_value(a, x)?,
        Expr::Pow(a, k) => {
            let v = eval_value(a, x)?;
            if *k < 0 && v.abs() < 1e-300 {
                return Err(Error::DomainError("negative power of zero".into()));
            }
            v.powi(*k)
        }
        Expr::Exp(a) => eval_value(a, x)?.exp(),
        Expr::Log(a) => {
            let v = eval_value(a, x)?;
            if v <= 0.0 {
                return Err(Error::DomainError("log of a nonpositive value".into()));
            }
            v.ln()
        }
        Expr::Sin(a) => eval_value(a, x)?.sin(),
        Expr::Cos(a) => eval_value(a, x)?.cos(),
    })
}

/// A vector-valued smooth map frozen at a point: values, Jacobian, and one
/// symmetric Hessian per component.
#[derive(Debug, Clone)]
pub struct SmoothMapAtPoint {
    pub point: Vec<f64>,
    pub value: Vec<f64>,
    pub jacobian: Matrix,
    pub hessians: Vec<Matrix>,
}

/// Exact first and second derivatives of each component at x.
pub fn differentiate_at(exprs: &[Expr], x: &[f64]) -> Result<SmoothMapAtPoint> {
    let n = x.len();
    let mut value = Vec::with_capacity(exprs.len());
    let mut jacobian = Matrix::zeros(0, n);
    let mut hessians = Vec::with_capacity(exprs.len());
    for e in exprs {
        let j = eval_jet(e, x)?;
        value.push(j.val);
        jacobian.push_row(&j.grad);
        hessians.push(Matrix::from_fn(n, n, |r, c| j.hess[r * n + c]));
    }
    Ok(SmoothMapAtPoint {
        point: x.to_vec(),
        value,
        jacobian,
        hessians,
    })
}

impl SmoothMapAtPoint {
    pub fn input_dim(&self) -> usize {
        self.jacobian.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.value.len()
    }

    /// The identity map at x (zero curvature).
    pub fn identity(x: &[f64]) -> SmoothMapAtPoint {
        let n = x.len();
        SmoothMapAtPoint {
            point: x.to_vec(),
            value: x.to_vec(),
            jacobian: Matrix::identity(n),
            hessians: (0..n).map(|_| Matrix::zeros(n, n)).collect(),
        }
    }
}

/// Componentwise quadratic forms: (u^T ∇²G_i u)_i.
pub fn second_directional(map: &SmoothMapAtPoint, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != map.input_dim() {
        return Err(Error::DimensionMismatch(
            "direction length does not match the map's input dimension".into(),
        ));
    }
    Ok(map
        .hessians
        .iter()
        .map(|h| {
            let hu = h.matvec(u);
            crate::numeric::matrix::dot(u, &hu)
        })
        .collect())
}
