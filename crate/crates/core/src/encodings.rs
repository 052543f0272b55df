//! Builders that encode standard disjunctive problem classes as polyhedral
//! sets D.
//!
//! Pair coordinate layout: pair j occupies coordinates (2j, 2j+1) = (a, b).
//! Piece derivations:
//!   complementarity (MPCC):  a >= 0 ⊥ b <= 0 ... {a>=0, b=0} ∪ {a=0, b<=0}
//!   switching:               a*b = 0          ... {a=0} ∪ {b=0}
//!   vanishing:               b >= 0, a*b <= 0 ... {b=0} ∪ {a<=0, b>=0}
//!   cardinality:             a*b = 0, b ∈[0,1]... {a=0, 0<=b<=1} ∪ {b=0}
//! Products across pairs are expanded eagerly into 2^k convex pieces.

use crate::error::{Error, Result};
use crate::numeric::matrix::Matrix;
use crate::polyhedra::{ConvexPolyhedron, PolyhedralSet};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EncodingSpec {
    Mpcc { pairs: usize },
    Switching { pairs: usize },
    Vanishing { pairs: usize },
    Cardinality { pairs: usize },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    CustomUnion(PolyhedralSet),
}

const MAX_PAIRS: usize = 6;

/// One branch of a pairwise disjunction: rows in the local (a, b) plane.
struct Branch {
    ineq: Vec<([f64; 2], f64)>,
    eq: Vec<([f64; 2], f64)>,
}

fn pair_branches(spec: &EncodingSpec) -> Vec<Branch> {
    match spec {
        // {a >= 0, b = 0} ∪ {a = 0, b <= 0}
        EncodingSpec::Mpcc { .. } => vec![
            Branch {
                ineq: vec![([-1.0, 0.0], 0.0)],
                eq: vec![([0.0, 1.0], 0.0)],
            },
            Branch {
                ineq: vec![([0.0, 1.0], 0.0)],
                eq: vec![([1.0, 0.0], 0.0)],
            },
        ],
        // {a = 0} ∪ {b = 0}
        EncodingSpec::Switching { .. } => vec![
            Branch {
                ineq: vec![],
                eq: vec![([1.0, 0.0], 0.0)],
            },
            Branch {
                ineq: vec![],
                eq: vec![([0.0, 1.0], 0.0)],
            },
        ],
        // {b = 0} ∪ {a <= 0, b >= 0}
        EncodingSpec::Vanishing { .. } => vec![
            Branch {
                ineq: vec![],
                eq: vec![([0.0, 1.0], 0.0)],
            },
            Branch {
                ineq: vec![([1.0, 0.0], 0.0), ([0.0, -1.0], 0.0)],
                eq: vec![],
            },
        ],
        // {a = 0, 0 <= b <= 1} ∪ {b = 0}
        EncodingSpec::Cardinality { .. } => vec![
            Branch {
                ineq: vec![([0.0, -1.0], 0.0), ([0.0, 1.0], 1.0)],
                eq: vec![([1.0, 0.0], 0.0)],
            },
            Branch {
                ineq: vec![],
                eq: vec![([0.0, 1.0], 0.0)],
            },
        ],
        _ => unreachable!("non-pair encodings handled separately"),
    }
}

/// Expand the encoding into an explicit union of convex pieces.
pub fn build(spec: &EncodingSpec) -> Result<PolyhedralSet> {
    match spec {
        EncodingSpec::Box { lower, upper } => {
            if lower.len() != upper.len() {
                return Err(Error::DimensionMismatch(
                    "box bounds have different lengths".into(),
                ));
            }
            let n = lower.len();
            let mut a = Matrix::zeros(0, n);
            let mut b = Vec::new();
            for j in 0..n {
                if upper[j].is_finite() {
                    let mut row = vec![0.0; n];
                    row[j] = 1.0;
                    a.push_row(&row);
                    b.push(upper[j]);
                }
                if lower[j].is_finite() {
                    let mut row = vec![0.0; n];
                    row[j] = -1.0;
                    a.push_row(&row);
                    b.push(-lower[j]);
                }
            }
            Ok(PolyhedralSet::single(ConvexPolyhedron::new(
                a,
                b,
                Matrix::empty(n),
                vec![],
            )?))
        }
        EncodingSpec::CustomUnion(s) => Ok(s.clone()),
        EncodingSpec::Mpcc { pairs }
        | EncodingSpec::Switching { pairs }
        | EncodingSpec::Vanishing { pairs }
        | EncodingSpec::Cardinality { pairs } => {
            let k = *pairs;
            if k == 0 {
                return Err(Error::DimensionMismatch("pair count must be positive".into()));
            }
            if k > MAX_PAIRS {
                return Err(Error::ScaleCapExceeded(format!(
                    "pairwise encodings capped at {MAX_PAIRS} pairs, got {k}"
                )));
            }
            let branches = pair_branches(spec);
            let nb = branches.len();
            let dim = 2 * k;
            let mut pieces = Vec::with_capacity(nb.pow(k as u32));
            for choice in 0..nb.pow(k as u32) {
                let mut a = Matrix::zeros(0, dim);
                let mut b = Vec::new();
                let mut e = Matrix::zeros(0, dim);
                let mut f = Vec::new();
                let mut c = choice;
                for pair in 0..k {
                    let branch = &branches[c % nb];
                    c /= nb;
                    for (coeff, rhs) in &branch.ineq {
                        let mut row = vec![0.0; dim];
                        row[2 * pair] = coeff[0];
                        row[2 * pair + 1] = coeff[1];
                        a.push_row(&row);
                        b.push(*rhs);
                    }
                    for (coeff, rhs) in &branch.eq {
                        let mut row = vec![0.0; dim];
                        row[2 * pair] = coeff[0];
                        row[2 * pair + 1] = coeff[1];
                        e.push_row(&row);
                        f.push(*rhs);
                    }
                }
                pieces.push(ConvexPolyhedron::new(a, b, e, f)?);
            }
            PolyhedralSet::new(dim, pieces)
        }
    }
}

/// The defining logical predicate of each class, for cross-checks.
pub fn defining_predicate(spec: &EncodingSpec, z: &[f64], eps: f64) -> bool {
    match spec {
        EncodingSpec::Box { lower, upper } => z
            .iter()
            .zip(lower.iter().zip(upper))
            .all(|(v, (lo, hi))| *v >= lo - eps && *v <= hi + eps),
        EncodingSpec::CustomUnion(s) => s
            .pieces
            .iter()
            .any(|p| p.contains(z, eps)),
        EncodingSpec::Mpcc { pairs } => (0..*pairs).all(|j| {
            let (a, b) = (z[2 * j], z[2 * j + 1]);
            (a >= -eps && b.abs() <= eps) || (a.abs() <= eps && b <= eps)
        }),
        EncodingSpec::Switching { pairs } => (0..*pairs).all(|j| {
            let (a, b) = (z[2 * j], z[2 * j + 1]);
            a.abs() <= eps || b.abs() <= eps
        }),
        EncodingSpec::Vanishing { pairs } => (0..*pairs).all(|j| {
            let (a, b) = (z[2 * j], z[2 * j + 1]);
            b >= -eps && a * b <= eps
        }),
        EncodingSpec::Cardinality { pairs } => (0..*pairs).all(|j| {
            let (a, b) = (z[2 * j], z[2 * j + 1]);
            (a.abs() <= eps || b.abs() <= eps) && b >= -eps && b <= 1.0 + eps
        }),
    }
}
