use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::fmt;

/// Extended real value in R ∪ {+∞, −∞}.
///
/// Support functions, the lower generalized support function and second
/// subderivatives all take values here. Arithmetic goes through explicit
/// case rules; the indeterminate form ∞ − ∞ is a typed error rather than
/// a NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    MinusInf,
    Finite(f64),
    PlusInf,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn neg(self) -> ExtReal {
        match self {
            ExtReal::MinusInf => ExtReal::PlusInf,
            ExtReal::PlusInf => ExtReal::MinusInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
        }
    }

    pub fn add(self, other: ExtReal) -> Result<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a + b)),
            (PlusInf, MinusInf) | (MinusInf, PlusInf) => Err(Error::UndefinedArithmetic(
                "(+inf) + (-inf)".to_string(),
            )),
            (PlusInf, _) | (_, PlusInf) => Ok(PlusInf),
            (MinusInf, _) | (_, MinusInf) => Ok(MinusInf),
        }
    }

    pub fn sub(self, other: ExtReal) -> Result<ExtReal> {
        self.add(other.neg())
    }

    /// Total order with −∞ < finite < +∞.
    pub fn cmp_total(self, other: ExtReal) -> Ordering {
        use ExtReal::*;
        match (self, other) {
            (MinusInf, MinusInf) | (PlusInf, PlusInf) => Ordering::Equal,
            (MinusInf, _) => Ordering::Less,
            (_, MinusInf) => Ordering::Greater,
            (PlusInf, _) => Ordering::Greater,
            (_, PlusInf) => Ordering::Less,
            (Finite(a), Finite(b)) => a.partial_cmp(&b).unwrap_or(Ordering::Equal),
        }
    }

    /// `self <= other + slack` in the extended order.
    pub fn le_with_slack(self, other: ExtReal, slack: f64) -> bool {
        use ExtReal::*;
        match (self, other) {
            (MinusInf, _) | (_, PlusInf) => true,
            (Finite(a), Finite(b)) => a <= b + slack,
            _ => false,
        }
    }

    /// Equality up to `tol` on finite values, exact on infinities.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => (a - b).abs() <= tol,
            (PlusInf, PlusInf) | (MinusInf, MinusInf) => true,
            _ => false,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self.cmp_total(other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self.cmp_total(other) == Ordering::Less {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::MinusInf => write!(f, "-inf"),
            ExtReal::PlusInf => write!(f, "+inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
        }
    }
}
