use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Numerical tolerances threaded through every geometric computation.
///
/// `eps_feas` is the feasibility slack for constraint evaluation, `eps_zero`
/// the treat-as-zero threshold for pivots and snapping, `eps_opt` the LP
/// optimality gap.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct Tolerance {
    pub eps_feas: f64,
    pub eps_zero: f64,
    pub eps_opt: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            eps_feas: 1e-8,
            eps_zero: 1e-10,
            eps_opt: 1e-8,
        }
    }
}

impl Tolerance {
    pub fn new(eps_feas: f64, eps_zero: f64, eps_opt: f64) -> Result<Self> {
        let t = Tolerance {
            eps_feas,
            eps_zero,
            eps_opt,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_feas > 0.0 && self.eps_zero > 0.0 && self.eps_opt > 0.0) {
            return Err(Error::InvalidTolerance(
                "all tolerances must be strictly positive".into(),
            ));
        }
        if self.eps_zero > self.eps_feas {
            return Err(Error::InvalidTolerance(
                "eps_zero must not exceed eps_feas".into(),
            ));
        }
        Ok(())
    }

    /// Uniform scaling, used to loosen tolerances inside sampling oracles.
    pub fn scaled(&self, s: f64) -> Tolerance {
        Tolerance {
            eps_feas: self.eps_feas * s,
            eps_zero: self.eps_zero * s,
            eps_opt: self.eps_opt * s,
        }
    }
}
