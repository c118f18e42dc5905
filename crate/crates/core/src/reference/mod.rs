//! Convex reference solvers and the baseline recovery algorithms.

mod constrained;
mod greedy;
mod hpp;
mod oracle;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Vector;

pub use constrained::tail_l1_constrained;
pub use greedy::{cosamp, htp, omp, sp};
pub use hpp::{hpp, tail_hpp};
pub use oracle::tail_lasso_oracle;

/// Settings shared by the greedy baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Target sparsity.
    pub k: usize,
    pub max_iters: usize,
    /// Stop once `‖y − Az‖ ≤ residual_tol · ‖y‖`.
    pub residual_tol: f64,
    /// Gradient step of hard thresholding pursuit.
    pub htp_step: f64,
}

impl BaselineConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_iters: 300,
            residual_tol: 1e-12,
            htp_step: 1.0,
        }
    }

    pub(crate) fn validate(&self, m: usize, n: usize) -> Result<()> {
        if self.k == 0 || self.k > m.min(n) {
            return Err(Error::InvalidArgument(format!(
                "sparsity {} must lie in 1..={}",
                self.k,
                m.min(n)
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "max_iters must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Estimate returned by a baseline together with the iterations it used.
#[derive(Debug, Clone, PartialEq)]
pub struct Recovery {
    pub z: Vector,
    pub iters: usize,
}
