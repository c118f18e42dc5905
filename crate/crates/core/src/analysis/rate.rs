use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::FactorPair;
use crate::phpp::SolverTrace;

/// Distances at or below this are treated as converged and excluded.
const FLOOR: f64 = 1e-13;
const WINDOW: usize = 20;
const MIN_ITERATES: usize = 10;

/// Worst contraction factor `max r_{k+1}/r_k` over the tail of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub tau: f64,
    /// Number of ratios in the window.
    pub window: usize,
}

impl RateEstimate {
    pub fn is_linear(&self) -> bool {
        self.tau < 1.0
    }
}

/// Estimates the linear rate of `r_k = ‖w_k − w*‖` from the iterates stored
/// in `trace`.
pub fn rate_estimate(trace: &SolverTrace, w_star: &FactorPair) -> Result<RateEstimate> {
    let iterates = trace
        .iterates
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("trace was recorded without iterates".into()))?;
    let r: Vec<f64> = iterates.iter().map(|w| w.distance(w_star)).collect();
    rate_from_distances(&r)
}

/// Rate from a distance sequence: considers the iterates before the first
/// one within `1e-13` of the limit and takes the largest ratio among the
/// last 20 consecutive pairs. At least 10 such iterates are required.
pub fn rate_from_distances(r: &[f64]) -> Result<RateEstimate> {
    let usable = r.iter().position(|&x| !(x > FLOOR)).unwrap_or(r.len());
    if usable < MIN_ITERATES {
        return Err(Error::InsufficientTrace {
            available: usable,
            required: MIN_ITERATES,
        });
    }
    let head = &r[..usable];
    let start = head.len().saturating_sub(WINDOW + 1);
    let tau = head[start..]
        .windows(2)
        .map(|p| p[1] / p[0])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RateEstimate {
        tau,
        window: head.len() - start - 1,
    })
}
