use itertools::Itertools;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem_gen::{stream_rng, StreamRole};
use crate::Matrix;

/// Largest number of supports [`rip_exact`] will enumerate.
pub const EXACT_BUDGET: u128 = 10_000_000;

const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RipMethod {
    Exact,
    MonteCarlo,
}

/// Order-`k` restricted isometry constants: every `k`-sparse `z` obeys
/// `(1 − lower)‖z‖² ≤ ‖Az‖² ≤ (1 + upper)‖z‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipEstimate {
    pub order: usize,
    pub lower: f64,
    pub upper: f64,
    pub method: RipMethod,
    /// Supports examined.
    pub samples: usize,
}

impl RipEstimate {
    /// Constants for the bound calculators; sampled estimates are flagged
    /// as not certified.
    pub fn constants(&self) -> RipConstants {
        RipConstants {
            lower: self.lower,
            upper: self.upper,
            certified: self.method == RipMethod::Exact,
        }
    }
}

/// RIP constants as consumed by the bound calculators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipConstants {
    pub lower: f64,
    pub upper: f64,
    /// False when the constants are sampled lower bounds.
    pub certified: bool,
}

impl RipConstants {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            certified: true,
        }
    }

    /// `δ = max(lower, upper)`.
    pub fn delta(&self) -> f64 {
        self.lower.max(self.upper)
    }
}

/// Ceiling of a possibly fractional order.
pub fn order_ceil(x: f64) -> usize {
    x.ceil().max(0.0) as usize
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Extreme eigenvalues of the Gram submatrix on `cols`.
fn extreme_eigs(gram: &Matrix, cols: &[usize]) -> (f64, f64) {
    match cols {
        [i] => (gram[(*i, *i)], gram[(*i, *i)]),
        [i, j] => {
            let (p, q, r) = (gram[(*i, *i)], gram[(*j, *j)], gram[(*i, *j)]);
            let mid = 0.5 * (p + q);
            let rad = (0.5 * (p - q)).hypot(r);
            (mid - rad, mid + rad)
        }
        _ => {
            let k = cols.len();
            let sub = DMatrix::from_fn(k, k, |a, b| gram[(cols[a], cols[b])]);
            let eig = SymmetricEigen::new(sub).eigenvalues;
            (eig.min(), eig.max())
        }
    }
}

fn check_order(a: &Matrix, k: usize) -> Result<()> {
    if k == 0 || k > a.ncols() {
        return Err(Error::InvalidArgument(format!(
            "RIP order {k} must lie in 1..={}",
            a.ncols()
        )));
    }
    Ok(())
}

fn gram_matrix(a: &Matrix) -> Matrix {
    let mut g = a.tr_mul(a);
    for i in 0..g.nrows() {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    g
}

fn deviations((lo, hi): (f64, f64)) -> (f64, f64) {
    ((1.0 - lo).max(0.0), (hi - 1.0).max(0.0))
}

fn max_pair(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.max(b.0), a.1.max(b.1))
}

/// Exact order-`k` constants by enumerating every support of size `k`.
///
/// Fails with [`Error::BudgetExceeded`] when there are more than
/// [`EXACT_BUDGET`] supports.
pub fn rip_exact(a: &Matrix, k: usize) -> Result<RipEstimate> {
    check_order(a, k)?;
    let count = binomial(a.ncols(), k);
    if count > EXACT_BUDGET {
        return Err(Error::BudgetExceeded {
            count,
            budget: EXACT_BUDGET,
        });
    }
    let gram = gram_matrix(a);
    let (lower, upper) = (0..a.ncols())
        .combinations(k)
        .par_bridge()
        .map(|cols| deviations(extreme_eigs(&gram, &cols)))
        .reduce(|| (0.0, 0.0), max_pair);
    Ok(RipEstimate {
        order: k,
        lower,
        upper,
        method: RipMethod::Exact,
        samples: count as usize,
    })
}

/// Sampled order-`k` constants over `trials` uniformly random supports.
///
/// The result is a lower bound on the true constants. Supports are drawn
/// sequentially from `seed`, so the estimate does not depend on the thread
/// count.
pub fn rip_monte_carlo(a: &Matrix, k: usize, trials: usize, seed: u64) -> Result<RipEstimate> {
    check_order(a, k)?;
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let gram = gram_matrix(a);
    let mut rng = stream_rng(seed, StreamRole::Matrix);
    let mut best = (0.0, 0.0);
    let mut remaining = trials;
    while remaining > 0 {
        let batch = remaining.min(MC_CHUNK);
        let supports: Vec<Vec<usize>> = (0..batch)
            .map(|_| {
                // sorted so each support is evaluated exactly as in `rip_exact`
                let mut cols = index::sample(&mut rng, a.ncols(), k).into_vec();
                cols.sort_unstable();
                cols
            })
            .collect();
        let found = supports
            .par_iter()
            .map(|cols| deviations(extreme_eigs(&gram, cols)))
            .reduce(|| (0.0, 0.0), max_pair);
        best = max_pair(best, found);
        remaining -= batch;
    }
    Ok(RipEstimate {
        order: k,
        lower: best.0,
        upper: best.1,
        method: RipMethod::MonteCarlo,
        samples: trials,
    })
}
