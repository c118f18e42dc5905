//! Restricted-isometry estimates, recovery-bound constants and empirical
//! convergence rates.

mod bounds;
mod rate;
mod rip;

pub use bounds::{
    tail_l1_bound, tail_l1_order, tail_l1_support_bound, tail_l1_support_order, tail_lasso_bound,
    BoundKind, BoundReport,
};
pub use rate::{rate_estimate, rate_from_distances, RateEstimate};
pub use rip::{
    binomial, order_ceil, rip_exact, rip_monte_carlo, RipConstants, RipEstimate, RipMethod,
    EXACT_BUDGET,
};
