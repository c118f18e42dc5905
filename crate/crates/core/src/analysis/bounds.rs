use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::rip::{order_ceil, RipConstants};

/// Which recovery guarantee a [`BoundReport`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Constrained tail-ℓ1 under order-`K` RIP with the feasibility gate
    /// `a > 2δ²/(1 − δ_l)²`.
    TailL1,
    /// Constrained tail-ℓ1 under order-`K'` RIP; valid for any `δ_l < 1`.
    TailL1Support,
    /// Unconstrained tail-lasso, valid for `λ > 2‖Aᵀw‖_∞`.
    TailLasso,
}

/// Evaluated error bound together with the inputs it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub feasible: bool,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Only set for [`BoundKind::TailLasso`].
    pub c3: Option<f64>,
    /// Upper bound on `‖ẑ − x‖`; `None` when infeasible.
    pub predicted_error: Option<f64>,
    /// RIP order the constants must hold at.
    pub order: usize,
    pub a: f64,
    pub k: usize,
    pub k_t: usize,
    /// `ε` for the constrained bounds, `λ` for the lasso bound.
    pub noise_level: f64,
    /// ℓ1 mass of the signal outside `T` (and outside its `k` largest
    /// entries, where the caller chooses to exclude them).
    pub tail_mass: f64,
    /// False when the RIP constants came from sampling.
    pub certified: bool,
}

/// `⌈max((a+1)k + k_T, 2ak)⌉`, the order used by [`tail_l1_bound`] and
/// [`tail_lasso_bound`].
pub fn tail_l1_order(a: f64, k: usize, k_t: usize) -> usize {
    let (k, k_t) = (k as f64, k_t as f64);
    order_ceil(((a + 1.0) * k + k_t).max(2.0 * a * k))
}

/// `⌈max(ak + k_T, 2ak)⌉`, the order used by [`tail_l1_support_bound`].
pub fn tail_l1_support_order(a: f64, k: usize, k_t: usize) -> usize {
    let (k, k_t) = (k as f64, k_t as f64);
    order_ceil((a * k + k_t).max(2.0 * a * k))
}

fn check_common(rip: &RipConstants, a: f64, k: usize, level: f64, tail_mass: f64) -> Result<()> {
    let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
    if !(rip.lower >= 0.0 && rip.lower < 1.0) {
        return bad("lower RIP constant must lie in [0, 1)");
    }
    if !(rip.upper >= 0.0) || !rip.upper.is_finite() {
        return bad("upper RIP constant must be nonnegative");
    }
    if !(a > 0.0) || !a.is_finite() {
        return bad("a must be positive");
    }
    if k == 0 {
        return bad("sparsity must be at least 1");
    }
    if !(level >= 0.0) || !(tail_mass >= 0.0) {
        return bad("noise level and tail mass must be nonnegative");
    }
    Ok(())
}

struct Partial {
    kind: BoundKind,
    order: usize,
    constants: Option<(f64, f64, Option<f64>, f64)>,
}

fn report(
    p: Partial,
    rip: &RipConstants,
    a: f64,
    k: usize,
    k_t: usize,
    level: f64,
    tail_mass: f64,
) -> BoundReport {
    let (c1, c2, c3, pred) = match p.constants {
        Some((c1, c2, c3, pred)) => (Some(c1), Some(c2), c3, Some(pred)),
        None => (None, None, None, None),
    };
    BoundReport {
        kind: p.kind,
        feasible: p.constants.is_some(),
        c1,
        c2,
        c3,
        predicted_error: pred,
        order: p.order,
        a,
        k,
        k_t,
        noise_level: level,
        tail_mass,
        certified: rip.certified,
    }
}

/// Error bound for constrained tail-ℓ1 minimization with `‖w‖ ≤ ε`:
/// `‖ẑ − x‖ ≤ C₁ε + C₂·tail/√(ak)`.
///
/// `rip` must hold at order [`tail_l1_order`]. Infeasible when
/// `a ≤ 2δ²/(1 − δ_l)²`.
pub fn tail_l1_bound(
    rip: RipConstants,
    a: f64,
    k: usize,
    k_t: usize,
    eps: f64,
    tail_mass: f64,
) -> Result<BoundReport> {
    check_common(&rip, a, k, eps, tail_mass)?;
    let delta = rip.delta();
    let root_a = a.sqrt();
    let denom = root_a * (1.0 - rip.lower) - SQRT_2 * delta;
    let feasible = a > 2.0 * delta * delta / (1.0 - rip.lower).powi(2) && denom > 0.0;
    let constants = feasible.then(|| {
        let c1 = 2.0 * (root_a + 1.0) * (1.0 + delta).sqrt() / denom;
        let c2 = 2.0 * SQRT_2 * (root_a + 1.0) * delta / denom + 2.0;
        (
            c1,
            c2,
            None,
            c1 * eps + c2 * tail_mass / (a * k as f64).sqrt(),
        )
    });
    let order = tail_l1_order(a, k, k_t);
    Ok(report(
        Partial {
            kind: BoundKind::TailL1,
            order,
            constants,
        },
        &rip,
        a,
        k,
        k_t,
        eps,
        tail_mass,
    ))
}

/// Error bound for constrained tail-ℓ1 minimization that only needs
/// `δ_l < 1` at order [`tail_l1_support_order`]:
/// `‖ẑ − x‖ ≤ C₁ε + C₂·‖x_{Tᶜ}‖₁/√(ak)`.
pub fn tail_l1_support_bound(
    rip: RipConstants,
    a: f64,
    k: usize,
    k_t: usize,
    eps: f64,
    tail_mass: f64,
) -> Result<BoundReport> {
    check_common(&rip, a, k, eps, tail_mass)?;
    let delta = rip.delta();
    let slack = 1.0 - rip.lower;
    let c1 = 2.0 * (1.0 + delta).sqrt() / slack;
    let c2 = 2.0 * SQRT_2 * delta / slack + 2.0;
    let pred = c1 * eps + c2 * tail_mass / (a * k as f64).sqrt();
    let order = tail_l1_support_order(a, k, k_t);
    Ok(report(
        Partial {
            kind: BoundKind::TailL1Support,
            order,
            constants: Some((c1, c2, None, pred)),
        },
        &rip,
        a,
        k,
        k_t,
        eps,
        tail_mass,
    ))
}

/// Error bound for the tail-lasso with `λ > 2‖Aᵀw‖_∞`:
/// `‖ẑ − x‖ ≤ C₁λ√(k + k_T) + C₂√(λ·tail) + C₃·tail/√(ak)`.
///
/// With `γ = √((1 + k_T/k)/a)` and `β = δ(1 + 3√2γ)` the bound is feasible
/// iff `β < 1`; `rip` must hold at order [`tail_l1_order`].
pub fn tail_lasso_bound(
    rip: RipConstants,
    a: f64,
    k: usize,
    k_t: usize,
    lambda: f64,
    tail_mass: f64,
) -> Result<BoundReport> {
    check_common(&rip, a, k, lambda, tail_mass)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let delta = rip.delta();
    let gamma = ((1.0 + k_t as f64 / k as f64) / a).sqrt();
    let beta = delta + 3.0 * SQRT_2 * gamma * delta;
    let constants = (beta < 1.0).then(|| {
        let lead = 3.0 * gamma + 1.0;
        let c1 = 6.0 * (1.0 + delta) * lead / (1.0 - beta).powi(2);
        let c2 = 2.0 * SQRT_2 * lead / (1.0 - beta);
        let c3 = 8.0 * delta * lead / (1.0 - beta) + 4.0;
        let pred = c1 * lambda * ((k + k_t) as f64).sqrt()
            + c2 * (lambda * tail_mass).sqrt()
            + c3 * tail_mass / (a * k as f64).sqrt();
        (c1, c2, Some(c3), pred)
    });
    let order = tail_l1_order(a, k, k_t);
    Ok(report(
        Partial {
            kind: BoundKind::TailLasso,
            order,
            constants,
        },
        &rip,
        a,
        k,
        k_t,
        lambda,
        tail_mass,
    ))
}
