//! Proximal alternating minimization over the Hadamard factorization.
//!
//! [`solve_phpp`] alternates the two closed-form proximal block updates
//! for a fixed estimated support `T`:
//!
//! ```text
//! u₊ = [(AᵀA)∘(v vᵀ) + λI_{Tᶜ} + I/α]⁻¹ [(Aᵀy)∘v + u/α]
//! v₊ = [(AᵀA)∘(u₊u₊ᵀ) + λI_{Tᶜ} + I/α]⁻¹ [(Aᵀy)∘u₊ + v/α]
//! ```
//!
//! Each block step minimizes `g` plus `(1/2α)‖· − previous‖²`, so `g` drops by
//! at least `(1/2α)‖w₊ − w‖²` per iteration.
//!
//! [`solve_phpp_improved`] restricts each system to the coordinates whose
//! partner factor is at least `τ` in magnitude, updates the rest in closed
//! form, and grows the estimated support from the current iterate.

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{scatter, solve_hadamard_system};
use crate::objective::{
    f_value, g_value, kkt_from_gamma, FactorPair, TailProblem, DEFAULT_ZERO_TOL,
};
use crate::problem_gen::{stream_rng, StreamRole};
use crate::support::{hard_threshold_support, SupportSet};
use crate::{Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhppConfig {
    pub lambda: f64,
    /// Proximal parameter; the proximal weight is `1/α`.
    pub alpha: f64,
    /// Activity threshold of the restricted updates.
    pub tau: f64,
    /// Initial size of the adaptive estimated support.
    pub k0: usize,
    /// Growth of the adaptive estimated support per iteration.
    pub k_step: usize,
    pub max_iters: usize,
    /// Stop once `‖w₊ − w‖ ≤ step_tol`.
    pub step_tol: f64,
    /// Stop once the KKT residual of `u∘v` is at most `kkt_tol` (0 disables).
    pub kkt_tol: f64,
    /// Keep every iterate in the trace (needed for rate estimates).
    pub record_iterates: bool,
}

impl PhppConfig {
    /// `α = 10/λ`, `τ = 1e-5`, `k₀ = k' = 1`.
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            alpha: 10.0 / lambda,
            tau: 1e-5,
            k0: 1,
            k_step: 1,
            max_iters: 5000,
            step_tol: 1e-10,
            kkt_tol: 1e-8,
            record_iterates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("PHPP config: {what}")));
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be positive");
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return bad("alpha must be positive");
        }
        if !(self.tau > 0.0) {
            return bad("tau must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.step_tol >= 0.0) || !(self.kkt_tol >= 0.0) {
            return bad("tolerances must be nonnegative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ConvergedStep,
    ConvergedKkt,
    MaxIters,
}

/// State after one completed iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    /// `g(w₊)` under the support used for the step.
    pub g: f64,
    pub f: f64,
    /// `‖w₊ − w‖`.
    pub step: f64,
    pub s_size: usize,
    pub s_tilde_size: usize,
    pub t_size: usize,
    pub kkt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    /// `g(w₀)` under the first support used.
    pub initial_g: f64,
    pub records: Vec<IterRecord>,
    pub status: StopReason,
    /// `w₀, w₁, …` when requested in the config.
    pub iterates: Option<Vec<FactorPair>>,
}

impl SolverTrace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// Largest value of `g(w₊) − g(w) + (1/2α)‖w₊ − w‖²` along the trace;
    /// nonpositive when every step satisfies sufficient decrease.
    pub fn max_descent_excess(&self, alpha: f64) -> f64 {
        let mut prev = self.initial_g;
        let mut worst = f64::NEG_INFINITY;
        for r in &self.records {
            worst = worst.max(r.g - prev + r.step * r.step / (2.0 * alpha));
            prev = r.g;
        }
        worst
    }
}

/// Default start: `u₀ = v₀` with entries uniform on `[0.5, 1.5]` scaled by
/// `‖Aᵀy‖_∞^{1/2}`, drawn from the init stream of `seed`.
pub fn default_init(a: &Matrix, y: &Vector, seed: u64) -> FactorPair {
    let scale = a.tr_mul(y).amax().sqrt();
    let mut rng = stream_rng(seed, StreamRole::Init);
    let u = DVector::from_fn(a.ncols(), |_, _| scale * rng.random_range(0.5..=1.5));
    FactorPair { v: u.clone(), u }
}

fn check_pair(p: &TailProblem<'_>, u: &Vector, v: &Vector) -> Result<()> {
    check_len("u", p.n(), u.len())?;
    check_len("v", p.n(), v.len())
}

/// Solves the proximal block system on `cols`, with `partner` the fixed
/// factor and `current` the proximal centre.
fn block_solve(
    p: &TailProblem<'_>,
    alpha: f64,
    partner: &Vector,
    current: &Vector,
    cols: &[usize],
    aty: &Vector,
) -> Result<Vec<f64>> {
    let inv_alpha = 1.0 / alpha;
    let w: Vec<f64> = cols.iter().map(|&j| partner[j]).collect();
    let d: Vec<f64> = cols
        .iter()
        .map(|&j| {
            if p.is_penalized(j) {
                p.lambda() + inv_alpha
            } else {
                inv_alpha
            }
        })
        .collect();
    let rhs: Vec<f64> = cols
        .iter()
        .map(|&j| aty[j] * partner[j] + inv_alpha * current[j])
        .collect();
    solve_hadamard_system(p.matrix(), cols, &w, &d, &rhs)
}

fn full_block(
    p: &TailProblem<'_>,
    alpha: f64,
    partner: &Vector,
    current: &Vector,
) -> Result<Vector> {
    let aty = p.matrix().tr_mul(p.observation());
    let cols: Vec<usize> = (0..p.n()).collect();
    let x = block_solve(p, alpha, partner, current, &cols, &aty)?;
    Ok(DVector::from_vec(x))
}

/// Closed-form `u` step of the proximal alternating scheme.
pub fn phpp_update_u(
    p: &TailProblem<'_>,
    cfg: &PhppConfig,
    u: &Vector,
    v: &Vector,
) -> Result<Vector> {
    check_pair(p, u, v)?;
    full_block(p, cfg.alpha, v, u)
}

/// Closed-form `v` step, with `u` already updated.
pub fn phpp_update_v(
    p: &TailProblem<'_>,
    cfg: &PhppConfig,
    u_next: &Vector,
    v: &Vector,
) -> Result<Vector> {
    check_pair(p, u_next, v)?;
    full_block(p, cfg.alpha, u_next, v)
}

/// Block step solving only on `active` and shrinking the rest: coordinates
/// outside `active` keep their value on `T` and are divided by `λα + 1` on
/// `Tᶜ`.
fn restricted_block(
    p: &TailProblem<'_>,
    alpha: f64,
    partner: &Vector,
    current: &Vector,
    active: &SupportSet,
    aty: &Vector,
) -> Result<Vector> {
    let n = p.n();
    if active.bound() > n {
        return Err(Error::InvalidArgument(
            "active set exceeds dimension".into(),
        ));
    }
    let shrink = 1.0 / (p.lambda() * alpha + 1.0);
    let mut out = DVector::from_fn(n, |j, _| {
        if p.is_penalized(j) {
            current[j] * shrink
        } else {
            current[j]
        }
    });
    let cols = active.as_slice();
    let solved = block_solve(p, alpha, partner, current, cols, aty)?;
    for (&j, x) in cols.iter().zip(solved) {
        out[j] = x;
    }
    Ok(out)
}

/// `u` step restricted to `active` (normally `{j : |v_j| ≥ τ}`); the
/// estimated support is the one carried by `p`.
pub fn restricted_update_u(
    p: &TailProblem<'_>,
    cfg: &PhppConfig,
    u: &Vector,
    v: &Vector,
    active: &SupportSet,
) -> Result<Vector> {
    check_pair(p, u, v)?;
    let aty = p.matrix().tr_mul(p.observation());
    restricted_block(p, cfg.alpha, v, u, active, &aty)
}

/// `v` step restricted to `active` (normally `{j : |u₊_j| ≥ τ}`).
pub fn restricted_update_v(
    p: &TailProblem<'_>,
    cfg: &PhppConfig,
    u_next: &Vector,
    v: &Vector,
    active: &SupportSet,
) -> Result<Vector> {
    check_pair(p, u_next, v)?;
    let aty = p.matrix().tr_mul(p.observation());
    restricted_block(p, cfg.alpha, u_next, v, active, &aty)
}

fn kkt_overall(p: &TailProblem<'_>, z: &Vector) -> f64 {
    kkt_from_gamma(p, z, &p.gamma(z), DEFAULT_ZERO_TOL).overall
}

fn should_stop(cfg: &PhppConfig, step: f64, kkt: f64) -> Option<StopReason> {
    if step <= cfg.step_tol {
        Some(StopReason::ConvergedStep)
    } else if cfg.kkt_tol > 0.0 && kkt <= cfg.kkt_tol {
        Some(StopReason::ConvergedKkt)
    } else {
        None
    }
}

/// Proximal alternating minimization of `g` for the fixed support of `p`.
///
/// The returned trace satisfies sufficient decrease at every step; see
/// [`SolverTrace::max_descent_excess`].
pub fn solve_phpp(
    p: &TailProblem<'_>,
    cfg: &PhppConfig,
    w0: &FactorPair,
) -> Result<(FactorPair, SolverTrace)> {
    cfg.validate()?;
    check_pair(p, &w0.u, &w0.v)?;
    if !w0.is_finite() {
        return Err(Error::InvalidArgument("initial point is not finite".into()));
    }
    let aty = p.matrix().tr_mul(p.observation());
    let cols: Vec<usize> = (0..p.n()).collect();
    let t_size = p.support().len();

    let mut w = w0.clone();
    let mut iterates = cfg.record_iterates.then(|| vec![w.clone()]);
    let mut records = Vec::new();
    let initial_g = g_value(p, &w)?;
    let mut status = StopReason::MaxIters;

    for iter in 0..cfg.max_iters {
        let u = DVector::from_vec(block_solve(p, cfg.alpha, &w.v, &w.u, &cols, &aty)?);
        let v = DVector::from_vec(block_solve(p, cfg.alpha, &u, &w.v, &cols, &aty)?);
        let next = FactorPair { u, v };
        let step = next.distance(&w);
        w = next;
        let z = w.product();
        let kkt = kkt_overall(p, &z);
        records.push(IterRecord {
            iter,
            g: g_value(p, &w)?,
            f: f_value(p, &z)?,
            step,
            s_size: p.n(),
            s_tilde_size: p.n(),
            t_size,
            kkt,
        });
        if let Some(it) = iterates.as_mut() {
            it.push(w.clone());
        }
        if let Some(reason) = should_stop(cfg, step, kkt) {
            status = reason;
            break;
        }
    }

    Ok((
        w,
        SolverTrace {
            initial_g,
            records,
            status,
            iterates,
        },
    ))
}

/// Output of [`solve_phpp_improved`].
#[derive(Debug, Clone, PartialEq)]
pub struct ImprovedOutput {
    pub z: Vector,
    pub factors: FactorPair,
    /// Estimated support after the last iteration.
    pub support: SupportSet,
    pub trace: SolverTrace,
}

/// Restricted updates with an adaptively grown estimated support.
///
/// Starts from `T₀ = supp(H_{k₀}(u₀∘v₀))`. Each iteration forms
/// `S = {j : |v_j| ≥ τ}`, takes the restricted `u` step, forms
/// `S̃ = {j : |u₊_j| ≥ τ}`, takes the restricted `v` step, then grows the
/// support size by `k'` (capped at `min(m, n)`) and re-selects `T` as the
/// largest entries of the new product.
pub fn solve_phpp_improved(
    a: &Matrix,
    y: &Vector,
    cfg: &PhppConfig,
    w0: &FactorPair,
) -> Result<ImprovedOutput> {
    cfg.validate()?;
    let n = a.ncols();
    check_len("observation", a.nrows(), y.len())?;
    check_len("u0", n, w0.u.len())?;
    check_len("v0", n, w0.v.len())?;
    if !w0.is_finite() {
        return Err(Error::InvalidArgument("initial point is not finite".into()));
    }
    let cap = a.nrows().min(n);
    let aty = a.tr_mul(y);

    let mut k_t = cfg.k0.min(cap);
    let mut problem = TailProblem::new(
        a,
        y,
        cfg.lambda,
        hard_threshold_support(w0.product().as_slice(), k_t)?,
    )?;
    let mut w = w0.clone();
    let mut iterates = cfg.record_iterates.then(|| vec![w.clone()]);
    let mut records = Vec::new();
    let initial_g = g_value(&problem, &w)?;
    let mut status = StopReason::MaxIters;

    for iter in 0..cfg.max_iters {
        let s = SupportSet::above_threshold(w.v.as_slice(), cfg.tau);
        let u = restricted_block(&problem, cfg.alpha, &w.v, &w.u, &s, &aty)?;
        let s_tilde = SupportSet::above_threshold(u.as_slice(), cfg.tau);
        let v = restricted_block(&problem, cfg.alpha, &u, &w.v, &s_tilde, &aty)?;
        let next = FactorPair { u, v };
        let step = next.distance(&w);
        w = next;
        let z = w.product();
        let kkt = kkt_overall(&problem, &z);
        records.push(IterRecord {
            iter,
            g: g_value(&problem, &w)?,
            f: f_value(&problem, &z)?,
            step,
            s_size: s.len(),
            s_tilde_size: s_tilde.len(),
            t_size: problem.support().len(),
            kkt,
        });
        if let Some(it) = iterates.as_mut() {
            it.push(w.clone());
        }
        k_t = (k_t + cfg.k_step).min(cap);
        problem = problem.with_support(hard_threshold_support(z.as_slice(), k_t)?)?;
        if let Some(reason) = should_stop(cfg, step, kkt) {
            status = reason;
            break;
        }
    }

    Ok(ImprovedOutput {
        z: w.product(),
        support: problem.support().clone(),
        factors: w,
        trace: SolverTrace {
            initial_g,
            records,
            status,
            iterates,
        },
    })
}

/// Expands a restricted solve on `cols` into a dense vector (test helper).
#[doc(hidden)]
pub fn scatter_values(values: &[f64], cols: &[usize], n: usize) -> Vector {
    scatter(values, cols, n)
}
