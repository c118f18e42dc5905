//! The tail-lasso objective and its Hadamard-product surrogate.
//!
//! For an estimated support `T`:
//!
//! ```text
//! f(z)    = ½‖Az − y‖² + λ‖z_{Tᶜ}‖₁
//! g(u, v) = ½‖A(u∘v) − y‖² + (λ/2)(‖u_{Tᶜ}‖² + ‖v_{Tᶜ}‖²)
//! ```
//!
//! `g(u, v) ≥ f(u∘v)` everywhere, with equality at [`split_z`].

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::sign;
use crate::support::SupportSet;
use crate::{Matrix, Vector};

/// Dead-zone below which a coordinate counts as zero in the KKT report.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Tail-lasso instance borrowing its data.
#[derive(Debug, Clone)]
pub struct TailProblem<'a> {
    a: &'a Matrix,
    y: &'a Vector,
    lambda: f64,
    support: SupportSet,
    /// `true` on `Tᶜ`, where the penalty applies.
    penalized: Vec<bool>,
}

impl<'a> TailProblem<'a> {
    pub fn new(a: &'a Matrix, y: &'a Vector, lambda: f64, support: SupportSet) -> Result<Self> {
        check_len("observation", a.nrows(), y.len())?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        let n = a.ncols();
        if support.bound() > n {
            return Err(Error::InvalidArgument(format!(
                "estimated support exceeds dimension {n}"
            )));
        }
        let penalized = support.mask(n).into_iter().map(|t| !t).collect();
        Ok(Self {
            a,
            y,
            lambda,
            support,
            penalized,
        })
    }

    /// Same data and `λ`, different estimated support.
    pub fn with_support(&self, support: SupportSet) -> Result<Self> {
        Self::new(self.a, self.y, self.lambda, support)
    }

    pub fn matrix(&self) -> &'a Matrix {
        self.a
    }

    pub fn observation(&self) -> &'a Vector {
        self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn is_penalized(&self, j: usize) -> bool {
        self.penalized[j]
    }

    pub(crate) fn penalized_mask(&self) -> &[bool] {
        &self.penalized
    }

    /// `Az − y`.
    pub fn residual(&self, z: &Vector) -> Vector {
        self.a * z - self.y
    }

    /// `γ(z) = Aᵀ(Az − y)`.
    pub fn gamma(&self, z: &Vector) -> Vector {
        self.a.tr_mul(&self.residual(z))
    }

    /// `λ‖z_{Tᶜ}‖₁`.
    pub fn penalty(&self, z: &Vector) -> f64 {
        let l1: f64 = z
            .iter()
            .zip(&self.penalized)
            .filter(|(_, &p)| p)
            .map(|(v, _)| v.abs())
            .sum();
        self.lambda * l1
    }
}

/// Factor pair `(u, v)` of the over-parametrization `z = u ∘ v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorPair {
    pub u: Vector,
    pub v: Vector,
}

impl FactorPair {
    pub fn new(u: Vector, v: Vector) -> Result<Self> {
        check_len("factor v", u.len(), v.len())?;
        Ok(Self { u, v })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            u: DVector::zeros(n),
            v: DVector::zeros(n),
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn product(&self) -> Vector {
        self.u.component_mul(&self.v)
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).all(|x| x.is_finite())
    }

    /// `‖(u, v) − (u', v')‖` in the stacked Euclidean norm.
    pub fn distance(&self, other: &FactorPair) -> f64 {
        ((&self.u - &other.u).norm_squared() + (&self.v - &other.v).norm_squared()).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.u.norm_squared() + self.v.norm_squared()).sqrt()
    }
}

pub fn f_value(p: &TailProblem<'_>, z: &Vector) -> Result<f64> {
    check_len("z", p.n(), z.len())?;
    Ok(0.5 * p.residual(z).norm_squared() + p.penalty(z))
}

pub fn g_value(p: &TailProblem<'_>, w: &FactorPair) -> Result<f64> {
    check_len("u", p.n(), w.u.len())?;
    check_len("v", p.n(), w.v.len())?;
    let fit = 0.5 * p.residual(&w.product()).norm_squared();
    let ridge: f64 = (0..p.n())
        .filter(|&j| p.penalized[j])
        .map(|j| w.u[j] * w.u[j] + w.v[j] * w.v[j])
        .sum();
    Ok(fit + 0.5 * p.lambda * ridge)
}

/// `(∂g/∂u, ∂g/∂v) = (γ∘v + λu_{Tᶜ}, γ∘u + λv_{Tᶜ})` with `γ = γ(u∘v)`.
pub fn g_gradient(p: &TailProblem<'_>, w: &FactorPair) -> Result<FactorPair> {
    check_len("u", p.n(), w.u.len())?;
    check_len("v", p.n(), w.v.len())?;
    let gamma = p.gamma(&w.product());
    let n = p.n();
    let mut du = gamma.component_mul(&w.v);
    let mut dv = gamma.component_mul(&w.u);
    for j in 0..n {
        if p.penalized[j] {
            du[j] += p.lambda * w.u[j];
            dv[j] += p.lambda * w.v[j];
        }
    }
    Ok(FactorPair { u: du, v: dv })
}

/// Dense `2n × 2n` Hessian of `g`, ordered `(u, v)`.
///
/// Only meant for analysis at small sizes; the solvers never form it.
pub fn g_hessian(p: &TailProblem<'_>, w: &FactorPair) -> Result<Matrix> {
    check_len("u", p.n(), w.u.len())?;
    check_len("v", p.n(), w.v.len())?;
    let n = p.n();
    let mut gram = p.a.tr_mul(p.a);
    // the product kernel need not round symmetrically
    for i in 0..n {
        for j in 0..i {
            gram[(j, i)] = gram[(i, j)];
        }
    }
    let gamma = p.gamma(&w.product());
    let (u, v) = (&w.u, &w.v);
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let g = gram[(i, j)];
            h[(i, j)] = g * (v[i] * v[j]);
            h[(n + i, n + j)] = g * (u[i] * u[j]);
            h[(i, n + j)] = g * v[i] * u[j];
        }
        if p.penalized[i] {
            h[(i, i)] += p.lambda;
            h[(n + i, n + i)] += p.lambda;
        }
        h[(i, n + i)] += gamma[i];
    }
    for i in 0..n {
        for j in 0..n {
            h[(n + j, i)] = h[(i, n + j)];
        }
    }
    Ok(h)
}

/// Violation of the tail-lasso optimality conditions at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `max |γ_j|` over `j ∈ T`.
    pub residual_on_t: f64,
    /// `max |γ_j + sign(z_j)λ|` over `j ∈ Tᶜ` with `z_j ≠ 0`.
    pub residual_active: f64,
    /// `max(0, |γ_j| − λ)` over `j ∈ Tᶜ` with `z_j = 0`.
    pub residual_inactive: f64,
    pub overall: f64,
    /// `min (λ − |γ_j|)` over `j ∈ Tᶜ` with `z_j = 0`; positive under strict
    /// complementarity. `None` when no such coordinate exists.
    pub complementarity_margin: Option<f64>,
}

pub fn kkt_report(p: &TailProblem<'_>, z: &Vector) -> Result<KktReport> {
    kkt_report_with_tol(p, z, DEFAULT_ZERO_TOL)
}

/// KKT report treating `|z_j| ≤ zero_tol` as an exact zero.
pub fn kkt_report_with_tol(p: &TailProblem<'_>, z: &Vector, zero_tol: f64) -> Result<KktReport> {
    check_len("z", p.n(), z.len())?;
    let gamma = p.gamma(z);
    Ok(kkt_from_gamma(p, z, &gamma, zero_tol))
}

pub(crate) fn kkt_from_gamma(
    p: &TailProblem<'_>,
    z: &Vector,
    gamma: &Vector,
    zero_tol: f64,
) -> KktReport {
    let lambda = p.lambda;
    let (mut on_t, mut active, mut inactive) = (0.0f64, 0.0f64, 0.0f64);
    let mut margin: Option<f64> = None;
    for j in 0..p.n() {
        let gj = gamma[j];
        if !p.penalized[j] {
            on_t = on_t.max(gj.abs());
        } else if z[j].abs() > zero_tol {
            active = active.max((gj + sign(z[j]) * lambda).abs());
        } else {
            inactive = inactive.max(gj.abs() - lambda);
            let slack = lambda - gj.abs();
            margin = Some(margin.map_or(slack, |m| m.min(slack)));
        }
    }
    KktReport {
        residual_on_t: on_t,
        residual_active: active,
        residual_inactive: inactive,
        overall: on_t.max(active).max(inactive),
        complementarity_margin: margin,
    }
}

/// Balanced factorization `u_j = sign(z_j)√|z_j|`, `v_j = √|z_j|`.
pub fn split_z(z: &Vector) -> FactorPair {
    let v = z.map(|x| x.abs().sqrt());
    let u = DVector::from_iterator(z.len(), z.iter().zip(v.iter()).map(|(x, r)| sign(*x) * r));
    FactorPair { u, v }
}
