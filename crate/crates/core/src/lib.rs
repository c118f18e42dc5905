//! Sparse recovery by tail minimization.
//!
//! The crate solves the tail-lasso problem
//! `min ½‖Az − y‖² + λ‖z_{Tᶜ}‖₁` through the Hadamard parametrization
//! `z = u∘v`, and ships baselines, problem generators and RIP/bound analysis.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod analysis;
pub mod error;
pub mod objective;
pub mod phpp;
pub mod problem_gen;
pub mod reference;
pub mod support;

pub(crate) mod linalg;

pub use error::{Error, Result};
pub use objective::{FactorPair, KktReport, TailProblem};
pub use phpp::{PhppConfig, SolverTrace, StopReason};
pub use support::{hard_threshold_support, SupportSet};

pub type Matrix = nalgebra::DMatrix<f64>;
pub type Vector = nalgebra::DVector<f64>;
