use crate::error::Result;
use crate::objective::{FactorPair, TailProblem};
use crate::phpp::{solve_phpp, PhppConfig, SolverTrace};
use crate::support::SupportSet;
use crate::{Matrix, Vector};

/// Hadamard product parametrization for the plain lasso: the proximal
/// alternating scheme with an empty estimated support.
pub fn hpp(
    a: &Matrix,
    y: &Vector,
    cfg: &PhppConfig,
    w0: &FactorPair,
) -> Result<(Vector, SolverTrace)> {
    tail_hpp(a, y, &SupportSet::empty(), cfg, w0)
}

/// The proximal alternating scheme with a fixed, caller-chosen support.
pub fn tail_hpp(
    a: &Matrix,
    y: &Vector,
    t: &SupportSet,
    cfg: &PhppConfig,
    w0: &FactorPair,
) -> Result<(Vector, SolverTrace)> {
    let p = TailProblem::new(a, y, cfg.lambda, t.clone())?;
    let (w, trace) = solve_phpp(&p, cfg, w0)?;
    Ok((w.product(), trace))
}
