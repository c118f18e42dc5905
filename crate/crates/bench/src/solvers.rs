//! Dispatch from configured solver names to the library routines.

use std::time::Instant;

use tailcs::phpp::{default_init, solve_phpp_improved, PhppConfig};
use tailcs::problem_gen::ProblemInstance;
use tailcs::reference::{cosamp, hpp, htp, omp, sp, tail_hpp, tail_l1_constrained, BaselineConfig};
use tailcs::support::{hard_threshold_support, SupportSet};
use tailcs::Vector;

use crate::config::{SolverName, SolverSpec};

/// KKT tolerance used by the convex reference solvers.
const ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverRun {
    pub z: Vector,
    pub iters: usize,
    pub wall_time_s: f64,
}

/// Default tail-lasso weight: `σ√(log n / m)` with noise, `0.1/m` without.
pub fn default_lambda(inst: &ProblemInstance, sigma: f64) -> f64 {
    let (m, n) = (inst.m() as f64, inst.n() as f64);
    if sigma > 0.0 {
        sigma * (n.ln() / m).sqrt()
    } else {
        0.1 / m
    }
}

/// PHPP configuration for `spec`, filling unset fields from the defaults.
pub fn phpp_config(spec: &SolverSpec, inst: &ProblemInstance, sigma: f64) -> PhppConfig {
    let p = &spec.params;
    let lambda = p.lambda.unwrap_or_else(|| default_lambda(inst, sigma));
    let mut cfg = PhppConfig::new(lambda);
    if let Some(v) = p.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = p.tau {
        cfg.tau = v;
    }
    if let Some(v) = p.k0 {
        cfg.k0 = v;
    }
    if let Some(v) = p.kp {
        cfg.k_step = v;
    }
    if let Some(v) = p.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = p.step_tol {
        cfg.step_tol = v;
    }
    if let Some(v) = p.kkt_tol {
        cfg.kkt_tol = v;
    }
    cfg
}

/// Runs one solver on one instance. Greedy methods and the fixed-support
/// schemes are told the true sparsity `k`.
pub fn run_solver(
    spec: &SolverSpec,
    inst: &ProblemInstance,
    sigma: f64,
) -> tailcs::Result<SolverRun> {
    let (a, y) = (&inst.matrix, &inst.y);
    let k = inst.truth.sparsity();
    let baseline = || {
        let mut cfg = BaselineConfig::new(k);
        if let Some(v) = spec.params.max_iters {
            cfg.max_iters = v;
        }
        cfg
    };
    // the constrained programs get the realized noise level as their budget
    let eps = inst.noise.norm();
    let start = Instant::now();
    let (z, iters) = match spec.name {
        SolverName::Phpp => {
            let cfg = phpp_config(spec, inst, sigma);
            let out = solve_phpp_improved(a, y, &cfg, &default_init(a, y, inst.seed))?;
            (out.z, out.trace.iterations())
        }
        SolverName::Hpp => {
            let cfg = phpp_config(spec, inst, sigma);
            let (z, trace) = hpp(a, y, &cfg, &default_init(a, y, inst.seed))?;
            (z, trace.iterations())
        }
        SolverName::TailHpp => {
            let cfg = phpp_config(spec, inst, sigma);
            let size = spec.params.t_size.unwrap_or(k).min(inst.n());
            let t = hard_threshold_support(a.tr_mul(y).as_slice(), size)?;
            let (z, trace) = tail_hpp(a, y, &t, &cfg, &default_init(a, y, inst.seed))?;
            (z, trace.iterations())
        }
        SolverName::Omp => {
            let r = omp(a, y, &baseline())?;
            (r.z, r.iters)
        }
        SolverName::Cosamp => {
            let r = cosamp(a, y, &baseline())?;
            (r.z, r.iters)
        }
        SolverName::Sp => {
            let r = sp(a, y, &baseline())?;
            (r.z, r.iters)
        }
        SolverName::Htp => {
            let r = htp(a, y, &baseline())?;
            (r.z, r.iters)
        }
        SolverName::L1 => (
            tail_l1_constrained(a, y, &SupportSet::empty(), eps, ORACLE_TOL)?,
            1,
        ),
        SolverName::TailL1Oracle => (
            tail_l1_constrained(a, y, &inst.truth.support, eps, ORACLE_TOL)?,
            1,
        ),
    };
    Ok(SolverRun {
        z,
        iters,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
