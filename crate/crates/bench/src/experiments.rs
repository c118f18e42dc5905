//! Experiment runners behind the `tailcs` subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tailcs::analysis::{
    binomial, rate_estimate, rip_exact, rip_monte_carlo, RateEstimate, RipEstimate, RipMethod,
    EXACT_BUDGET,
};
use tailcs::objective::TailProblem;
use tailcs::phpp::{default_init, solve_phpp, SolverTrace};
use tailcs::problem_gen::{derive_seed, generate_instance, ProblemInstance};

use crate::config::{ExperimentConfig, ExperimentKind, GridPoint, SolverName, SolverSpec};
use crate::records::{
    summarize_point, write_solutions, RecordWriter, SolutionDump, Summary, TrialRecord,
    RECORDS_FILE, SOLUTIONS_FILE, SUMMARY_FILE,
};
use crate::solvers::{phpp_config, run_solver};

pub const RIP_FILE: &str = "rip_curve.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const RATE_FILE: &str = "rate.json";

/// Command-line overrides shared by all runners.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub jobs: usize,
    pub dump_solutions: bool,
    /// Replaces the master seed from the config.
    pub seed: Option<u64>,
}

impl RunOptions {
    pub fn new(out: impl Into<PathBuf>) -> Self {
        Self {
            out: out.into(),
            jobs: 1,
            dump_solutions: false,
            seed: None,
        }
    }

    fn master_seed(&self, cfg: &ExperimentConfig) -> u64 {
        self.seed.unwrap_or(cfg.seed)
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        ensure!(self.jobs >= 1, "jobs must be at least 1");
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()?)
    }
}

/// Seed of one trial; independent of scheduling and thread count.
pub fn trial_seed(master: u64, grid_id: usize, trial: usize) -> u64 {
    derive_seed(master, &[grid_id as u64, trial as u64])
}

pub fn instance_for(
    cfg: &ExperimentConfig,
    point: GridPoint,
    seed: u64,
) -> Result<ProblemInstance> {
    Ok(generate_instance(
        cfg.ensemble,
        point.m,
        point.n,
        point.k,
        &cfg.noise,
        seed,
    )?)
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

fn run_trial(
    cfg: &ExperimentConfig,
    grid_id: usize,
    point: GridPoint,
    trial: usize,
    master: u64,
    keep_time: bool,
) -> Result<Vec<(TrialRecord, Vec<f64>)>> {
    let seed = trial_seed(master, grid_id, trial);
    let inst = instance_for(cfg, point, seed)?;
    let x = inst.truth.dense();
    let threshold = cfg.threshold();
    let sigma = cfg.noise.sigma();
    Ok(cfg
        .solvers
        .iter()
        .map(|spec| {
            let (error, time, iters, z) = match run_solver(spec, &inst, sigma) {
                Ok(run) => (
                    (&run.z - &x).norm(),
                    run.wall_time_s,
                    run.iters,
                    run.z.as_slice().to_vec(),
                ),
                Err(_) => (f64::INFINITY, 0.0, 0, Vec::new()),
            };
            let record = TrialRecord {
                grid_id,
                n: point.n,
                m: point.m,
                k: point.k,
                trial,
                solver: spec.label().to_string(),
                seed,
                error,
                success: error <= threshold,
                wall_time_s: if keep_time { time } else { 0.0 },
                iters,
            };
            (record, z)
        })
        .collect())
}

/// Runs every configured solver on `trials` instances per grid point and
/// writes `records.csv`, `summary.json` and optionally `solutions.jsonl`
/// into the output directory.
///
/// The files depend only on the config and the master seed: trials run in
/// parallel but are written in (grid point, trial, solver) order.
pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepOutput> {
    ensure!(
        cfg.kind.is_sweep(),
        "experiment kind {:?} is not a sweep",
        cfg.kind
    );
    cfg.validate()?;
    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let master = opts.master_seed(cfg);
    let keep_time = cfg.record_wall_time || cfg.kind == ExperimentKind::Timing;
    let pool = opts.pool()?;
    let grid = cfg.grid()?;

    let mut writer = RecordWriter::create(&opts.out.join(RECORDS_FILE))?;
    let mut records = Vec::new();
    let mut dumps = Vec::new();
    let mut points = Vec::new();
    for (grid_id, &point) in grid.iter().enumerate() {
        let per_trial: Vec<Vec<(TrialRecord, Vec<f64>)>> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|trial| run_trial(cfg, grid_id, point, trial, master, keep_time))
                .collect::<Result<_>>()
        })?;
        let batch: Vec<TrialRecord> = per_trial.iter().flatten().map(|(r, _)| r.clone()).collect();
        writer.write_all(&batch)?;
        if opts.dump_solutions {
            dumps.extend(per_trial.into_iter().flatten().map(|(r, z)| SolutionDump {
                grid_id,
                trial: r.trial,
                solver: r.solver,
                seed: r.seed,
                z,
            }));
        }
        points.push(summarize_point(grid_id, point, &batch));
        records.extend(batch);
    }

    let summary = Summary {
        seed: master,
        success_threshold: cfg.threshold(),
        sparsity_input: "true_k".into(),
        points,
    };
    fs::write(
        opts.out.join(SUMMARY_FILE),
        serde_json::to_string_pretty(&summary)?,
    )?;
    if opts.dump_solutions {
        write_solutions(&opts.out.join(SOLUTIONS_FILE), &dumps)?;
    }
    Ok(SweepOutput { records, summary })
}

/// Timing comparison: a sweep that always records wall times.
pub fn run_timing(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepOutput> {
    ensure!(
        cfg.kind == ExperimentKind::Timing,
        "expected a timing config"
    );
    run_sweep(cfg, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RipRow {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub method: RipMethod,
    pub lower: f64,
    pub upper: f64,
    pub samples: usize,
}

/// RIP constants for every `k` of the grid: exact where enumeration fits
/// the budget (plus a sampled estimate for comparison), sampled beyond.
/// Writes `rip_curve.csv`.
pub fn run_rip_curve(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Vec<RipRow>> {
    ensure!(
        cfg.kind == ExperimentKind::RipCurve,
        "expected a rip_curve config"
    );
    cfg.validate()?;
    fs::create_dir_all(&opts.out)?;
    let master = opts.master_seed(cfg);
    let pool = opts.pool()?;
    let mut rows = Vec::new();
    for point in cfg.grid()? {
        let a = cfg.ensemble.generate(
            point.m,
            point.n,
            derive_seed(master, &[point.n as u64, point.m as u64]),
        )?;
        let mc_seed = derive_seed(master, &[point.n as u64, point.m as u64, point.k as u64]);
        let estimates = pool.install(|| -> Result<Vec<RipEstimate>> {
            let mut out = Vec::new();
            if binomial(point.n, point.k) <= EXACT_BUDGET {
                out.push(rip_exact(&a, point.k)?);
            }
            out.push(rip_monte_carlo(&a, point.k, cfg.mc_trials, mc_seed)?);
            Ok(out)
        })?;
        rows.extend(estimates.into_iter().map(|e| RipRow {
            n: point.n,
            m: point.m,
            k: e.order,
            method: e.method,
            lower: e.lower,
            upper: e.upper,
            samples: e.samples,
        }));
    }
    let mut writer = csv::Writer::from_path(opts.out.join(RIP_FILE))?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub g: f64,
    pub f: f64,
    pub step: f64,
    pub kkt: f64,
    /// Distance of the iterate to the final one.
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub iterations: usize,
    pub status: tailcs::phpp::StopReason,
    /// `None` when the run was too short to estimate a rate.
    pub rate: Option<RateEstimate>,
    pub linear: bool,
}

#[derive(Debug, Clone)]
pub struct TraceOutput {
    pub trace: SolverTrace,
    pub rows: Vec<TraceRow>,
    pub report: RateReport,
}

/// Long single-instance run of the fixed-support scheme with the true
/// support as `T`, stopped once the step drops below `trace_tol`. Writes
/// `trace.csv` and `rate.json`.
pub fn run_convergence_trace(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<TraceOutput> {
    ensure!(
        cfg.kind == ExperimentKind::ConvergenceTrace,
        "expected a convergence_trace config"
    );
    cfg.validate()?;
    fs::create_dir_all(&opts.out)?;
    let point = cfg.grid()?[0];
    let inst = instance_for(cfg, point, trial_seed(opts.master_seed(cfg), 0, 0))?;
    let spec = match cfg.solvers.first() {
        Some(s) if matches!(s.name, SolverName::Phpp | SolverName::TailHpp) => s.clone(),
        Some(s) => bail!(
            "convergence traces support phpp and tail_hpp, not {}",
            s.label()
        ),
        None => SolverSpec::new(SolverName::Phpp),
    };
    let mut pcfg = phpp_config(&spec, &inst, cfg.noise.sigma());
    pcfg.step_tol = cfg.trace_tol;
    pcfg.kkt_tol = 0.0;
    pcfg.record_iterates = true;
    if spec.params.max_iters.is_none() {
        pcfg.max_iters = 100_000;
    }
    let problem = TailProblem::new(
        &inst.matrix,
        &inst.y,
        pcfg.lambda,
        inst.truth.support.clone(),
    )?;
    let w0 = default_init(&inst.matrix, &inst.y, inst.seed);
    let (w_star, trace) = solve_phpp(&problem, &pcfg, &w0)?;

    let iterates = trace.iterates.as_deref().unwrap_or_default();
    let rows: Vec<TraceRow> = trace
        .records
        .iter()
        .map(|rec| TraceRow {
            iter: rec.iter,
            g: rec.g,
            f: rec.f,
            step: rec.step,
            kkt: rec.kkt,
            r: iterates[rec.iter + 1].distance(&w_star),
        })
        .collect();
    let rate = rate_estimate(&trace, &w_star).ok();
    let report = RateReport {
        iterations: trace.iterations(),
        status: trace.status,
        rate,
        linear: rate.is_some_and(|r| r.is_linear()),
    };

    let mut writer = csv::Writer::from_path(opts.out.join(TRACE_FILE))?;
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    fs::write(
        opts.out.join(RATE_FILE),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(TraceOutput {
        trace,
        rows,
        report,
    })
}

/// Reads back `records.csv` from a finished run.
pub fn load_records(dir: &Path) -> Result<Vec<TrialRecord>> {
    crate::records::read_records(&dir.join(RECORDS_FILE))
}
