use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Result};
use clap::{Parser, Subcommand};
use tailcs_bench::{
    run_convergence_trace, run_rip_curve, run_sweep, run_timing, ExperimentConfig, ExperimentKind,
    RunOptions,
};

#[derive(Parser)]
#[command(
    name = "tailcs",
    version,
    about = "Sparse recovery experiments with tail minimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success-rate sweep over sparsity, measurements or noise
    Sweep(Args),
    /// Wall-time comparison across problem sizes
    Timing(Args),
    /// Restricted isometry constants versus sparsity
    Rip(Args),
    /// Iteration trace and empirical convergence rate of one run
    Trace(Args),
}

#[derive(clap::Args)]
struct Args {
    /// JSON experiment description
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed of the config
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also write every estimate to solutions.jsonl
    #[arg(long)]
    dump_solutions: bool,
}

impl Args {
    fn load(&self) -> Result<(ExperimentConfig, RunOptions)> {
        let cfg = ExperimentConfig::from_path(&self.config)?;
        let opts = RunOptions {
            out: self.out.clone(),
            jobs: self.jobs,
            dump_solutions: self.dump_solutions,
            seed: self.seed,
        };
        Ok((cfg, opts))
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            let (cfg, opts) = args.load()?;
            ensure!(
                matches!(
                    cfg.kind,
                    ExperimentKind::SweepK | ExperimentKind::SweepM | ExperimentKind::NoisySweep
                ),
                "`sweep` expects kind sweep_k, sweep_m or noisy_sweep"
            );
            let out = run_sweep(&cfg, &opts)?;
            for p in &out.summary.points {
                for (name, s) in &p.solvers {
                    println!(
                        "n={} m={} k={} {name}: success {:.3}",
                        p.point.n, p.point.m, p.point.k, s.success_rate
                    );
                }
            }
        }
        Command::Timing(args) => {
            let (cfg, opts) = args.load()?;
            let out = run_timing(&cfg, &opts)?;
            for p in &out.summary.points {
                for (name, s) in &p.solvers {
                    println!("n={} {name}: {:.4} s", p.point.n, s.mean_time_s);
                }
            }
        }
        Command::Rip(args) => {
            let (cfg, opts) = args.load()?;
            for row in run_rip_curve(&cfg, &opts)? {
                println!(
                    "n={} m={} k={} {:?}: lower {:.4} upper {:.4}",
                    row.n, row.m, row.k, row.method, row.lower, row.upper
                );
            }
        }
        Command::Trace(args) => {
            let (cfg, opts) = args.load()?;
            let out = run_convergence_trace(&cfg, &opts)?;
            match out.report.rate {
                Some(r) => println!("{} iterations, rate {:.4}", out.report.iterations, r.tau),
                None => println!("{} iterations, too short for a rate", out.report.iterations),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
