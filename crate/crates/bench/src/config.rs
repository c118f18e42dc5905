//! Experiment configuration files.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use tailcs::problem_gen::{Ensemble, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SweepK,
    SweepM,
    NoisySweep,
    Timing,
    RipCurve,
    ConvergenceTrace,
}

impl ExperimentKind {
    pub fn is_sweep(self) -> bool {
        matches!(
            self,
            Self::SweepK | Self::SweepM | Self::NoisySweep | Self::Timing
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    Phpp,
    Hpp,
    TailHpp,
    Omp,
    Cosamp,
    Sp,
    Htp,
    /// Plain ℓ1 minimization (empty estimated support).
    L1,
    /// Tail-ℓ1 minimization given the true support.
    TailL1Oracle,
}

impl SolverName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Phpp => "phpp",
            Self::Hpp => "hpp",
            Self::TailHpp => "tail_hpp",
            Self::Omp => "omp",
            Self::Cosamp => "cosamp",
            Self::Sp => "sp",
            Self::Htp => "htp",
            Self::L1 => "l1",
            Self::TailL1Oracle => "tail_l1_oracle",
        }
    }
}

/// Per-solver overrides; anything left out takes the solver default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverParams {
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub k0: Option<usize>,
    pub kp: Option<usize>,
    pub max_iters: Option<usize>,
    pub step_tol: Option<f64>,
    pub kkt_tol: Option<f64>,
    /// Size of the fixed support used by `tail_hpp` (defaults to the true `k`).
    pub t_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub name: SolverName,
    #[serde(default)]
    pub params: SolverParams,
    /// Column label in the outputs; defaults to the solver name.
    #[serde(default)]
    pub label: Option<String>,
}

impl SolverSpec {
    pub fn new(name: SolverName) -> Self {
        Self {
            name,
            params: SolverParams::default(),
            label: None,
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(self.name.as_str())
    }
}

/// Sizes of one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridPoint {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_ensemble")]
    pub ensemble: Ensemble,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub m_grid: Option<Vec<usize>>,
    /// `m = round(m_ratio · n)`.
    #[serde(default)]
    pub m_ratio: Option<f64>,
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub k_grid: Option<Vec<usize>>,
    /// `k = max(1, round(k_ratio · n))`.
    #[serde(default)]
    pub k_ratio: Option<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_noise")]
    pub noise: NoiseModel,
    #[serde(default)]
    pub solvers: Vec<SolverSpec>,
    /// Defaults to `1e-4` without noise and `0.01` with noise.
    #[serde(default)]
    pub success_threshold: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    /// Record wall times in sweeps. Off by default so that reruns produce
    /// identical files; timing experiments always record.
    #[serde(default)]
    pub record_wall_time: bool,
    /// Sampled supports per order in RIP curves beyond the exact budget.
    #[serde(default = "default_mc_trials")]
    pub mc_trials: usize,
    /// Stopping tolerance of convergence traces.
    #[serde(default = "default_trace_tol")]
    pub trace_tol: f64,
}

fn default_ensemble() -> Ensemble {
    Ensemble::Gaussian
}

fn default_trials() -> usize {
    1
}

fn default_noise() -> NoiseModel {
    NoiseModel::None
}

fn default_mc_trials() -> usize {
    10_000
}

fn default_trace_tol() -> f64 {
    1e-13
}

fn pick(
    name: &str,
    single: Option<usize>,
    grid: &Option<Vec<usize>>,
) -> Result<Option<Vec<usize>>> {
    match (single, grid) {
        (Some(_), Some(_)) => bail!("give either `{name}` or `{name}_grid`, not both"),
        (Some(v), None) => Ok(Some(vec![v])),
        (None, Some(g)) => {
            ensure!(!g.is_empty(), "`{name}_grid` must not be empty");
            Ok(Some(g.clone()))
        }
        (None, None) => Ok(None),
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.trials >= 1, "trials must be at least 1");
        if let Some(t) = self.success_threshold {
            ensure!(t > 0.0, "success_threshold must be positive");
        }
        self.noise.validate()?;
        let grid = self.grid()?;
        ensure!(!grid.is_empty(), "the experiment grid is empty");
        for p in &grid {
            ensure!(p.n >= 1 && p.m >= 1, "dimensions must be positive: {p:?}");
            ensure!(
                p.k >= 1 && p.k <= p.n,
                "sparsity {} must lie in 1..={}",
                p.k,
                p.n
            );
        }
        if self.kind.is_sweep() {
            ensure!(
                !self.solvers.is_empty(),
                "a sweep needs at least one solver"
            );
            let mut labels: Vec<&str> = self.solvers.iter().map(|s| s.label()).collect();
            labels.sort_unstable();
            let count = labels.len();
            labels.dedup();
            ensure!(labels.len() == count, "solver labels must be unique");
        }
        if self.kind == ExperimentKind::RipCurve {
            ensure!(self.mc_trials >= 1, "mc_trials must be at least 1");
        }
        ensure!(self.trace_tol >= 0.0, "trace_tol must be nonnegative");
        Ok(())
    }

    pub fn threshold(&self) -> f64 {
        self.success_threshold
            .unwrap_or(if self.noise.sigma() > 0.0 { 0.01 } else { 1e-4 })
    }

    /// Grid points in row-major order over `n`, then `m`, then `k`.
    pub fn grid(&self) -> Result<Vec<GridPoint>> {
        let ns = pick("n", self.n, &self.n_grid)?.context("`n` or `n_grid` is required")?;
        let ms = pick("m", self.m, &self.m_grid)?;
        let ks = pick("k", self.k, &self.k_grid)?;
        ensure!(
            ms.is_none() || self.m_ratio.is_none(),
            "give either `m`/`m_grid` or `m_ratio`"
        );
        ensure!(
            ks.is_none() || self.k_ratio.is_none(),
            "give either `k`/`k_grid` or `k_ratio`"
        );
        let mut out = Vec::new();
        for &n in &ns {
            let m_values = match (&ms, self.m_ratio) {
                (Some(v), _) => v.clone(),
                (None, Some(r)) => vec![(r * n as f64).round() as usize],
                (None, None) => bail!("`m`, `m_grid` or `m_ratio` is required"),
            };
            let k_values = match (&ks, self.k_ratio) {
                (Some(v), _) => v.clone(),
                (None, Some(r)) => vec![((r * n as f64).round() as usize).max(1)],
                (None, None) if self.kind == ExperimentKind::RipCurve => vec![1],
                (None, None) => bail!("`k`, `k_grid` or `k_ratio` is required"),
            };
            for &m in &m_values {
                for &k in &k_values {
                    out.push(GridPoint { n, m, k });
                }
            }
        }
        Ok(out)
    }
}
