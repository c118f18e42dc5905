//! Per-trial records and their aggregates.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::Result;
use serde::{Deserialize, Serialize};

use crate::config::GridPoint;

pub const RECORDS_FILE: &str = "records.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const SOLUTIONS_FILE: &str = "solutions.jsonl";

/// Outcome of one solver on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub grid_id: usize,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trial: usize,
    pub solver: String,
    pub seed: u64,
    /// `‖ẑ − x‖₂`; infinite when the solver failed.
    pub error: f64,
    pub success: bool,
    pub wall_time_s: f64,
    pub iters: usize,
}

/// Estimate kept for `solutions.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionDump {
    pub grid_id: usize,
    pub trial: usize,
    pub solver: String,
    pub seed: u64,
    pub z: Vec<f64>,
}

/// CSV writer that appends one grid point at a time so partial sweeps
/// survive interruption.
pub struct RecordWriter {
    inner: csv::Writer<File>,
}

impl RecordWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self {
            inner: csv::Writer::from_path(path)?,
        })
    }

    pub fn write_all(&mut self, records: &[TrialRecord]) -> Result<()> {
        for r in records {
            self.inner.serialize(r)?;
        }
        self.inner.flush()?;
        Ok(())
    }
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>> {
    let mut reader = csv::Reader::from_path(path)?;
    Ok(reader.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_solutions(path: &Path, dumps: &[SolutionDump]) -> Result<()> {
    let mut file = std::io::BufWriter::new(File::create(path)?);
    for d in dumps {
        serde_json::to_writer(&mut file, d)?;
        file.write_all(b"\n")?;
    }
    file.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub trials: usize,
    pub success_rate: f64,
    /// `None` when some trial failed outright.
    pub mean_error: Option<f64>,
    pub mean_time_s: f64,
    pub mean_iters: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub grid_id: usize,
    #[serde(flatten)]
    pub point: GridPoint,
    /// Keyed by solver label.
    pub solvers: BTreeMap<String, SolverSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub seed: u64,
    pub success_threshold: f64,
    /// Sparsity handed to the greedy and fixed-support solvers.
    pub sparsity_input: String,
    pub points: Vec<PointSummary>,
}

/// Per-solver means over the records of one grid point, in label order.
pub fn summarize_point(grid_id: usize, point: GridPoint, records: &[TrialRecord]) -> PointSummary {
    let mut groups: BTreeMap<String, Vec<&TrialRecord>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.grid_id == grid_id) {
        groups.entry(r.solver.clone()).or_default().push(r);
    }
    let solvers = groups
        .into_iter()
        .map(|(name, rs)| {
            let count = rs.len() as f64;
            let mean =
                |f: &dyn Fn(&TrialRecord) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / count;
            let mean_error = mean(&|r| r.error);
            let summary = SolverSummary {
                trials: rs.len(),
                success_rate: mean(&|r| f64::from(u8::from(r.success))),
                mean_error: mean_error.is_finite().then_some(mean_error),
                mean_time_s: mean(&|r| r.wall_time_s),
                mean_iters: mean(&|r| r.iters as f64),
            };
            (name, summary)
        })
        .collect();
    PointSummary {
        grid_id,
        point,
        solvers,
    }
}
