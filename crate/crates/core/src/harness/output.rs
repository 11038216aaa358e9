use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::agents::RunRecord;
use crate::error::{Error, Result};

/// Numeric run columns aggregated in `summary.csv`, in output order.
pub const SUMMARY_METRICS: [&str; 12] = [
    "mean_episode_return",
    "episodes_completed",
    "successes",
    "intrinsic_mean",
    "intrinsic_max",
    "scaling_l",
    "lambda",
    "d_hat",
    "policy_loss",
    "value_loss",
    "entropy",
    "dynamics_loss",
];

pub fn metric(r: &RunRecord, name: &str) -> f64 {
    match name {
        "mean_episode_return" => r.mean_episode_return,
        "episodes_completed" => r.episodes_completed as f64,
        "successes" => r.successes as f64,
        "intrinsic_mean" => r.intrinsic_mean,
        "intrinsic_max" => r.intrinsic_max,
        "scaling_l" => r.scaling_l,
        "lambda" => r.lambda,
        "d_hat" => r.d_hat,
        "policy_loss" => r.policy_loss,
        "value_loss" => r.value_loss,
        "entropy" => r.entropy,
        "dynamics_loss" => r.dynamics_loss,
        _ => f64::NAN,
    }
}

pub fn write_run_csv(path: &Path, records: &[RunRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_run_csv(path: &Path) -> Result<Vec<RunRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-update mean and standard deviation across runs, aligned by update
/// index and truncated to the shortest run.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub update: u64,
    pub env_steps: u64,
    pub runs: usize,
    /// `(mean, std)` per entry of [`SUMMARY_METRICS`].
    pub stats: Vec<(f64, f64)>,
}

pub fn summarize(runs: &[Vec<RunRecord>]) -> Vec<SummaryRow> {
    let len = runs.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| SummaryRow {
            update: runs[0][i].update,
            env_steps: runs[0][i].env_steps,
            runs: runs.len(),
            stats: SUMMARY_METRICS
                .iter()
                .map(|m| mean_std(&runs.iter().map(|r| metric(&r[i], m)).collect::<Vec<_>>()))
                .collect(),
        })
        .collect()
}

pub fn write_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["update".to_string(), "env_steps".to_string(), "runs".to_string()];
    for m in SUMMARY_METRICS {
        header.push(format!("{m}_mean"));
        header.push(format!("{m}_std"));
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![row.update.to_string(), row.env_steps.to_string(), row.runs.to_string()];
        for (m, s) in &row.stats {
            rec.push(m.to_string());
            rec.push(s.to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Mean extrinsic return over the last `max(1, n/10)` records.
pub fn final_return(records: &[RunRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let tail = (records.len() / 10).max(1);
    records[records.len() - tail..].iter().map(|r| r.mean_episode_return).sum::<f64>() / tail as f64
}

/// Thread-safe JSON-lines event log. Timestamps are seconds since creation.
pub struct EventLog {
    out: Mutex<BufWriter<File>>,
    start: Instant,
}

#[derive(Serialize)]
struct Event<'a, T: Serialize> {
    event: &'a str,
    elapsed_s: f64,
    #[serde(flatten)]
    fields: T,
}

impl EventLog {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self { out: Mutex::new(BufWriter::new(File::create(path)?)), start: Instant::now() })
    }

    pub fn emit<T: Serialize>(&self, event: &str, fields: T) -> Result<()> {
        let line = serde_json::to_string(&Event { event, elapsed_s: self.start.elapsed().as_secs_f64(), fields })?;
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        writeln!(out, "{line}")?;
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(update: u64, ret: f64) -> RunRecord {
        RunRecord { update, env_steps: (update + 1) * 10, mean_episode_return: ret, ..RunRecord::default() }
    }

    #[test]
    fn population_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }

    #[test]
    fn summary_truncates_to_shortest_run() {
        let rows = summarize(&[vec![rec(0, 1.0), rec(1, 2.0)], vec![rec(0, 3.0)]]);
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].stats[0], (2.0, 1.0));
    }

    #[test]
    fn final_return_uses_last_tenth() {
        let recs: Vec<_> = (0..20).map(|i| rec(i, i as f64)).collect();
        assert_eq!(final_return(&recs), 18.5);
        assert_eq!(final_return(&recs[..3]), 2.0);
    }

    #[test]
    fn run_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.csv");
        let recs = vec![RunRecord { intrinsic_mean: 0.1 + 0.2, d_hat: -1e-300, ..rec(0, 1.0 / 3.0) }, rec(1, 2.5)];
        write_run_csv(&path, &recs).unwrap();
        assert_eq!(read_run_csv(&path).unwrap(), recs);
        let header = std::fs::read_to_string(&path).unwrap();
        assert!(header.starts_with("update,env_steps,mean_episode_return,episodes_completed,successes,intrinsic_mean"));
    }
}
