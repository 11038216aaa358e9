use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use super::output::{final_return, mean_std, summarize, write_run_csv, write_summary_csv, EventLog};
use super::{ExperimentConfig, VariantConfig};
use crate::agents::{run_training_with, RunRecord};
use crate::error::{Error, Result};
use crate::rewards::RewardConfig;

/// Outcome of one seed.
#[derive(Debug)]
pub struct SeedOutcome {
    pub seed: u64,
    pub result: Result<Vec<RunRecord>>,
}

#[derive(Debug)]
pub struct ExperimentReport {
    pub output_dir: PathBuf,
    pub outcomes: Vec<SeedOutcome>,
}

impl ExperimentReport {
    pub fn failures(&self) -> Vec<(u64, String)> {
        self.outcomes
            .iter()
            .filter_map(|o| o.result.as_ref().err().map(|e| (o.seed, e.to_string())))
            .collect()
    }

    pub fn succeeded(&self) -> Vec<(u64, &[RunRecord])> {
        self.outcomes.iter().filter_map(|o| o.result.as_ref().ok().map(|r| (o.seed, r.as_slice()))).collect()
    }
}

/// Column names of a run CSV, in order.
pub fn run_record_header() -> Result<Vec<String>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(RunRecord::default())?;
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let text = String::from_utf8_lossy(&bytes);
    Ok(text.lines().next().unwrap_or_default().split(',').map(str::to_string).collect())
}

pub fn run_file_name(seed: u64) -> String {
    format!("run_{seed}.csv")
}

fn run_one(cfg: &ExperimentConfig, reward: &RewardConfig, seed: u64, dir: &Path, log: &EventLog, label: &str) -> Result<Vec<RunRecord>> {
    log.emit("run_start", json!({ "variant": label, "seed": seed }))?;
    let result = run_training_with(&cfg.env, &cfg.agent, reward, seed, |r| {
        if (r.update + 1) % cfg.log_every == 0 {
            log.emit(
                "update",
                json!({
                    "variant": label,
                    "seed": seed,
                    "update": r.update,
                    "env_steps": r.env_steps,
                    "mean_episode_return": r.mean_episode_return,
                    "intrinsic_mean": r.intrinsic_mean,
                }),
            )?;
        }
        Ok(())
    })
    .and_then(|records| {
        write_run_csv(&dir.join(run_file_name(seed)), &records)?;
        Ok(records)
    });
    match &result {
        Ok(records) => log.emit(
            "run_end",
            json!({ "variant": label, "seed": seed, "updates": records.len(), "final_return": final_return(records) }),
        )?,
        Err(e) => log.emit("run_failed", json!({ "variant": label, "seed": seed, "error": e.to_string() }))?,
    }
    result
}

fn prepare_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn write_summary(dir: &Path, outcomes: &[SeedOutcome]) -> Result<()> {
    let runs: Vec<Vec<RunRecord>> = outcomes.iter().filter_map(|o| o.result.as_ref().ok().cloned()).collect();
    write_summary_csv(&dir.join("summary.csv"), &summarize(&runs))
}

/// Runs every seed (in parallel), writing `run_<seed>.csv`, `summary.csv`,
/// `config.toml` and `events.jsonl` under `output_dir`. A failing seed is
/// recorded and the others continue.
pub fn run_experiment(cfg: &ExperimentConfig, output_dir: &Path) -> Result<ExperimentReport> {
    if cfg.seeds.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    prepare_dir(output_dir)?;
    std::fs::write(output_dir.join("config.toml"), cfg.to_toml()?)?;
    let log = EventLog::create(&output_dir.join("events.jsonl"))?;
    let label = cfg.reward.variant.name();
    let outcomes: Vec<SeedOutcome> = cfg
        .seeds
        .par_iter()
        .map(|&seed| SeedOutcome { seed, result: run_one(cfg, &cfg.reward, seed, output_dir, &log, label) })
        .collect();
    write_summary(output_dir, &outcomes)?;
    Ok(ExperimentReport { output_dir: output_dir.to_path_buf(), outcomes })
}

/// Final-return statistics of one variant.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub name: String,
    pub seeds: usize,
    pub final_return_mean: f64,
    pub final_return_std: f64,
    /// Seeds whose run reached the goal at least once.
    pub goal_seeds: usize,
}

#[derive(Debug)]
pub struct ComparisonReport {
    pub output_dir: PathBuf,
    pub variants: Vec<(VariantConfig, Vec<SeedOutcome>)>,
    pub summaries: Vec<VariantSummary>,
}

impl ComparisonReport {
    pub fn failures(&self) -> Vec<(String, u64, String)> {
        self.variants
            .iter()
            .flat_map(|(v, outs)| {
                outs.iter().filter_map(|o| o.result.as_ref().err().map(|e| (v.name.clone(), o.seed, e.to_string())))
            })
            .collect()
    }
}

/// Runs each variant over the shared seed list. Writes `<variant>/run_<seed>.csv`
/// and `<variant>/summary.csv`, one long `comparison.csv` ordered by
/// (variant, seed, update), and `final_returns.csv`.
pub fn compare_variants(cfg: &ExperimentConfig, variants: &[VariantConfig], output_dir: &Path) -> Result<ComparisonReport> {
    if variants.is_empty() {
        return Err(Error::Config("no variants to compare".into()));
    }
    if cfg.seeds.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    prepare_dir(output_dir)?;
    let snapshot = ExperimentConfig { variants: variants.to_vec(), ..cfg.clone() };
    std::fs::write(output_dir.join("config.toml"), snapshot.to_toml()?)?;
    let log = EventLog::create(&output_dir.join("events.jsonl"))?;
    for v in variants {
        prepare_dir(&output_dir.join(&v.name))?;
    }
    let jobs: Vec<(usize, u64)> = (0..variants.len()).flat_map(|v| cfg.seeds.iter().map(move |&s| (v, s))).collect();
    let mut results: Vec<(usize, SeedOutcome)> = jobs
        .par_iter()
        .map(|&(v, seed)| {
            let var = &variants[v];
            let dir = output_dir.join(&var.name);
            (v, SeedOutcome { seed, result: run_one(cfg, &var.reward, seed, &dir, &log, &var.name) })
        })
        .collect();

    let mut grouped: Vec<(VariantConfig, Vec<SeedOutcome>)> = variants.iter().map(|v| (v.clone(), Vec::new())).collect();
    for (v, outcome) in results.drain(..) {
        grouped[v].1.push(outcome);
    }

    let mut wide = csv::WriterBuilder::new().has_headers(false).from_path(output_dir.join("comparison.csv"))?;
    let mut header = vec!["variant".to_string(), "seed".to_string()];
    header.extend(run_record_header()?);
    wide.write_record(&header)?;
    let mut summaries = Vec::with_capacity(grouped.len());
    for (var, outcomes) in &grouped {
        write_summary(&output_dir.join(&var.name), outcomes)?;
        let mut finals = Vec::new();
        let mut goal_seeds = 0;
        for o in outcomes {
            if let Ok(records) = &o.result {
                for r in records {
                    wide.serialize((var.name.as_str(), o.seed, r))?;
                }
                finals.push(final_return(records));
                if records.last().is_some_and(|r| r.successes > 0) {
                    goal_seeds += 1;
                }
            }
        }
        let (m, s) = mean_std(&finals);
        summaries.push(VariantSummary {
            name: var.name.clone(),
            seeds: finals.len(),
            final_return_mean: m,
            final_return_std: s,
            goal_seeds,
        });
    }
    wide.flush()?;

    let mut fr = csv::Writer::from_path(output_dir.join("final_returns.csv"))?;
    fr.write_record(["variant", "seeds", "final_return_mean", "final_return_std", "goal_seeds"])?;
    for s in &summaries {
        fr.write_record([
            s.name.clone(),
            s.seeds.to_string(),
            s.final_return_mean.to_string(),
            s.final_return_std.to_string(),
            s.goal_seeds.to_string(),
        ])?;
    }
    fr.flush()?;
    Ok(ComparisonReport { output_dir: output_dir.to_path_buf(), variants: grouped, summaries })
}
