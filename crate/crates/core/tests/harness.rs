use std::collections::HashMap;
use std::path::Path;

use revd_core::harness::{
    compare_variants, final_return, read_run_csv, run_experiment, run_record_header, ExperimentConfig, VariantConfig,
    SUMMARY_METRICS,
};
use revd_core::rewards::{RewardConfig, RewardVariant};

const SMALL: &str = r#"
seeds = [1, 2, 5]
log_every = 2

[env]
id = "chain-12"

[agent]
workers = 2
steps_per_episode = 16
total_env_steps = 320

[reward]
k = 3
embed_dim = 8
"#;

/// Rows of a CSV file keyed by column name, parsed as `f64`.
fn columns(path: &Path) -> Vec<HashMap<String, f64>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(str::to_string).collect();
    r.records()
        .map(|rec| header.iter().cloned().zip(rec.unwrap().iter().map(|v| v.parse::<f64>().unwrap_or(f64::NAN))).collect())
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn summary_is_recomputable_from_run_files() {
    let cfg = ExperimentConfig::parse(SMALL, &[]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&cfg, dir.path()).unwrap();
    assert!(report.failures().is_empty());

    let runs: Vec<_> = cfg.seeds.iter().map(|s| columns(&dir.path().join(format!("run_{s}.csv")))).collect();
    let summary = columns(&dir.path().join("summary.csv"));
    assert_eq!(summary.len(), 10);
    for (i, row) in summary.iter().enumerate() {
        assert_eq!(row["runs"], 3.0);
        assert_eq!(row["update"], i as f64);
        for m in SUMMARY_METRICS {
            let xs: Vec<f64> = runs.iter().map(|r| r[i][m]).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let std = (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64).sqrt();
            assert!(close(row[&format!("{m}_mean")], mean), "{m} mean at {i}");
            assert!(close(row[&format!("{m}_std")], std), "{m} std at {i}");
        }
    }
}

#[test]
fn experiment_writes_replayable_outputs() {
    let cfg = ExperimentConfig::parse(SMALL, &["reward.variant=\"re3\"".to_string()]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path()).unwrap();
    for f in ["config.toml", "events.jsonl", "summary.csv", "run_1.csv", "run_2.csv", "run_5.csv"] {
        assert!(dir.path().join(f).is_file(), "{f}");
    }
    let snapshot = ExperimentConfig::from_file(&dir.path().join("config.toml"), &[]).unwrap();
    assert_eq!(snapshot, cfg);

    let events = std::fs::read_to_string(dir.path().join("events.jsonl")).unwrap();
    let parsed: Vec<serde_json::Value> = events.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let count = |name: &str| parsed.iter().filter(|e| e["event"] == name).count();
    assert_eq!(count("run_start"), 3);
    assert_eq!(count("run_end"), 3);
    assert_eq!(count("update"), 3 * 5);

    let header = std::fs::read_to_string(dir.path().join("run_1.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap().split(',').collect::<Vec<_>>(), run_record_header().unwrap());
    assert!(!header.contains("elapsed"));
}

#[test]
fn comparison_files_are_ordered_and_consistent() {
    let cfg = ExperimentConfig::parse(SMALL, &[]).unwrap();
    let variants: Vec<VariantConfig> = [RewardVariant::None, RewardVariant::Revd, RewardVariant::Ride]
        .iter()
        .map(|&v| VariantConfig { name: v.name().into(), reward: RewardConfig { variant: v, ..cfg.reward.clone() } })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let report = compare_variants(&cfg, &variants, dir.path()).unwrap();
    assert!(report.failures().is_empty());

    let mut r = csv::Reader::from_path(dir.path().join("comparison.csv")).unwrap();
    let keys: Vec<(String, u64, u64)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[0].to_string(), rec[1].parse().unwrap(), rec[2].parse().unwrap())
        })
        .collect();
    assert_eq!(keys.len(), 3 * 3 * 10);
    let order = |name: &str| variants.iter().position(|v| v.name == name).unwrap();
    assert!(keys.windows(2).all(|w| (order(&w[0].0), w[0].1, w[0].2) < (order(&w[1].0), w[1].1, w[1].2)));

    let finals = columns(&dir.path().join("final_returns.csv"));
    for (v, row) in variants.iter().zip(&finals) {
        let per_seed: Vec<f64> = cfg
            .seeds
            .iter()
            .map(|s| final_return(&read_run_csv(&dir.path().join(&v.name).join(format!("run_{s}.csv"))).unwrap()))
            .collect();
        let mean = per_seed.iter().sum::<f64>() / 3.0;
        assert!(close(row["final_return_mean"], mean), "{}", v.name);
        assert_eq!(row["seeds"], 3.0);
        assert!(dir.path().join(&v.name).join("summary.csv").is_file());
    }
}

#[test]
fn parallel_seeds_match_single_seed_runs() {
    let cfg = ExperimentConfig::parse(SMALL, &[]).unwrap();
    let all = tempfile::tempdir().unwrap();
    run_experiment(&cfg, all.path()).unwrap();
    let one = tempfile::tempdir().unwrap();
    run_experiment(&ExperimentConfig { seeds: vec![2], ..cfg }, one.path()).unwrap();
    assert_eq!(std::fs::read(all.path().join("run_2.csv")).unwrap(), std::fs::read(one.path().join("run_2.csv")).unwrap());
}

#[test]
fn overrides_and_validation() {
    let cfg = ExperimentConfig::parse(SMALL, &["reward.alpha=0.7".into(), "agent.algo=\"a2c\"".into()]).unwrap();
    assert_eq!(cfg.reward.alpha, 0.7);
    assert!(cfg.agent.value_clip.is_none());
    assert!(ExperimentConfig::parse(SMALL, &["reward.alpha=1.0".into()]).is_err());
    assert!(ExperimentConfig::parse(SMALL, &["reward.beta=1".into()]).is_err());
    assert!(ExperimentConfig::parse(SMALL, &["seeds=[]".into()]).is_err());
    assert!(ExperimentConfig::parse("[env]\nid = \"maze-3\"\n", &[]).is_err());
    let defaults = ExperimentConfig::for_env("pointmaze-2d").unwrap();
    assert_eq!(defaults.reward.k, 3);
    assert_eq!(ExperimentConfig::for_env("fourroom-7").unwrap().reward.k, 5);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = ExperimentConfig::from_file(&path, &[]).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert!(!cfg.seeds.is_empty());
            seen += 1;
        }
    }
    assert!(seen >= 2);
}
