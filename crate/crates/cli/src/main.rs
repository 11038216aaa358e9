//! `revd`: train agents, compare intrinsic-reward variants, estimate
//! divergences between sample files, and run the invariant self-test.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use revd_core::harness::{
    compare_variants, estimate_files, run_experiment, run_selftest, ExperimentConfig, VariantConfig, OUTPUT_ROOT_ENV,
};
use revd_core::rewards::RewardVariant;

#[derive(Parser)]
#[command(name = "revd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one configuration over its seed list.
    Train(ExperimentArgs),
    /// Train several reward variants under paired seeds.
    Compare {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated variant names (revd, re3, re3_log, ride, none);
        /// overrides any [[variants]] in the config file.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<RewardVariant>,
    },
    /// Estimate the Rényi divergence between two CSV sample files (one point per row).
    Estimate {
        x: PathBuf,
        y: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 5)]
        k: usize,
        /// Print a JSON object instead of plain text.
        #[arg(long)]
        json: bool,
    },
    /// Run the fast invariant suite.
    Selftest,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Environment id when no config file is given (e.g. fourroom-15).
    #[arg(long)]
    env: Option<String>,
    /// Override a config key, e.g. `--set reward.alpha=0.7` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    /// Output directory; relative paths resolve against the output root.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Root for relative output directories.
    #[arg(long, env = OUTPUT_ROOT_ENV)]
    output_root: Option<PathBuf>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut overrides = self.overrides.clone();
        if !self.seeds.is_empty() {
            let list: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
            overrides.push(format!("seeds=[{}]", list.join(",")));
        }
        if let Some(out) = &self.output {
            overrides.push(format!("output_dir={:?}", out.display().to_string()));
        }
        let cfg = match (&self.config, &self.env) {
            (Some(path), None) => ExperimentConfig::from_file(path, &overrides)
                .with_context(|| format!("loading {}", path.display()))?,
            (None, Some(env)) => {
                let text = format!("[env]\nid = {env:?}\n");
                ExperimentConfig::parse(&text, &overrides)?
            }
            (Some(_), Some(_)) => bail!("use either --config or --env, not both"),
            (None, None) => bail!("one of --config or --env is required"),
        };
        Ok(cfg)
    }

    fn output_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        cfg.resolved_output_dir(self.output_root.as_deref())
    }
}

fn train(args: &ExperimentArgs) -> Result<bool> {
    let cfg = args.load()?;
    let dir = args.output_dir(&cfg);
    let report = run_experiment(&cfg, &dir)?;
    for (seed, records) in report.succeeded() {
        let last = records.last();
        println!(
            "seed {seed}: {} updates, final mean return {:.4}, goal reached {} times",
            records.len(),
            revd_core::harness::final_return(records),
            last.map_or(0, |r| r.successes)
        );
    }
    let failures = report.failures();
    for (seed, err) in &failures {
        eprintln!("seed {seed} failed: {err}");
    }
    println!("outputs written to {}", dir.display());
    Ok(failures.is_empty())
}

fn compare(args: &ExperimentArgs, names: &[RewardVariant]) -> Result<bool> {
    let cfg = args.load()?;
    let variants: Vec<VariantConfig> = if names.is_empty() {
        cfg.variants.clone()
    } else {
        names
            .iter()
            .map(|&v| VariantConfig { name: v.name().to_string(), reward: revd_core::rewards::RewardConfig { variant: v, ..cfg.reward.clone() } })
            .collect()
    };
    if variants.is_empty() {
        bail!("no variants given: pass --variants or add [[variants]] to the config");
    }
    let dir = args.output_dir(&cfg);
    let report = compare_variants(&cfg, &variants, &dir)?;
    println!("{:<12} {:>6} {:>14} {:>14} {:>10}", "variant", "seeds", "final_mean", "final_std", "goal_seeds");
    for s in &report.summaries {
        println!(
            "{:<12} {:>6} {:>14.6} {:>14.6} {:>10}",
            s.name, s.seeds, s.final_return_mean, s.final_return_std, s.goal_seeds
        );
    }
    let failures = report.failures();
    for (variant, seed, err) in &failures {
        eprintln!("{variant} seed {seed} failed: {err}");
    }
    println!("outputs written to {}", dir.display());
    Ok(failures.is_empty())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Train(args) => train(&args),
        Command::Compare { exp, variants } => compare(&exp, &variants),
        Command::Estimate { x, y, alpha, k, json } => {
            let report = estimate_files(&x, &y, alpha, k)?;
            if json {
                println!("{}", serde_json::to_string(&report)?);
            } else {
                println!("{}", report.estimate);
                if report.guarded > 0 {
                    eprintln!("warning: {} zero neighbor distances were guarded", report.guarded);
                }
            }
            Ok(true)
        }
        Command::Selftest => {
            let results = run_selftest();
            for c in &results {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            Ok(results.iter().all(|c| c.passed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
