use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use aerial_mec::sim::output::write_outputs;
use aerial_mec::sim::vectors::oracle_vectors;
use aerial_mec::sim::{build_dataset, run, run_many, sweep_jobs, ScenarioConfig, SweepParam};
use aerial_mec::warm_start::append_records;
use aerial_mec::{StrategyId, WarmStartKind, WarmStartProvider};

#[derive(Parser)]
#[command(name = "aerial-mec", version, about = "Coalition-based task assignment simulator for aerial MEC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write metrics, summary and metadata.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        strategy: Option<StrategyId>,
    },
    /// Vary one parameter over a list of values, across seeds and strategies.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary: n_uavs, complexity, deadline_ms, task_size_mbyte,
        /// env_bandwidth or fidelity_delta.
        #[arg(long)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Number of consecutive seeds starting at the base seed.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        /// Strategies to run; all of them when omitted.
        #[arg(long, value_delimiter = ',')]
        strategy: Vec<StrategyId>,
    },
    /// Regenerate solver test vectors (small instances with grid optima).
    Oracle {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 24)]
        count: usize,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Output JSON file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a strategy dataset for replay warm starts.
    Record {
        #[command(flatten)]
        common: Common,
        /// Number of consecutive seeds starting at the base seed.
        #[arg(long, default_value_t = 10)]
        seeds: u64,
    },
}

#[derive(Args)]
struct Common {
    /// JSON scenario configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    warm_start: Option<WarmStartKind>,
    /// Strategy dataset used by replay warm starts.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Output directory (file for `record`).
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    fidelity_delta: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(slots) = self.slots {
            cfg.n_slots = slots;
        }
        if let Some(delta) = self.fidelity_delta {
            cfg.fidelity_delta = delta;
        }
        let dataset = self.dataset.clone().or_else(|| cfg.warm_start.dataset_path.clone());
        let kind = self.warm_start.unwrap_or(cfg.warm_start.kind);
        if kind == WarmStartKind::Replay && dataset.is_none() {
            bail!("replay warm start needs --dataset or warm_start.dataset_path");
        }
        cfg.warm_start = WarmStartProvider::new(kind, dataset);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Run { common, strategy } => {
            let mut cfg = common.resolve()?;
            if let Some(s) = strategy {
                cfg.strategy = s;
            }
            let rows = run(&cfg, None)?;
            write_outputs(&common.out, &cfg, &rows, json!({ "command": "run" }))?;
            log::info!("wrote {} rows to {}", rows.len(), common.out.display());
        }
        Command::Sweep {
            common,
            param,
            values,
            seeds,
            strategy,
        } => {
            let cfg = common.resolve()?;
            let strategies = if strategy.is_empty() {
                StrategyId::ALL.to_vec()
            } else {
                strategy
            };
            let seed_list: Vec<u64> = (0..seeds).map(|k| cfg.seed + k).collect();
            let jobs = sweep_jobs(&cfg, param, &values, &seed_list, &strategies)?;
            let rows = run_many(&jobs)?;
            let extra = json!({
                "command": "sweep",
                "param": param,
                "values": values,
                "seeds": seed_list,
                "strategies": strategies,
            });
            write_outputs(&common.out, &cfg, &rows, extra)?;
        }
        Command::Oracle {
            seed,
            count,
            points,
            out,
        } => {
            let vectors = oracle_vectors(seed, count, points)?;
            write_file(&out, serde_json::to_string_pretty(&vectors)? + "\n")?;
        }
        Command::Record { common, seeds } => {
            let cfg = common.resolve()?;
            let mut total = 0;
            for k in 0..seeds {
                let records = build_dataset(&ScenarioConfig {
                    seed: cfg.seed + k,
                    ..cfg.clone()
                })?;
                append_records(&common.out, &records)?;
                total += records.len();
            }
            println!("appended {total} records to {}", common.out.display());
        }
    }
    Ok(())
}

fn write_file(path: &Path, text: String) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
