use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::StrategyId;
use crate::engine::{stabilize, Game, Grouping, StabilizeLimits};
use crate::error::{Error, Result};
use crate::sim::scenario::{generate_scenario, ScenarioConfig, Span};
use crate::sim::slot::{run_slot, SlotMetrics};
use crate::warm_start::{make_record, StrategyRecord};

/// Config field a sweep varies. Range-valued fields are pinned to the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    NUavs,
    Complexity,
    DeadlineMs,
    TaskSizeMbyte,
    EnvBandwidth,
    FidelityDelta,
}

impl SweepParam {
    const ALL: [SweepParam; 6] = [
        SweepParam::NUavs,
        SweepParam::Complexity,
        SweepParam::DeadlineMs,
        SweepParam::TaskSizeMbyte,
        SweepParam::EnvBandwidth,
        SweepParam::FidelityDelta,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::NUavs => "n_uavs",
            SweepParam::Complexity => "complexity",
            SweepParam::DeadlineMs => "deadline_ms",
            SweepParam::TaskSizeMbyte => "task_size_mbyte",
            SweepParam::EnvBandwidth => "env_bandwidth",
            SweepParam::FidelityDelta => "fidelity_delta",
        }
    }

    pub fn apply(self, config: &mut ScenarioConfig, value: f64) -> Result<()> {
        match self {
            SweepParam::NUavs => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::InvalidParameter(format!("n_uavs {value} is not a count")));
                }
                config.n_uavs = value as usize;
            }
            SweepParam::Complexity => config.complexity = Span::fixed(value),
            SweepParam::DeadlineMs => config.deadline_ms = Span::fixed(value),
            SweepParam::TaskSizeMbyte => config.task_size_mbyte = Span::fixed(value),
            SweepParam::EnvBandwidth => config.env_bandwidth = value,
            SweepParam::FidelityDelta => config.fidelity_delta = value,
        }
        Ok(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParam::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown sweep parameter `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: SweepParam,
    pub value: f64,
}

/// One simulation run: a resolved config and the sweep point it belongs to.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: ScenarioConfig,
    pub sweep: Option<SweepPoint>,
}

/// Runs every slot of `config` sequentially and tags the rows with `sweep`.
pub fn run(config: &ScenarioConfig, sweep: Option<SweepPoint>) -> Result<Vec<SlotMetrics>> {
    let provider = config.warm_start.clone().load()?;
    let mut rows = Vec::with_capacity(config.n_slots);
    for state in generate_scenario(config)? {
        let mut m = run_slot(&state?, config, &provider)?;
        if let Some(p) = sweep {
            m.sweep_param = p.param.to_string();
            m.sweep_value = p.value;
        }
        rows.push(m);
    }
    Ok(rows)
}

/// Runs jobs in parallel; rows come back in job order.
pub fn run_many(jobs: &[Job]) -> Result<Vec<SlotMetrics>> {
    let per_job = jobs
        .par_iter()
        .map(|job| run(&job.config, job.sweep))
        .collect::<Result<Vec<_>>>()?;
    Ok(per_job.into_iter().flatten().collect())
}

/// Every combination of sweep value, seed and strategy, in that nesting order.
pub fn sweep_jobs(
    base: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    seeds: &[u64],
    strategies: &[StrategyId],
) -> Result<Vec<Job>> {
    let mut jobs = Vec::with_capacity(values.len() * seeds.len() * strategies.len());
    for &value in values {
        let mut at = base.clone();
        param.apply(&mut at, value)?;
        for &seed in seeds {
            for &strategy in strategies {
                jobs.push(Job {
                    config: ScenarioConfig {
                        seed,
                        strategy,
                        ..at.clone()
                    },
                    sweep: Some(SweepPoint { param, value }),
                });
            }
        }
    }
    Ok(jobs)
}

/// Stabilizes every slot of `config` from singletons and records the stable
/// structures.
pub fn build_dataset(config: &ScenarioConfig) -> Result<Vec<StrategyRecord>> {
    let states = generate_scenario(config)?.collect::<Result<Vec<_>>>()?;
    let limits = StabilizeLimits {
        max_rounds: config.max_rounds,
    };
    let records: Vec<Option<StrategyRecord>> = states
        .par_iter()
        .map(|state| {
            let game = Game::new(state, &config.weights);
            let start = game.evaluate(Grouping::singletons(state.n_uavs()), 0)?;
            let report = stabilize(&game, start, limits)?;
            if report.converged {
                make_record(state, &report).map(Some)
            } else {
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    Ok(records.into_iter().flatten().collect())
}
