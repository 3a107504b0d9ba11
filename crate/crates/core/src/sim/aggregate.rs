use std::collections::BTreeMap;

use serde::Serialize;

use crate::baselines::StrategyId;
use crate::error::{Error, Result};
use crate::sim::slot::SlotMetrics;
use crate::warm_start::WarmStartKind;

type Metric = (&'static str, fn(&SlotMetrics) -> f64);

/// Columns summarized in `summary.csv`, each as `<name>_mean` and `<name>_std`.
pub const METRICS: &[Metric] = &[
    ("total_energy", |m| m.total_energy),
    ("comm_energy", |m| m.comm_energy),
    ("compute_energy", |m| m.compute_energy),
    ("hover_energy", |m| m.hover_energy),
    ("estimated_energy", |m| m.estimated_energy),
    ("actual_energy", |m| m.actual_energy),
    ("completion_time", |m| m.completion_time),
    ("utilization", |m| m.utilization),
    ("coalition_utility", |m| m.coalition_utility),
    ("mean_participant_utility", |m| m.mean_participant_utility),
    ("iterations", |m| m.iterations as f64),
    ("converged", |m| f64::from(u8::from(m.converged))),
    ("n_coalitions", |m| m.n_coalitions as f64),
    ("deadline_violated", |m| f64::from(u8::from(m.deadline_violated))),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single run.
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub strategy: StrategyId,
    pub warm_start: WarmStartKind,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub count: usize,
    /// One entry per [`METRICS`] column, same order.
    pub stats: Vec<Stat>,
}

impl SummaryRow {
    pub fn stat(&self, metric: &str) -> Option<Stat> {
        METRICS
            .iter()
            .position(|(name, _)| *name == metric)
            .map(|k| self.stats[k])
    }
}

pub fn mean_and_std(values: &[f64]) -> Stat {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Stat { mean, std }
}

/// Mean and sample standard deviation of every metric, grouped by strategy,
/// warm start and sweep point. Rows come out in sorted group order.
pub fn aggregate(runs: &[SlotMetrics]) -> Result<Vec<SummaryRow>> {
    if runs.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let mut groups: BTreeMap<(StrategyId, &str, &str, u64), Vec<&SlotMetrics>> = BTreeMap::new();
    for m in runs {
        let key = (
            m.strategy,
            m.warm_start.as_str(),
            m.sweep_param.as_str(),
            ordered_bits(m.sweep_value),
        );
        groups.entry(key).or_default().push(m);
    }
    Ok(groups
        .into_values()
        .map(|rows| {
            let first = rows[0];
            let stats = METRICS
                .iter()
                .map(|(_, get)| mean_and_std(&rows.iter().map(|m| get(m)).collect::<Vec<_>>()))
                .collect();
            SummaryRow {
                strategy: first.strategy,
                warm_start: first.warm_start,
                sweep_param: first.sweep_param.clone(),
                sweep_value: first.sweep_value,
                count: rows.len(),
                stats,
            }
        })
        .collect())
}

/// Bit pattern whose unsigned order matches the numeric order of `v`.
fn ordered_bits(v: f64) -> u64 {
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | 1 << 63
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(strategy: StrategyId, sweep: f64, energy: f64) -> SlotMetrics {
        SlotMetrics {
            seed: 0,
            slot: 0,
            strategy,
            warm_start: WarmStartKind::Cold,
            sweep_param: "n_uavs".into(),
            sweep_value: sweep,
            n_uavs: 5,
            total_energy: energy,
            comm_energy: 0.0,
            compute_energy: 0.0,
            hover_energy: 0.0,
            estimated_energy: 0.0,
            actual_energy: 0.0,
            completion_time: 0.0,
            utilization: 0.0,
            coalition_utility: 0.0,
            mean_participant_utility: 0.0,
            n_participants: 0,
            iterations: 0,
            converged: true,
            n_coalitions: 1,
            deadline_violated: false,
            warm_start_fallback: false,
        }
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(aggregate(&[]), Err(Error::EmptyAggregate)));
    }

    #[test]
    fn single_and_repeated_runs_have_zero_spread() {
        let one = aggregate(&[row(StrategyId::Nash, 5.0, 3.5)]).unwrap();
        assert_eq!(one[0].stat("total_energy").unwrap(), Stat { mean: 3.5, std: 0.0 });
        let two = aggregate(&[row(StrategyId::Nash, 5.0, 3.5), row(StrategyId::Nash, 5.0, 3.5)]).unwrap();
        assert_eq!(two[0].stat("total_energy").unwrap().std, 0.0);
        assert_eq!(two[0].count, 2);
    }

    #[test]
    fn known_triple() {
        let runs: Vec<_> = [1.0, 2.0, 3.0].iter().map(|e| row(StrategyId::Nash, 5.0, *e)).collect();
        let s = aggregate(&runs).unwrap()[0].stat("total_energy").unwrap();
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
    }

    #[test]
    fn groups_split_by_strategy_and_sweep_point() {
        let runs = vec![
            row(StrategyId::Nash, 10.0, 1.0),
            row(StrategyId::CoalitionGame, 10.0, 2.0),
            row(StrategyId::Nash, 5.0, 3.0),
        ];
        let rows = aggregate(&runs).unwrap();
        let keys: Vec<_> = rows.iter().map(|r| (r.strategy, r.sweep_value)).collect();
        assert_eq!(
            keys,
            vec![
                (StrategyId::CoalitionGame, 10.0),
                (StrategyId::Nash, 5.0),
                (StrategyId::Nash, 10.0)
            ]
        );
    }
}
