use serde::{Deserialize, Serialize};

use crate::allocator::max_violation;
use crate::baselines::{grand_coalition, nash_equilibrium, NashLimits, StrategyId};
use crate::engine::{stabilize, Game, Partition, StabilizeLimits};
use crate::error::{Error, Result};
use crate::sim::fidelity::apply_fidelity;
use crate::sim::scenario::ScenarioConfig;
use crate::twin::NetworkState;
use crate::warm_start::{WarmStartKind, WarmStartProvider};

/// One row of `metrics.csv`: what one strategy did in one slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotMetrics {
    pub seed: u64,
    pub slot: u64,
    pub strategy: StrategyId,
    pub warm_start: WarmStartKind,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub n_uavs: usize,
    /// Joules, as planned by the twins.
    pub total_energy: f64,
    pub comm_energy: f64,
    pub compute_energy: f64,
    pub hover_energy: f64,
    pub estimated_energy: f64,
    /// Joules, with the physical frequency deviation applied.
    pub actual_energy: f64,
    /// Seconds.
    pub completion_time: f64,
    pub utilization: f64,
    pub coalition_utility: f64,
    pub mean_participant_utility: f64,
    pub n_participants: usize,
    pub iterations: usize,
    pub converged: bool,
    pub n_coalitions: usize,
    pub deadline_violated: bool,
    pub warm_start_fallback: bool,
}

/// Strategy outcome before metrics are derived.
#[derive(Debug, Clone)]
pub struct SlotDecision {
    pub partition: Partition,
    pub iterations: usize,
    pub converged: bool,
    pub warm_start_fallback: bool,
}

pub fn decide(state: &NetworkState, config: &ScenarioConfig, provider: &WarmStartProvider) -> Result<SlotDecision> {
    match config.strategy {
        StrategyId::CoalitionGame => {
            let game = Game::new(state, &config.weights);
            let proposal = provider.propose(state);
            let start = game.evaluate(proposal.grouping, 0)?;
            let limits = StabilizeLimits {
                max_rounds: config.max_rounds,
            };
            let report = stabilize(&game, start, limits)?;
            Ok(SlotDecision {
                partition: report.final_partition,
                iterations: report.iterations,
                converged: report.converged,
                warm_start_fallback: proposal.fell_back,
            })
        }
        StrategyId::GrandCoalition => Ok(SlotDecision {
            partition: grand_coalition(state, &config.weights)?,
            iterations: 0,
            converged: true,
            warm_start_fallback: false,
        }),
        StrategyId::Nash => {
            let out = nash_equilibrium(state, &config.weights, NashLimits::default())?;
            Ok(SlotDecision {
                partition: out.partition,
                iterations: out.rounds,
                converged: out.converged,
                warm_start_fallback: false,
            })
        }
    }
}

/// Runs the configured strategy on one snapshot and derives its metrics.
/// Only coalitions holding work count towards energy, utility and
/// utilization; their members are the participants.
pub fn run_slot(
    state: &NetworkState,
    config: &ScenarioConfig,
    provider: &WarmStartProvider,
) -> Result<SlotMetrics> {
    let decision = decide(state, config, provider)?;
    let partition = &decision.partition;

    let mut m = SlotMetrics {
        seed: config.seed,
        slot: state.slot_index,
        strategy: config.strategy,
        warm_start: provider.kind,
        sweep_param: String::new(),
        sweep_value: 0.0,
        n_uavs: state.n_uavs(),
        total_energy: 0.0,
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
        iterations: decision.iterations,
        converged: decision.converged,
        n_coalitions: partition.coalitions.len(),
        deadline_violated: false,
        warm_start_fallback: decision.warm_start_fallback,
    };

    let mut used = 0.0;
    let mut available = 0.0;
    let mut utility_sum = 0.0;
    for allocation in partition.allocations.iter().filter(|a| a.is_active()) {
        let violation = max_violation(allocation, state);
        if violation > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "infeasible allocation for {:?} (residual {violation:e})",
                allocation.members
            )));
        }
        let e = &allocation.energy;
        m.total_energy += e.total;
        m.comm_energy += e.comm;
        m.compute_energy += e.compute;
        m.hover_energy += e.hover;
        m.completion_time = m.completion_time.max(e.completion_time);
        m.coalition_utility += allocation.coalition_utility;
        let fid = apply_fidelity(allocation, state, config.fidelity_delta)?;
        m.estimated_energy += fid.estimated.total;
        m.actual_energy += fid.actual.total;
        m.deadline_violated |= fid.deadline_violated;
        for (k, &j) in allocation.members.iter().enumerate() {
            m.n_participants += 1;
            utility_sum += allocation.participant_utilities[k];
            if allocation.shares[k] > 0.0 {
                used += allocation.frequencies[k];
                available += state.uavs[j].compute_max;
            }
        }
    }
    if m.n_participants > 0 {
        m.mean_participant_utility = utility_sum / m.n_participants as f64;
    }
    if available > 0.0 {
        m.utilization = (used / available).min(1.0);
    }
    Ok(m)
}
