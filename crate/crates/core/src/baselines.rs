//! Reference strategies to compare coalition formation against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::allocator::{finalize, member_cap, AllocationResult};
use crate::engine::Partition;
use crate::error::{Error, Result};
use crate::twin::{NetworkState, WeightConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyId {
    CoalitionGame,
    GrandCoalition,
    Nash,
}

impl StrategyId {
    pub const ALL: [StrategyId; 3] = [
        StrategyId::CoalitionGame,
        StrategyId::GrandCoalition,
        StrategyId::Nash,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyId::CoalitionGame => "coalition_game",
            StrategyId::GrandCoalition => "grand_coalition",
            StrategyId::Nash => "nash",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy `{s}`")))
    }
}

/// All UAVs serve together; the task and the shared bandwidth are split
/// evenly, each share clipped to what its UAV can take at its bandwidth.
pub fn grand_coalition(state: &NetworkState, weights: &WeightConfig) -> Result<Partition> {
    let n = state.n_uavs();
    let members: Vec<usize> = (0..n).collect();
    let even_band = state.env_bandwidth / n as f64;
    let even_task = state.med.task_size / n as f64;
    let bandwidths: Vec<f64> = members
        .iter()
        .map(|&j| state.uavs[j].bandwidth_max.min(even_band))
        .collect();
    let shares: Vec<f64> = members
        .iter()
        .zip(&bandwidths)
        .map(|(&j, &b)| even_task.min(member_cap(state, j, b)))
        .collect();
    let allocation = finalize(&members, shares, bandwidths, state, weights)?;
    let serving = allocation.is_active().then_some(0);
    Ok(Partition {
        coalitions: vec![members],
        allocations: vec![allocation],
        serving,
        generation: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashLimits {
    pub max_rounds: usize,
    /// Stop once no share moves by more than this fraction of the task.
    pub tol: f64,
}

impl Default for NashLimits {
    fn default() -> Self {
        NashLimits {
            max_rounds: 100,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashOutcome {
    /// Singletons; each UAV's allocation is its own best response.
    pub partition: Partition,
    pub rounds: usize,
    pub converged: bool,
}

/// Utility a UAV gets serving `share` bits alone on `bandwidth` Hz.
pub fn solo_utility(state: &NetworkState, weights: &WeightConfig, uav: usize, share: f64, bandwidth: f64) -> Result<f64> {
    Ok(solo_allocation(state, weights, uav, share, bandwidth)?.participant_utilities[0])
}

fn solo_allocation(
    state: &NetworkState,
    weights: &WeightConfig,
    uav: usize,
    share: f64,
    bandwidth: f64,
) -> Result<AllocationResult> {
    let (s, b) = if share > 0.0 { (share, bandwidth) } else { (0.0, 0.0) };
    finalize(&[uav], vec![s], vec![b], state, weights)
}

/// Best share for `uav` on `bandwidth` Hz with at most `room` bits of task
/// left, or zero when serving does not pay.
pub fn best_response(
    state: &NetworkState,
    weights: &WeightConfig,
    uav: usize,
    bandwidth: f64,
    room: f64,
) -> Result<f64> {
    let top = member_cap(state, uav, bandwidth).min(room);
    if !(top > 0.0) {
        return Ok(0.0);
    }
    let eval = |s: f64| solo_utility(state, weights, uav, s, bandwidth);
    // Coarse scan, then golden-section refinement around the best sample.
    const SAMPLES: usize = 64;
    let step = top / SAMPLES as f64;
    let mut best = (top, eval(top)?);
    for i in 1..SAMPLES {
        let s = step * i as f64;
        let u = eval(s)?;
        if u > best.1 {
            best = (s, u);
        }
    }
    let (mut a, mut z) = ((best.0 - step).max(0.0), (best.0 + step).min(top));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let x1 = z - ratio * (z - a);
        let x2 = a + ratio * (z - a);
        if eval(x1)? >= eval(x2)? {
            z = x2;
        } else {
            a = x1;
        }
    }
    let mid = 0.5 * (a + z);
    if mid > 0.0 {
        let u = eval(mid)?;
        if u > best.1 {
            best = (mid, u);
        }
    }
    Ok(if best.1 > 0.0 { best.0 } else { 0.0 })
}

/// Non-cooperative play: every UAV serves alone, taking the bandwidth and
/// task the others leave over, and best-responds in index order until no
/// share changes. UAVs that sit out release their bandwidth.
pub fn nash_equilibrium(state: &NetworkState, weights: &WeightConfig, limits: NashLimits) -> Result<NashOutcome> {
    let n = state.n_uavs();
    let task = state.med.task_size;
    let mut shares = vec![0.0; n];
    let mut bandwidths = vec![0.0; n];
    let mut rounds = 0;
    let mut converged = false;
    while rounds < limits.max_rounds {
        rounds += 1;
        let mut moved: f64 = 0.0;
        for j in 0..n {
            let others_b: f64 = (0..n).filter(|&k| k != j).map(|k| bandwidths[k]).sum();
            let others_s: f64 = (0..n).filter(|&k| k != j).map(|k| shares[k]).sum();
            let b = state.uavs[j]
                .bandwidth_max
                .min(state.env_bandwidth - others_b)
                .max(0.0);
            let room = (task - others_s).max(0.0);
            let s = best_response(state, weights, j, b, room)?;
            moved = moved.max((s - shares[j]).abs());
            shares[j] = s;
            bandwidths[j] = if s > 0.0 { b } else { 0.0 };
        }
        if moved <= limits.tol * task.max(1.0) {
            converged = true;
            break;
        }
    }
    if !converged {
        log::debug!("best-response play stopped after {rounds} rounds");
    }
    let allocations = (0..n)
        .map(|j| solo_allocation(state, weights, j, shares[j], bandwidths[j]))
        .collect::<Result<Vec<_>>>()?;
    Ok(NashOutcome {
        partition: Partition {
            coalitions: (0..n).map(|j| vec![j]).collect(),
            allocations,
            serving: None,
            generation: 0,
        },
        rounds,
        converged,
    })
}
