//! Seeded solver test vectors: small instances with their grid-oracle optimum.

use serde::{Deserialize, Serialize};

use crate::allocator::{grid_oracle, solve_f3, GridOracleConfig, DEFAULT_TOL};
use crate::error::Result;
use crate::sim::scenario::{generate_scenario, ScenarioConfig};
use crate::twin::{NetworkState, WeightConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVector {
    pub state: NetworkState,
    pub weights: WeightConfig,
    pub points_per_axis: usize,
    pub oracle_objective: f64,
    pub solver_objective: f64,
}

/// `count` instances with 1 to 3 UAVs drawn from the nominal ranges, each
/// paired with the grid optimum over all of its UAVs.
pub fn oracle_vectors(seed: u64, count: usize, points_per_axis: usize) -> Result<Vec<OracleVector>> {
    let weights = WeightConfig::default();
    let cfg = GridOracleConfig {
        points_per_axis,
        max_members: 3,
    };
    (0..count)
        .map(|k| {
            let scenario = ScenarioConfig {
                n_uavs: 1 + k % 3,
                n_slots: 1,
                seed: seed.wrapping_add(k as u64),
                weights,
                ..Default::default()
            };
            let state = generate_scenario(&scenario)?.next().expect("one slot")?;
            let members: Vec<usize> = (0..state.n_uavs()).collect();
            Ok(OracleVector {
                oracle_objective: grid_oracle(&members, &state, &weights, &cfg)?,
                solver_objective: solve_f3(&members, &state, &weights, DEFAULT_TOL)?.coalition_utility,
                state,
                weights,
                points_per_axis,
            })
        })
        .collect()
}
