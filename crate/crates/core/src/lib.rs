//! Digital-twin driven task assignment for aerial mobile edge computing.
//!
//! A slot's network snapshot ([`twin::NetworkState`]) feeds a coalition
//! formation game among UAVs: coalitions solve a convex resource allocation
//! ([`allocator::solve_f3`]), then merge and split until no Pareto-improving
//! move remains ([`engine::stabilize`]). Baseline strategies, warm starts and
//! a slot-level simulator with fidelity analysis sit on top.

pub mod allocator;
pub mod baselines;
pub mod engine;
pub mod error;
pub mod link;
pub mod sim;
pub mod twin;
pub mod units;
pub mod warm_start;

pub use allocator::{solve_f3, AllocationResult, GridOracleConfig};
pub use baselines::StrategyId;
pub use engine::{stabilize, Partition, StabilizationReport, StabilizeLimits};
pub use error::{Error, Result};
pub use link::EnergyBreakdown;
pub use twin::{snapshot, Channel, MedTwin, NetworkState, Position, UavTwin, WeightConfig};
pub use warm_start::{StrategyRecord, WarmStartKind, WarmStartProvider};
