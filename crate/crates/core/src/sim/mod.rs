//! Slot-level simulation: scenario sampling, strategy dispatch, fidelity
//! analysis, aggregation and file output.

pub mod aggregate;
pub mod fidelity;
pub mod output;
pub mod runner;
pub mod scenario;
pub mod slot;
pub mod vectors;

pub use aggregate::{aggregate, SummaryRow};
pub use fidelity::{apply_fidelity, FidelityOutcome};
pub use runner::{build_dataset, run, run_many, sweep_jobs, Job, SweepParam, SweepPoint};
pub use scenario::{generate_scenario, ScenarioConfig, ScenarioStream, Span};
pub use slot::{run_slot, SlotMetrics};
