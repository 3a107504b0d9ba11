//! Energy when the physical UAVs compute at a different speed than their
//! twins predicted.

use crate::allocator::AllocationResult;
use crate::error::{Error, Result};
use crate::link::{EnergyBreakdown, MemberEnergy};
use crate::twin::NetworkState;

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityOutcome {
    pub estimated: EnergyBreakdown,
    pub actual: EnergyBreakdown,
    /// Some member finished after the deadline.
    pub deadline_violated: bool,
}

/// `1 - |delta / (1 + delta)|`: agreement between the twin's frequency and
/// the actual one `f (1 + delta)`.
pub fn fidelity(delta: f64) -> f64 {
    1.0 - (delta / (1.0 + delta)).abs()
}

/// Re-costs `allocation` with every member's actual frequency `f (1 + delta)`.
/// Transmission is unchanged; computing power stays at its planned level while
/// the computing time stretches or shrinks, and the coalition hovers until
/// the actual completion.
pub fn apply_fidelity(allocation: &AllocationResult, state: &NetworkState, delta: f64) -> Result<FidelityOutcome> {
    if !(delta > -1.0) {
        return Err(Error::InvalidParameter(format!("fidelity delta {delta} must be > -1")));
    }
    let estimated = allocation.energy.clone();
    let med = &state.med;
    let mut members = Vec::with_capacity(allocation.members.len());
    let mut hover_powers = Vec::with_capacity(allocation.members.len());
    for (k, &j) in allocation.members.iter().enumerate() {
        let uav = &state.uavs[j];
        let planned = &estimated.members[k];
        let (s, f) = (allocation.shares[k], allocation.frequencies[k]);
        let mut m = MemberEnergy {
            transmit_time: planned.transmit_time,
            comm: planned.comm,
            ..Default::default()
        };
        if s > 0.0 {
            let actual_f = f * (1.0 + delta);
            m.compute_time = med.complexity * s / actual_f;
            m.compute = uav.chip_coeff * f.powi(3) * m.compute_time;
        }
        members.push(m);
        hover_powers.push(uav.hover_power);
    }
    let actual = EnergyBreakdown::assemble(members, &hover_powers);
    let deadline_violated = actual.completion_time > med.deadline * (1.0 + 1e-9);
    Ok(FidelityOutcome {
        estimated,
        actual,
        deadline_violated,
    })
}
