//! Channel, delay and energy models for MED-to-UAV offloading.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::twin::{Channel, MedTwin, UavTwin};

/// Squared channel gain `d^-gamma`.
pub fn channel_gain_sq(distance: f64, gamma: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::DegenerateGeometry(distance));
    }
    Ok(distance.powf(-gamma))
}

/// Shannon capacity in bit/s: `b * log2(1 + gain_sq * p_tr / noise)`.
pub fn capacity(bandwidth: f64, gain_sq: f64, tx_power: f64, noise: f64) -> Result<f64> {
    if !(noise > 0.0) {
        return Err(Error::InvalidParameter(format!("noise power {noise} must be > 0")));
    }
    if bandwidth < 0.0 || gain_sq < 0.0 || tx_power < 0.0 {
        return Err(Error::InvalidParameter(
            "bandwidth, gain and power must be >= 0".into(),
        ));
    }
    Ok(bandwidth * (gain_sq * tx_power / noise).ln_1p() / std::f64::consts::LN_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub gain_sq: f64,
    pub snr: f64,
    pub capacity: f64,
}

impl LinkBudget {
    pub fn evaluate(med: &MedTwin, uav: &UavTwin, bandwidth: f64, channel: &Channel) -> Result<Self> {
        let gain_sq = channel_gain_sq(med.position.distance(&uav.position), channel.path_loss_exp)?;
        let capacity = capacity(bandwidth, gain_sq, med.tx_power, channel.noise)?;
        Ok(LinkBudget {
            gain_sq,
            snr: gain_sq * med.tx_power / channel.noise,
            capacity,
        })
    }
}

/// Transmission and computing delay of a share of `bits`.
pub fn delays(bits: f64, capacity: f64, complexity: f64, frequency: f64) -> Result<(f64, f64)> {
    if bits <= 0.0 {
        return Ok((0.0, 0.0));
    }
    if !(capacity > 0.0) {
        return Err(Error::UnreachableUav { bits });
    }
    if !(frequency > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "frequency must be > 0 to process {bits} bits"
        )));
    }
    Ok((bits / capacity, complexity * bits / frequency))
}

/// One coalition member's load with its link capacity already resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkLoad {
    pub share: f64,
    pub capacity: f64,
    pub frequency: f64,
    pub hover_power: f64,
    pub chip_coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MemberEnergy {
    pub transmit_time: f64,
    pub compute_time: f64,
    pub comm: f64,
    pub compute: f64,
    pub hover: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub comm: f64,
    pub compute: f64,
    pub hover: f64,
    pub total: f64,
    pub completion_time: f64,
    pub members: Vec<MemberEnergy>,
}

impl EnergyBreakdown {
    /// Assembles the coalition totals from per-member terms. Every member
    /// hovers for the coalition completion time.
    pub(crate) fn assemble(mut members: Vec<MemberEnergy>, hover_powers: &[f64]) -> Self {
        let completion_time = members
            .iter()
            .map(|m| m.transmit_time + m.compute_time)
            .fold(0.0, f64::max);
        for (m, p_h) in members.iter_mut().zip(hover_powers) {
            m.hover = p_h * completion_time;
        }
        let comm = members.iter().map(|m| m.comm).sum::<f64>();
        let compute = members.iter().map(|m| m.compute).sum::<f64>();
        let hover = members.iter().map(|m| m.hover).sum::<f64>();
        EnergyBreakdown {
            comm,
            compute,
            hover,
            total: comm + compute + hover,
            completion_time,
            members,
        }
    }
}

/// Energy of a coalition serving `med` given per-member links.
pub fn energy_from_links(loads: &[LinkLoad], med: &MedTwin) -> Result<EnergyBreakdown> {
    let mut members = Vec::with_capacity(loads.len());
    for load in loads {
        let (t_tr, t_cp) = delays(load.share, load.capacity, med.complexity, load.frequency)?;
        members.push(MemberEnergy {
            transmit_time: t_tr,
            compute_time: t_cp,
            comm: med.tx_power * t_tr,
            // p_cp * T_cp with p_cp = eps * f^3.
            compute: if load.share > 0.0 {
                load.chip_coeff * load.frequency.powi(3) * t_cp
            } else {
                0.0
            },
            hover: 0.0,
        });
    }
    let hover_powers: Vec<f64> = loads.iter().map(|l| l.hover_power).collect();
    Ok(EnergyBreakdown::assemble(members, &hover_powers))
}

/// A member given as `(uav, share bits, bandwidth Hz, frequency cycles/s)`.
pub type MemberAssignment<'a> = (&'a UavTwin, f64, f64, f64);

/// Energy of a coalition, resolving each link's capacity from geometry.
pub fn coalition_energy(
    members: &[MemberAssignment<'_>],
    med: &MedTwin,
    channel: &Channel,
) -> Result<EnergyBreakdown> {
    let loads = members
        .iter()
        .map(|&(uav, share, bandwidth, frequency)| {
            let budget = LinkBudget::evaluate(med, uav, bandwidth, channel)?;
            Ok(LinkLoad {
                share,
                capacity: budget.capacity,
                frequency,
                hover_power: uav.hover_power,
                chip_coeff: uav.chip_coeff,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    energy_from_links(&loads, med)
}
