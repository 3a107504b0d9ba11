//! Digital-twin state for mobile edge devices (MEDs) and UAVs, and the
//! per-slot network snapshot the scheduler consumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link;
use crate::units::dbm_to_watts;

/// Cartesian position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Position(pub [f64; 3]);

impl Position {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Position([x, y, z])
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let [a, b, c] = self.0;
        let [x, y, z] = other.0;
        ((a - x).powi(2) + (b - y).powi(2) + (c - z).powi(2)).sqrt()
    }
}

/// Twin of the mobile edge device active in a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedTwin {
    pub position: Position,
    /// Bits requested for offloading this slot.
    pub task_size: f64,
    /// CPU cycles per bit.
    pub complexity: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Maximum tolerable latency in seconds.
    pub deadline: f64,
}

impl MedTwin {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidScenario(format!("MED {what}")));
        if !(self.task_size >= 0.0 && self.task_size.is_finite()) {
            return bad("task_size must be finite and >= 0");
        }
        if !(self.complexity > 0.0 && self.complexity.is_finite()) {
            return bad("complexity must be > 0");
        }
        if !(self.tx_power >= 0.0 && self.tx_power.is_finite()) {
            return bad("tx_power must be >= 0");
        }
        if !(self.deadline > 0.0 && self.deadline.is_finite()) {
            return bad("deadline must be > 0");
        }
        Ok(())
    }
}

/// Twin of one UAV edge server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UavTwin {
    pub position: Position,
    /// Hz.
    pub bandwidth_max: f64,
    /// Cycles per second.
    pub compute_max: f64,
    /// Bits.
    pub cache_max: f64,
    /// Watts (joules per second of hovering).
    pub hover_power: f64,
    /// Switched-capacitance coefficient, J·s²/cycle³.
    pub chip_coeff: f64,
}

impl UavTwin {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidScenario(format!("UAV {what}")));
        if !(self.bandwidth_max > 0.0 && self.bandwidth_max.is_finite()) {
            return bad("bandwidth_max must be > 0");
        }
        if !(self.compute_max > 0.0 && self.compute_max.is_finite()) {
            return bad("compute_max must be > 0");
        }
        if !(self.cache_max >= 0.0 && self.cache_max.is_finite()) {
            return bad("cache_max must be >= 0");
        }
        if !(self.hover_power >= 0.0 && self.hover_power.is_finite()) {
            return bad("hover_power must be >= 0");
        }
        if !(self.chip_coeff > 0.0 && self.chip_coeff.is_finite()) {
            return bad("chip_coeff must be > 0");
        }
        Ok(())
    }
}

/// Physical-layer constants shared by every link in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// Noise power in watts.
    pub noise: f64,
    /// Path-loss exponent.
    pub path_loss_exp: f64,
}

impl Channel {
    pub fn from_dbm(noise_dbm: f64, path_loss_exp: f64) -> Self {
        Channel {
            noise: dbm_to_watts(noise_dbm),
            path_loss_exp,
        }
    }
}

impl Default for Channel {
    fn default() -> Self {
        Channel::from_dbm(-110.0, 4.0)
    }
}

/// Weights of the coalition and participant utilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    /// MED satisfaction factor on the log revenue.
    pub satisfaction: f64,
    /// Weight of the transmission energy in the coalition utility.
    pub comm_penalty: f64,
    /// Weight of a participant's computing energy.
    pub compute_penalty: f64,
    /// Weight of a participant's hovering energy.
    pub hover_penalty: f64,
    /// Divisor applied to bits inside the log revenue (default: one Mbyte).
    #[serde(default = "default_log_unit")]
    pub log_unit_bits: f64,
}

fn default_log_unit() -> f64 {
    crate::units::BITS_PER_MBYTE
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            satisfaction: 10.0,
            comm_penalty: 1.0,
            compute_penalty: 0.01,
            hover_penalty: 0.01,
            log_unit_bits: default_log_unit(),
        }
    }
}

impl WeightConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.satisfaction,
            self.comm_penalty,
            self.compute_penalty,
            self.hover_penalty,
        ];
        if all.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidScenario("weights must be finite and >= 0".into()));
        }
        if !(self.log_unit_bits > 0.0) {
            return Err(Error::InvalidScenario("log_unit_bits must be > 0".into()));
        }
        Ok(())
    }
}

/// Snapshot of the network handed to the scheduler at the start of a slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    pub slot_index: u64,
    pub med: MedTwin,
    pub uavs: Vec<UavTwin>,
    /// MED-to-UAV capacity in bit/s at each UAV's full bandwidth.
    pub capacities: Vec<f64>,
    /// Bandwidth shared by a coalition, Hz.
    pub env_bandwidth: f64,
    pub channel: Channel,
}

impl NetworkState {
    pub fn n_uavs(&self) -> usize {
        self.uavs.len()
    }

    /// Spectral efficiency of the link to `uav` in bit/s/Hz; capacity is
    /// linear in the bandwidth handed out.
    pub fn spectral_efficiency(&self, uav: usize) -> f64 {
        self.capacities[uav] / self.uavs[uav].bandwidth_max
    }

    /// Capacity of the link to `uav` when it contributes `bandwidth` Hz.
    pub fn capacity_at(&self, uav: usize, bandwidth: f64) -> f64 {
        if bandwidth <= 0.0 {
            return 0.0;
        }
        self.spectral_efficiency(uav) * bandwidth
    }
}

/// Builds the slot snapshot, evaluating every MED-to-UAV link at the UAV's
/// full bandwidth.
pub fn snapshot(
    med: MedTwin,
    uavs: Vec<UavTwin>,
    env_bandwidth: f64,
    slot: u64,
    channel: Channel,
) -> Result<NetworkState> {
    if uavs.is_empty() {
        return Err(Error::InvalidScenario("no UAVs in snapshot".into()));
    }
    if !(env_bandwidth > 0.0 && env_bandwidth.is_finite()) {
        return Err(Error::InvalidScenario("env_bandwidth must be > 0".into()));
    }
    if !(channel.noise > 0.0) {
        return Err(Error::InvalidParameter("noise power must be > 0".into()));
    }
    med.validate()?;
    let capacities = uavs
        .iter()
        .map(|uav| {
            uav.validate()?;
            let d = med.position.distance(&uav.position);
            let gain_sq = link::channel_gain_sq(d, channel.path_loss_exp)?;
            link::capacity(uav.bandwidth_max, gain_sq, med.tx_power, channel.noise)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NetworkState {
        slot_index: slot,
        med,
        uavs,
        capacities,
        env_bandwidth,
        channel,
    })
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::units::{ghz, mbyte_to_bits, mhz};

    pub fn med_at(x: f64, y: f64) -> MedTwin {
        MedTwin {
            position: Position::new(x, y, 0.0),
            task_size: mbyte_to_bits(10.0),
            complexity: 100.0,
            tx_power: 0.1,
            deadline: 0.4,
        }
    }

    pub fn uav_at(x: f64, y: f64) -> UavTwin {
        UavTwin {
            position: Position::new(x, y, 800.0),
            bandwidth_max: mhz(1.0),
            compute_max: ghz(10.0),
            cache_max: mbyte_to_bits(2.0),
            hover_power: 168.0,
            chip_coeff: 1e-28,
        }
    }
}
