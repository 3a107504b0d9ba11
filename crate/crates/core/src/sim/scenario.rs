use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::baselines::StrategyId;
use crate::error::{Error, Result};
use crate::twin::{snapshot, Channel, MedTwin, NetworkState, Position, UavTwin, WeightConfig};
use crate::units::{dbm_to_watts, ghz, mbyte_to_bits, mhz};
use crate::warm_start::WarmStartProvider;

/// Closed interval `[lo, hi]` sampled uniformly; written as a two-element
/// array in config files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Span(pub f64, pub f64);

impl Span {
    pub fn fixed(v: f64) -> Self {
        Span(v, v)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.0 + self.1)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.0 == self.1 {
            self.0
        } else {
            rng.gen_range(self.0..=self.1)
        }
    }

    fn check(&self, name: &str, positive: bool) -> Result<()> {
        let ok = self.0.is_finite()
            && self.1.is_finite()
            && self.0 <= self.1
            && if positive { self.0 > 0.0 } else { self.0 >= 0.0 };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidScenario(format!(
                "{name} range [{}, {}] is invalid",
                self.0, self.1
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub n_uavs: usize,
    pub n_slots: usize,
    /// Seconds.
    pub slot_duration: f64,
    /// Side of the square deployment area, meters.
    pub area_side: f64,
    /// Meters.
    pub uav_altitude: f64,
    pub task_size_mbyte: Span,
    /// Cycles per bit.
    pub complexity: Span,
    pub tx_power_mw: Span,
    pub bandwidth_mhz: Span,
    pub cache_mbyte: Span,
    pub deadline_ms: Span,
    /// Chip coefficient in units of 1e-28.
    pub chip_coeff_multiplier: Span,
    pub compute_ghz: Span,
    /// Watts.
    pub hover_power: f64,
    /// Hz.
    pub env_bandwidth: f64,
    pub noise_dbm: f64,
    pub path_loss_exp: f64,
    pub weights: WeightConfig,
    pub seed: u64,
    pub strategy: StrategyId,
    pub warm_start: WarmStartProvider,
    /// Relative deviation of actual computing frequency from the twin's.
    pub fidelity_delta: f64,
    /// Scan limit for coalition stabilization.
    pub max_rounds: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_uavs: 10,
            n_slots: 100,
            slot_duration: 60.0,
            area_side: 1000.0,
            uav_altitude: 800.0,
            task_size_mbyte: Span(5.0, 25.0),
            complexity: Span(50.0, 300.0),
            tx_power_mw: Span(50.0, 100.0),
            bandwidth_mhz: Span(1.0, 5.0),
            cache_mbyte: Span(1.0, 2.0),
            deadline_ms: Span(150.0, 500.0),
            chip_coeff_multiplier: Span(1.0, 2.5),
            compute_ghz: Span(4.0, 10.0),
            hover_power: 168.0,
            env_bandwidth: 16e6,
            noise_dbm: -110.0,
            path_loss_exp: 4.0,
            weights: WeightConfig::default(),
            seed: 0,
            strategy: StrategyId::CoalitionGame,
            warm_start: WarmStartProvider::cold(),
            fidelity_delta: 0.0,
            max_rounds: 10_000,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_uavs == 0 {
            return Err(Error::InvalidScenario("n_uavs must be >= 1".into()));
        }
        let positive = [
            ("slot_duration", self.slot_duration),
            ("area_side", self.area_side),
            ("env_bandwidth", self.env_bandwidth),
            ("path_loss_exp", self.path_loss_exp),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidScenario(format!("{name} must be > 0")));
            }
        }
        if !(self.uav_altitude >= 0.0 && self.hover_power >= 0.0) {
            return Err(Error::InvalidScenario("altitude and hover power must be >= 0".into()));
        }
        if !self.noise_dbm.is_finite() {
            return Err(Error::InvalidScenario("noise_dbm must be finite".into()));
        }
        self.task_size_mbyte.check("task_size_mbyte", false)?;
        self.complexity.check("complexity", true)?;
        self.tx_power_mw.check("tx_power_mw", false)?;
        self.bandwidth_mhz.check("bandwidth_mhz", true)?;
        self.cache_mbyte.check("cache_mbyte", false)?;
        self.deadline_ms.check("deadline_ms", true)?;
        self.chip_coeff_multiplier.check("chip_coeff_multiplier", true)?;
        self.compute_ghz.check("compute_ghz", true)?;
        if self.deadline_ms.1 / 1e3 > self.slot_duration {
            return Err(Error::InvalidScenario("deadline exceeds slot duration".into()));
        }
        if !(self.fidelity_delta > -1.0 && self.fidelity_delta.is_finite()) {
            return Err(Error::InvalidScenario("fidelity_delta must be > -1".into()));
        }
        self.weights.validate()
    }

    pub fn channel(&self) -> Channel {
        Channel {
            noise: dbm_to_watts(self.noise_dbm),
            path_loss_exp: self.path_loss_exp,
        }
    }
}

/// Seeded stream of slot snapshots. The UAV fleet is drawn once; the MED
/// and its task are redrawn every slot.
pub struct ScenarioStream {
    rng: ChaCha8Rng,
    config: ScenarioConfig,
    uavs: Vec<UavTwin>,
    next_slot: usize,
}

impl ScenarioStream {
    pub fn uavs(&self) -> &[UavTwin] {
        &self.uavs
    }
}

pub fn generate_scenario(config: &ScenarioConfig) -> Result<ScenarioStream> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let side = Span(0.0, config.area_side);
    let uavs = (0..config.n_uavs)
        .map(|_| UavTwin {
            position: Position::new(side.sample(&mut rng), side.sample(&mut rng), config.uav_altitude),
            bandwidth_max: mhz(config.bandwidth_mhz.sample(&mut rng)),
            compute_max: ghz(config.compute_ghz.sample(&mut rng)),
            cache_max: mbyte_to_bits(config.cache_mbyte.sample(&mut rng)),
            hover_power: config.hover_power,
            chip_coeff: config.chip_coeff_multiplier.sample(&mut rng) * 1e-28,
        })
        .collect();
    Ok(ScenarioStream {
        rng,
        config: config.clone(),
        uavs,
        next_slot: 0,
    })
}

impl Iterator for ScenarioStream {
    type Item = Result<NetworkState>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next_slot >= self.config.n_slots {
            return None;
        }
        let c = &self.config;
        let rng = &mut self.rng;
        let side = Span(0.0, c.area_side);
        let med = MedTwin {
            position: Position::new(side.sample(rng), side.sample(rng), 0.0),
            task_size: mbyte_to_bits(c.task_size_mbyte.sample(rng)),
            complexity: c.complexity.sample(rng),
            tx_power: c.tx_power_mw.sample(rng) * 1e-3,
            deadline: c.deadline_ms.sample(rng) * 1e-3,
        };
        let slot = self.next_slot as u64;
        self.next_slot += 1;
        Some(snapshot(med, self.uavs.clone(), c.env_bandwidth, slot, c.channel()))
    }
}
