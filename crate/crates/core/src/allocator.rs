//! Per-coalition resource allocation.
//!
//! Given a coalition of UAVs serving the slot's MED, [`solve_f3`] chooses how
//! many bits each member receives and how much bandwidth it contributes so as
//! to maximize the coalition utility
//!
//! ```text
//! U = phi * ln(1 + sum_j s_j / unit) - eps * sum_j p_tr * s_j / C_j(b_j)
//! ```
//!
//! subject to per-member bandwidth, cache and deadline caps, the shared
//! bandwidth budget and the MED's task size. Computing frequencies follow
//! from the shares in closed form ([`min_feasible_frequency`]).
//!
//! The solver alternates two exact blocks:
//!
//! * bandwidth with shares fixed: a waterfilling problem with one coupling
//!   multiplier, solved by bisection;
//! * shares with bandwidths fixed: the cheapest links are filled first and
//!   the marginal member stops where `phi / (1 + X) = kappa_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{self, EnergyBreakdown, LinkLoad};
use crate::twin::{NetworkState, WeightConfig};

pub const DEFAULT_TOL: f64 = 1e-6;
const MAX_OUTER_ITERATIONS: usize = 100;
const BISECTION_STEPS: usize = 200;

/// Optimized resources for one coalition plus its utility and energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    /// UAV indices, ascending.
    pub members: Vec<usize>,
    /// Bits per member.
    pub shares: Vec<f64>,
    /// Hz per member.
    pub bandwidths: Vec<f64>,
    /// Cycles/s per member.
    pub frequencies: Vec<f64>,
    pub coalition_utility: f64,
    pub participant_utilities: Vec<f64>,
    pub energy: EnergyBreakdown,
}

impl AllocationResult {
    /// The allocation of a coalition that does not serve the MED.
    pub fn idle(members: &[usize]) -> Self {
        let n = members.len();
        AllocationResult {
            members: members.to_vec(),
            shares: vec![0.0; n],
            bandwidths: vec![0.0; n],
            frequencies: vec![0.0; n],
            coalition_utility: 0.0,
            participant_utilities: vec![0.0; n],
            energy: EnergyBreakdown {
                members: vec![Default::default(); n],
                ..Default::default()
            },
        }
    }

    pub fn total_share(&self) -> f64 {
        self.shares.iter().sum()
    }

    pub fn is_active(&self) -> bool {
        self.shares.iter().any(|s| *s > 0.0)
    }

    pub fn utility_of(&self, uav: usize) -> Option<f64> {
        self.members
            .iter()
            .position(|m| *m == uav)
            .map(|k| self.participant_utilities[k])
    }
}

/// Smallest frequency that finishes `bits` by the deadline, capped at `f_max`.
pub fn min_feasible_frequency(
    complexity: f64,
    bits: f64,
    deadline: f64,
    transmit_time: f64,
    f_max: f64,
) -> Result<f64> {
    if bits <= 0.0 {
        return Ok(0.0);
    }
    let slack = deadline - transmit_time;
    if !(slack > 0.0) {
        return Err(Error::InfeasibleDeadline {
            deadline,
            transmit: transmit_time,
        });
    }
    Ok((complexity * bits / slack).min(f_max))
}

/// Largest share (bits) `uav` can accept when contributing `bandwidth` Hz:
/// the cache, the deadline with the UAV at full clock, and the deadline on
/// transmission alone at full bandwidth.
pub fn member_cap(state: &NetworkState, uav: usize, bandwidth: f64) -> f64 {
    let twin = &state.uavs[uav];
    let tau = state.med.deadline;
    let c = state.capacity_at(uav, bandwidth);
    if !(c > 0.0) {
        return 0.0;
    }
    let deadline_cap = tau / (1.0 / c + state.med.complexity / twin.compute_max);
    let transmit_cap = tau * state.capacities[uav];
    twin.cache_max.min(deadline_cap).min(transmit_cap).max(0.0)
}

/// Coalition utility of a candidate `(shares, bandwidths)`.
pub fn coalition_objective(
    members: &[usize],
    shares: &[f64],
    bandwidths: &[f64],
    state: &NetworkState,
    weights: &WeightConfig,
) -> f64 {
    let total: f64 = shares.iter().sum();
    let revenue = weights.satisfaction * (total / weights.log_unit_bits).ln_1p();
    let comm: f64 = members
        .iter()
        .zip(shares)
        .zip(bandwidths)
        .map(|((&j, &s), &b)| {
            if s <= 0.0 {
                0.0
            } else {
                state.med.tx_power * s / state.capacity_at(j, b)
            }
        })
        .sum();
    revenue - weights.comm_penalty * comm
}

/// `u_j = U * s_j / S - alpha * E_cp,j - beta * E_h,j` for the member at
/// position `k` of `allocation`.
pub fn participant_utility(k: usize, allocation: &AllocationResult, weights: &WeightConfig) -> f64 {
    let total = allocation.total_share();
    let energy = &allocation.energy.members[k];
    let revenue = if total > 0.0 {
        allocation.coalition_utility * allocation.shares[k] / total
    } else {
        0.0
    };
    revenue - weights.compute_penalty * energy.compute - weights.hover_penalty * energy.hover
}

/// Completes an allocation from shares and bandwidths: frequencies, energy,
/// coalition and participant utilities.
pub fn finalize(
    members: &[usize],
    shares: Vec<f64>,
    bandwidths: Vec<f64>,
    state: &NetworkState,
    weights: &WeightConfig,
) -> Result<AllocationResult> {
    let med = &state.med;
    let mut frequencies = Vec::with_capacity(members.len());
    let mut loads = Vec::with_capacity(members.len());
    for ((&j, &s), &b) in members.iter().zip(&shares).zip(&bandwidths) {
        let uav = &state.uavs[j];
        let capacity = state.capacity_at(j, b);
        let transmit = if s > 0.0 {
            if !(capacity > 0.0) {
                return Err(Error::UnreachableUav { bits: s });
            }
            s / capacity
        } else {
            0.0
        };
        let f = min_feasible_frequency(med.complexity, s, med.deadline, transmit, uav.compute_max)?;
        frequencies.push(f);
        loads.push(LinkLoad {
            share: s,
            capacity,
            frequency: f,
            hover_power: uav.hover_power,
            chip_coeff: uav.chip_coeff,
        });
    }
    let energy = link::energy_from_links(&loads, med)?;
    let coalition_utility = coalition_objective(members, &shares, &bandwidths, state, weights);
    let mut result = AllocationResult {
        members: members.to_vec(),
        shares,
        bandwidths,
        frequencies,
        coalition_utility,
        participant_utilities: Vec::new(),
        energy,
    };
    result.participant_utilities = (0..members.len())
        .map(|k| participant_utility(k, &result, weights))
        .collect();
    Ok(result)
}

/// Shares block: maximize `phi ln(1 + X) - sum kappa_j x_j` over the box
/// `[0, cap_j]` with `X <= budget`, everything in log units.
fn fill_shares(kappa: &[f64], caps: &[f64], budget: f64, phi: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..kappa.len()).collect();
    // Stable sort keeps ascending member order on equal cost.
    order.sort_by(|&a, &b| kappa[a].total_cmp(&kappa[b]));
    let mut x = vec![0.0; kappa.len()];
    let mut filled = 0.0;
    for k in order {
        if filled >= budget || !kappa[k].is_finite() {
            break;
        }
        if kappa[k] >= phi / (1.0 + filled) {
            break;
        }
        let stop = if kappa[k] > 0.0 {
            phi / kappa[k] - 1.0
        } else {
            f64::INFINITY
        };
        let add = caps[k].min(stop - filled).min(budget - filled).max(0.0);
        x[k] = add;
        filled += add;
        if add < caps[k] {
            break;
        }
    }
    x
}

/// Bandwidth block: minimize `sum w_j / (r_j b_j)` over `lo <= b <= hi`,
/// `sum b <= budget`. Zero-weight members get whatever budget is left.
fn waterfill_bandwidth(weight: &[f64], eff: &[f64], lo: &[f64], hi: &[f64], budget: f64) -> Vec<f64> {
    let n = weight.len();
    let active: Vec<usize> = (0..n).filter(|&k| weight[k] > 0.0).collect();
    let mut b: Vec<f64> = lo.to_vec();
    let hi_sum: f64 = active.iter().map(|&k| hi[k]).sum();
    let idle_lo: f64 = (0..n).filter(|k| weight[*k] <= 0.0).map(|k| lo[k]).sum();
    let active_budget = budget - idle_lo;
    if hi_sum <= active_budget {
        for &k in &active {
            b[k] = hi[k];
        }
    } else {
        let at = |lambda: f64, k: usize| (weight[k] / (eff[k] * lambda)).sqrt().clamp(lo[k], hi[k]);
        let used = |lambda: f64| active.iter().map(|&k| at(lambda, k)).sum::<f64>();
        // Bracket the multiplier: everyone at hi below `lo_l`, at lo above `hi_l`.
        let mut lo_l = f64::INFINITY;
        let mut hi_l: f64 = 0.0;
        for &k in &active {
            lo_l = lo_l.min(weight[k] / (eff[k] * hi[k] * hi[k]));
            let floor = lo[k].max(hi[k] * 1e-12);
            hi_l = hi_l.max(weight[k] / (eff[k] * floor * floor));
        }
        let (mut a, mut z) = (lo_l.ln(), hi_l.ln());
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (a + z);
            if used(mid.exp()) > active_budget {
                a = mid;
            } else {
                z = mid;
            }
        }
        let lambda = z.exp();
        for &k in &active {
            b[k] = at(lambda, k);
        }
        // Rounding can leave the sum a few ulps over budget.
        let over = active.iter().map(|&k| b[k]).sum::<f64>() - active_budget;
        if over > 0.0 {
            for &k in active.iter().rev() {
                let give = (b[k] - lo[k]).min(over);
                if give > 0.0 {
                    b[k] -= give;
                    break;
                }
            }
        }
    }
    let mut spare = budget - b.iter().sum::<f64>();
    for k in 0..n {
        if weight[k] <= 0.0 && spare > 0.0 {
            let extra = (hi[k] - b[k]).min(spare).max(0.0);
            b[k] += extra;
            spare -= extra;
        }
    }
    b
}

struct Problem<'a> {
    members: &'a [usize],
    state: &'a NetworkState,
    weights: &'a WeightConfig,
    hi: Vec<f64>,
    eff: Vec<f64>,
}

impl Problem<'_> {
    fn kappa(&self, bandwidths: &[f64]) -> Vec<f64> {
        let w = self.weights;
        self.members
            .iter()
            .zip(bandwidths)
            .map(|(&j, &b)| {
                let c = self.state.capacity_at(j, b);
                if c > 0.0 {
                    w.comm_penalty * self.state.med.tx_power * w.log_unit_bits / c
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }

    fn share_block(&self, bandwidths: &[f64]) -> Vec<f64> {
        let unit = self.weights.log_unit_bits;
        let caps: Vec<f64> = self
            .members
            .iter()
            .zip(bandwidths)
            .map(|(&j, &b)| member_cap(self.state, j, b) / unit)
            .collect();
        let budget = self.state.med.task_size / unit;
        let x = fill_shares(&self.kappa(bandwidths), &caps, budget, self.weights.satisfaction);
        x.into_iter()
            .zip(&caps)
            .map(|(x, cap)| if x >= *cap { cap * unit } else { x * unit })
            .collect()
    }

    /// Smallest bandwidth that still lets `share` meet the deadline at full clock.
    fn bandwidth_floor(&self, k: usize, share: f64) -> f64 {
        if share <= 0.0 {
            return 0.0;
        }
        let j = self.members[k];
        let med = &self.state.med;
        let slack = med.deadline - med.complexity * share / self.state.uavs[j].compute_max;
        (share / (self.eff[k] * slack)).min(self.hi[k])
    }

    fn bandwidth_block(&self, shares: &[f64], lo_from_shares: bool) -> Vec<f64> {
        let weight: Vec<f64> = shares.iter().map(|s| self.state.med.tx_power * s).collect();
        let lo: Vec<f64> = (0..shares.len())
            .map(|k| {
                if lo_from_shares {
                    self.bandwidth_floor(k, shares[k])
                } else {
                    0.0
                }
            })
            .collect();
        waterfill_bandwidth(&weight, &self.eff, &lo, &self.hi, self.state.env_bandwidth)
    }

    /// Bandwidths maximizing the objective when every member takes its full
    /// deadline cap at the bandwidth it gets. That cap is concave in
    /// bandwidth and the transmit time it implies is convex, so the reduced
    /// problem is concave and solved by bisection on the bandwidth price,
    /// with the log's marginal value per bit found as a fixed point inside.
    fn capped_bandwidth_start(&self) -> Vec<f64> {
        let med = &self.state.med;
        let w = self.weights;
        let (tau, theta) = (med.deadline, med.complexity);
        let n = self.members.len();
        let fmax: Vec<f64> = self.members.iter().map(|&j| self.state.uavs[j].compute_max).collect();
        // Past `hi` the cache or transmit cap binds and more bandwidth is useless.
        let hi: Vec<f64> = (0..n)
            .map(|k| {
                let j = self.members[k];
                let r = self.eff[k];
                if !(r > 0.0) {
                    return 0.0;
                }
                let flat = self.state.uavs[j].cache_max.min(tau * self.state.capacities[j]);
                let denom = r * (tau * fmax[k] - flat * theta);
                let kink = if denom > 0.0 { flat * fmax[k] / denom } else { f64::INFINITY };
                self.hi[k].min(kink)
            })
            .collect();
        let cap_at = |k: usize, b: f64| {
            let r = self.eff[k];
            if b <= 0.0 {
                0.0
            } else {
                tau * r * b * fmax[k] / (fmax[k] + theta * r * b)
            }
        };
        let response = |k: usize, lambda: f64, marginal: f64| {
            let (r, f) = (self.eff[k], fmax[k]);
            if hi[k] <= 0.0 {
                return 0.0;
            }
            let gain = tau * r * f * (marginal * f + w.comm_penalty * med.tx_power * theta);
            (((gain / lambda).sqrt() - f) / (theta * r)).clamp(0.0, hi[k])
        };
        let unit = w.log_unit_bits;
        let top_marginal = w.satisfaction / unit;
        let allocate = |lambda: f64| -> Vec<f64> {
            // Marginal value of a bit must equal phi / (unit + total share).
            let total = |m: f64| (0..n).map(|k| cap_at(k, response(k, lambda, m))).sum::<f64>();
            let (mut lo, mut up) = (w.satisfaction / (unit + total(top_marginal)), top_marginal);
            for _ in 0..100 {
                let mid = 0.5 * (lo + up);
                if mid < w.satisfaction / (unit + total(mid)) {
                    lo = mid;
                } else {
                    up = mid;
                }
            }
            (0..n).map(|k| response(k, lambda, up)).collect()
        };
        let budget = self.state.env_bandwidth;
        if hi.iter().sum::<f64>() <= budget {
            return hi;
        }
        // Price bracket: at `lo_l` everyone wants `hi`, at `hi_l` nobody wants any.
        let mut hi_l: f64 = 0.0;
        for k in 0..n {
            if hi[k] > 0.0 {
                let (r, f) = (self.eff[k], fmax[k]);
                hi_l = hi_l.max(tau * r * (top_marginal * f + w.comm_penalty * med.tx_power * theta) / f);
            }
        }
        let (mut a, mut z) = ((hi_l * 1e-12).ln(), (hi_l * 2.0).ln());
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (a + z);
            if allocate(mid.exp()).iter().sum::<f64>() > budget {
                a = mid;
            } else {
                z = mid;
            }
        }
        allocate(z.exp())
    }

    fn objective(&self, shares: &[f64], bandwidths: &[f64]) -> f64 {
        coalition_objective(self.members, shares, bandwidths, self.state, self.weights)
    }

    fn ascend(&self, mut bandwidths: Vec<f64>, tol: f64) -> (Vec<f64>, Vec<f64>, f64) {
        let mut shares = self.share_block(&bandwidths);
        let mut value = self.objective(&shares, &bandwidths);
        for _ in 0..MAX_OUTER_ITERATIONS {
            let next_b = self.bandwidth_block(&shares, true);
            let next_s = self.share_block(&next_b);
            let next = self.objective(&next_s, &next_b);
            if next < value {
                break;
            }
            let gain = next - value;
            bandwidths = next_b;
            shares = next_s;
            value = next;
            if gain <= tol * value.abs().max(1e-12) {
                break;
            }
        }
        (shares, bandwidths, value)
    }
}

/// Solves the coalition allocation problem for `members` (ascending UAV
/// indices). A coalition nobody in can take work gets the all-zero
/// allocation.
pub fn solve_f3(
    members: &[usize],
    state: &NetworkState,
    weights: &WeightConfig,
    tol: f64,
) -> Result<AllocationResult> {
    if members.is_empty() {
        return Err(Error::InvalidParameter("coalition must be non-empty".into()));
    }
    if let Some(&bad) = members.iter().find(|&&j| j >= state.n_uavs()) {
        return Err(Error::InvalidParameter(format!("UAV index {bad} out of range")));
    }
    let problem = Problem {
        members,
        state,
        weights,
        hi: members.iter().map(|&j| state.uavs[j].bandwidth_max).collect(),
        eff: members.iter().map(|&j| state.spectral_efficiency(j)).collect(),
    };
    let hi_sum: f64 = problem.hi.iter().sum();
    let (shares, bandwidths) = if hi_sum <= state.env_bandwidth {
        // No bandwidth contention: full bandwidth is optimal for every member.
        let b = problem.hi.clone();
        (problem.share_block(&b), b)
    } else {
        // Three starts: capped shares with their best bandwidths, waterfilled
        // against the full caps, and proportional.
        let caps: Vec<f64> = members
            .iter()
            .zip(&problem.hi)
            .map(|(&j, &b)| member_cap(state, j, b))
            .collect();
        let start_a = problem.bandwidth_block(&caps, false);
        let scale = state.env_bandwidth / hi_sum;
        let start_b: Vec<f64> = problem.hi.iter().map(|h| h * scale).collect();
        let start_c = problem.capped_bandwidth_start();
        let runs = [
            problem.ascend(start_c, tol),
            problem.ascend(start_a, tol),
            problem.ascend(start_b, tol),
        ];
        let best = runs
            .into_iter()
            .reduce(|best, run| if run.2 > best.2 { run } else { best })
            .expect("three starts");
        (best.0, best.1)
    };
    // Links that carry nothing keep no bandwidth.
    let bandwidths = bandwidths
        .into_iter()
        .zip(&shares)
        .map(|(b, s)| if *s > 0.0 { b } else { 0.0 })
        .collect();
    finalize(members, shares, bandwidths, state, weights)
}

/// Worst normalized constraint residual of an allocation; `<= 1e-9` means
/// feasible. Residuals are relative to the scale of each constraint.
pub fn max_violation(allocation: &AllocationResult, state: &NetworkState) -> f64 {
    let med = &state.med;
    let mut worst: f64 = 0.0;
    let mut note = |excess: f64, scale: f64| {
        worst = worst.max(excess / scale.abs().max(1.0));
    };
    let total_s: f64 = allocation.shares.iter().sum();
    note(total_s - med.task_size, med.task_size);
    let total_b: f64 = allocation.bandwidths.iter().sum();
    note(total_b - state.env_bandwidth, state.env_bandwidth);
    for (k, &j) in allocation.members.iter().enumerate() {
        let uav = &state.uavs[j];
        let (s, b, f) = (
            allocation.shares[k],
            allocation.bandwidths[k],
            allocation.frequencies[k],
        );
        note(-s, uav.cache_max);
        note(-b, uav.bandwidth_max);
        note(s - uav.cache_max, uav.cache_max);
        note(b - uav.bandwidth_max, uav.bandwidth_max);
        note(s - med.deadline * state.capacities[j], med.deadline * state.capacities[j]);
        let full_cap = med.deadline
            / (1.0 / state.capacities[j] + med.complexity / uav.compute_max);
        if state.capacities[j] > 0.0 {
            note(s - full_cap, full_cap);
        } else {
            note(s, 1.0);
        }
        note(f - uav.compute_max, uav.compute_max);
        if s > 0.0 {
            let c = state.capacity_at(j, b);
            let finish = s / c + med.complexity * s / f;
            note(finish - med.deadline, med.deadline);
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOracleConfig {
    pub points_per_axis: usize,
    pub max_members: usize,
}

impl Default for GridOracleConfig {
    fn default() -> Self {
        GridOracleConfig {
            points_per_axis: 50,
            max_members: 3,
        }
    }
}

/// Brute-force maximum of [`coalition_objective`] over a uniform grid of
/// shares and bandwidths, keeping only feasible points.
///
/// When the coalition's full bandwidths fit the shared budget, every grid
/// point is dominated by the same shares at full bandwidth (the objective
/// and the deadline caps only improve with bandwidth), so only the top
/// bandwidth grid value is visited.
pub fn grid_oracle(
    members: &[usize],
    state: &NetworkState,
    weights: &WeightConfig,
    cfg: &GridOracleConfig,
) -> Result<f64> {
    if members.len() > cfg.max_members || members.len() > 3 {
        return Err(Error::OracleScaleExceeded {
            max: cfg.max_members.min(3),
            got: members.len(),
        });
    }
    if cfg.points_per_axis < 2 {
        return Err(Error::InvalidParameter("oracle needs >= 2 points per axis".into()));
    }
    let p = cfg.points_per_axis;
    let med = &state.med;
    let n = members.len();
    let share_axes: Vec<Vec<f64>> = members
        .iter()
        .map(|&j| {
            let top = member_cap(state, j, state.uavs[j].bandwidth_max).min(med.task_size);
            linspace(top, p)
        })
        .collect();
    let hi_sum: f64 = members.iter().map(|&j| state.uavs[j].bandwidth_max).sum();
    let band_axes: Vec<Vec<f64>> = members
        .iter()
        .map(|&j| {
            let top = state.uavs[j].bandwidth_max;
            if hi_sum <= state.env_bandwidth {
                vec![top]
            } else {
                linspace(top, p)
            }
        })
        .collect();

    let mut best: f64 = 0.0;
    let mut b_idx = vec![0usize; n];
    let mut bandwidths = vec![0.0; n];
    let mut shares = vec![0.0; n];
    loop {
        for k in 0..n {
            bandwidths[k] = band_axes[k][b_idx[k]];
        }
        if bandwidths.iter().sum::<f64>() <= state.env_bandwidth {
            let caps: Vec<f64> = members
                .iter()
                .zip(&bandwidths)
                .map(|(&j, &b)| member_cap(state, j, b))
                .collect();
            let mut s_idx = vec![0usize; n];
            loop {
                for k in 0..n {
                    shares[k] = share_axes[k][s_idx[k]];
                }
                let fits = shares.iter().zip(&caps).all(|(s, c)| s <= c)
                    && shares.iter().sum::<f64>() <= med.task_size;
                if fits {
                    best = best.max(coalition_objective(members, &shares, &bandwidths, state, weights));
                }
                if !advance(&mut s_idx, p) {
                    break;
                }
            }
        }
        if !advance_axes(&mut b_idx, &band_axes) {
            break;
        }
    }
    Ok(best)
}

/// Analytic gap between the true optimum and the best grid point of
/// [`grid_oracle`] when bandwidths are uncontended: rounding every share down
/// to the grid stays feasible and loses at most `phi * h_j / unit` per member.
pub fn grid_resolution_bound(
    members: &[usize],
    state: &NetworkState,
    weights: &WeightConfig,
    points_per_axis: usize,
) -> f64 {
    members
        .iter()
        .map(|&j| {
            let top = member_cap(state, j, state.uavs[j].bandwidth_max).min(state.med.task_size);
            weights.satisfaction * top / (points_per_axis - 1) as f64 / weights.log_unit_bits
        })
        .sum()
}

fn linspace(top: f64, p: usize) -> Vec<f64> {
    // The last point is `top` itself; `top * (p - 1) / (p - 1)` can round above it.
    (0..p)
        .map(|i| if i + 1 == p { top } else { top * i as f64 / (p - 1) as f64 })
        .collect()
}

fn advance(idx: &mut [usize], p: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < p {
            return true;
        }
        *i = 0;
    }
    false
}

fn advance_axes(idx: &mut [usize], axes: &[Vec<f64>]) -> bool {
    for (i, axis) in idx.iter_mut().zip(axes) {
        *i += 1;
        if *i < axis.len() {
            return true;
        }
        *i = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twin::{snapshot, Channel, MedTwin, Position, UavTwin};

    fn uav(x: f64, bw: f64) -> UavTwin {
        UavTwin {
            position: Position::new(x, 0.0, 800.0),
            bandwidth_max: bw,
            compute_max: 8e9,
            cache_max: 1.6e7,
            hover_power: 168.0,
            chip_coeff: 1e-28,
        }
    }

    fn state_with(uavs: Vec<UavTwin>, task_mbyte: f64, env: f64) -> NetworkState {
        let med = MedTwin {
            position: Position::new(0.0, 0.0, 0.0),
            task_size: task_mbyte * 8e6,
            complexity: 100.0,
            tx_power: 0.08,
            deadline: 0.3,
        };
        snapshot(med, uavs, env, 0, Channel::default()).unwrap()
    }

    #[test]
    fn frequency_examples() {
        let f = min_feasible_frequency(100.0, 8e6, 0.4, 0.2, 1e10).unwrap();
        assert!((f - 4e9).abs() < 1.0);
        assert_eq!(min_feasible_frequency(100.0, 0.0, 0.4, 0.5, 1e10).unwrap(), 0.0);
        assert_eq!(min_feasible_frequency(300.0, 8e6, 0.3, 0.2, 1e10).unwrap(), 1e10);
        assert!(matches!(
            min_feasible_frequency(100.0, 1.0, 0.2, 0.2, 1e10),
            Err(Error::InfeasibleDeadline { .. })
        ));
    }

    #[test]
    fn objective_examples() {
        let s = state_with(vec![uav(0.0, 1e6)], 10.0, 16e6);
        let w = WeightConfig::default();
        assert_eq!(coalition_objective(&[0], &[0.0], &[1e6], &s, &w), 0.0);

        let pure = WeightConfig {
            satisfaction: 1.0,
            comm_penalty: 0.0,
            ..w
        };
        let bits = (std::f64::consts::E - 1.0) * 8e6;
        let v = coalition_objective(&[0], &[bits], &[1e6], &s, &pure);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn objective_hand_evaluation_with_comm_cost() {
        // Pick a bandwidth that makes the link exactly 4 Mbit/s at 0.1 W.
        let mut s = state_with(vec![uav(0.0, 1e6)], 10.0, 16e6);
        s.med.tx_power = 0.1;
        s.capacities[0] = 4e6;
        let w = WeightConfig {
            satisfaction: 1.0,
            comm_penalty: 1.0,
            ..WeightConfig::default()
        };
        let v = coalition_objective(&[0], &[8e6], &[1e6], &s, &w);
        assert!((v - (2f64.ln() - 0.2)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn single_uav_takes_its_cap_at_full_bandwidth() {
        let s = state_with(vec![uav(100.0, 2e6)], 10.0, 16e6);
        let w = WeightConfig::default();
        let a = solve_f3(&[0], &s, &w, DEFAULT_TOL).unwrap();
        let cap = member_cap(&s, 0, 2e6);
        assert_eq!(a.shares[0], cap);
        assert_eq!(a.bandwidths[0], 2e6);
        // At the deadline cap the UAV runs at full clock.
        assert!((a.frequencies[0] - 8e9).abs() / 8e9 < 1e-9);
        assert!(max_violation(&a, &s) <= 1e-9);
    }

    #[test]
    fn no_satisfaction_means_no_shares() {
        let s = state_with(vec![uav(0.0, 2e6), uav(200.0, 3e6)], 10.0, 16e6);
        let w = WeightConfig {
            satisfaction: 0.0,
            ..WeightConfig::default()
        };
        let a = solve_f3(&[0, 1], &s, &w, DEFAULT_TOL).unwrap();
        assert!(a.shares.iter().all(|x| *x == 0.0));
        assert_eq!(a.coalition_utility, 0.0);
        let oracle = grid_oracle(&[0, 1], &s, &w, &GridOracleConfig::default()).unwrap();
        assert_eq!(oracle, 0.0);
    }

    #[test]
    fn unreachable_coalition_gets_zero_allocation() {
        let mut s = state_with(vec![uav(0.0, 2e6)], 10.0, 16e6);
        s.med.tx_power = 0.0;
        s.capacities[0] = 0.0;
        let a = solve_f3(&[0], &s, &WeightConfig::default(), DEFAULT_TOL).unwrap();
        assert_eq!(a.total_share(), 0.0);
        assert_eq!(a.coalition_utility, 0.0);
        let oracle = grid_oracle(&[0], &s, &WeightConfig::default(), &GridOracleConfig::default());
        assert_eq!(oracle.unwrap(), 0.0);
    }

    #[test]
    fn task_budget_is_respected_and_filled_cheapest_first() {
        // Three UAVs whose caps exceed a small task.
        let s = state_with(vec![uav(0.0, 3e6), uav(600.0, 3e6), uav(300.0, 3e6)], 0.5, 16e6);
        let w = WeightConfig::default();
        let a = solve_f3(&[0, 1, 2], &s, &w, DEFAULT_TOL).unwrap();
        assert!((a.total_share() - 4e6).abs() < 1e-6);
        // The farthest UAV has the most expensive link and receives the least.
        assert!(a.shares[1] <= a.shares[2] && a.shares[2] <= a.shares[0]);
        assert!(max_violation(&a, &s) <= 1e-9);
    }

    #[test]
    fn contended_bandwidth_is_waterfilled_within_budget() {
        let uavs = (0..6).map(|k| uav(120.0 * k as f64, 4e6)).collect();
        let s = state_with(uavs, 25.0, 9e6);
        let a = solve_f3(&[0, 1, 2, 3, 4, 5], &s, &WeightConfig::default(), DEFAULT_TOL).unwrap();
        assert!(a.bandwidths.iter().sum::<f64>() <= 9e6 * (1.0 + 1e-12));
        assert!(max_violation(&a, &s) <= 1e-9, "{}", max_violation(&a, &s));
        assert!(a.coalition_utility > 0.0);
    }

    #[test]
    fn contended_solution_beats_two_member_grid() {
        let s = state_with(vec![uav(0.0, 4e6), uav(500.0, 5e6)], 25.0, 6e6);
        let w = WeightConfig::default();
        let a = solve_f3(&[0, 1], &s, &w, DEFAULT_TOL).unwrap();
        let cfg = GridOracleConfig {
            points_per_axis: 40,
            max_members: 2,
        };
        let oracle = grid_oracle(&[0, 1], &s, &w, &cfg).unwrap();
        assert!(a.coalition_utility >= oracle - 1e-9, "{} vs {}", a.coalition_utility, oracle);
    }

    #[test]
    fn fill_shares_stops_at_marginal_value() {
        // phi / (1 + X) = kappa at X = 1 for kappa = 5, phi = 10.
        let x = fill_shares(&[5.0], &[3.0], 10.0, 10.0);
        assert!((x[0] - 1.0).abs() < 1e-12);
        // Ties go to the lower index.
        let x = fill_shares(&[1.0, 1.0], &[2.0, 2.0], 3.0, 10.0);
        assert_eq!(x, vec![2.0, 1.0]);
    }

    #[test]
    fn waterfill_matches_kkt_closed_form() {
        // Equal weights and efficiencies split the budget evenly.
        let b = waterfill_bandwidth(&[1.0, 1.0], &[2.0, 2.0], &[0.0, 0.0], &[5.0, 5.0], 4.0);
        assert!((b[0] - 2.0).abs() < 1e-9 && (b[1] - 2.0).abs() < 1e-9);
        // b_j proportional to sqrt(w_j / r_j): weights 1 and 4 split 1:2.
        let b = waterfill_bandwidth(&[1.0, 4.0], &[1.0, 1.0], &[0.0, 0.0], &[5.0, 5.0], 3.0);
        assert!((b[0] - 1.0).abs() < 1e-9 && (b[1] - 2.0).abs() < 1e-9, "{b:?}");
    }

    #[test]
    fn oracle_rejects_large_coalitions() {
        let uavs = (0..4).map(|k| uav(10.0 * k as f64, 1e6)).collect();
        let s = state_with(uavs, 10.0, 16e6);
        let err = grid_oracle(&[0, 1, 2, 3], &s, &WeightConfig::default(), &GridOracleConfig::default());
        assert!(matches!(err, Err(Error::OracleScaleExceeded { .. })));
    }

    #[test]
    fn participant_utility_examples() {
        let s = state_with(vec![uav(0.0, 2e6), uav(900.0, 1e6)], 10.0, 16e6);
        let w = WeightConfig::default();
        let solo = solve_f3(&[0], &s, &w, DEFAULT_TOL).unwrap();
        let e = &solo.energy.members[0];
        let expected = solo.coalition_utility - w.compute_penalty * e.compute - w.hover_penalty * e.hover;
        assert!((solo.participant_utilities[0] - expected).abs() < 1e-12);

        // Force the second member idle: it still hovers for the coalition.
        let busy = finalize(&[0, 1], vec![solo.shares[0], 0.0], vec![2e6, 0.0], &s, &w).unwrap();
        let idle = busy.participant_utilities[1];
        assert!(idle < 0.0);
        assert!((idle + w.hover_penalty * 168.0 * busy.energy.completion_time).abs() < 1e-12);
    }

    #[test]
    fn symmetric_members_get_equal_utilities() {
        let s = state_with(vec![uav(0.0, 2e6), uav(0.0, 2e6)], 10.0, 16e6);
        let a = solve_f3(&[0, 1], &s, &WeightConfig::default(), DEFAULT_TOL).unwrap();
        assert_eq!(a.shares[0], a.shares[1]);
        assert_eq!(a.participant_utilities[0], a.participant_utilities[1]);
    }
}
