//! Merge-and-split coalition formation among UAVs.
//!
//! Every coalition of a partition has a standing offer: its optimal
//! allocation for the slot's MED. The scheduler hands the task to the
//! coalition with the highest coalition utility; the rest stay in
//! energy-saving mode with an all-zero allocation (and zero utility).
//! Coalitions merge when the union Pareto-dominates the pair for its own
//! members, and split when the two halves Pareto-dominate the whole.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::allocator::{self, AllocationResult};
use crate::error::{Error, Result};
use crate::twin::{NetworkState, WeightConfig};

/// Coalitions above this size only try single-member peel-offs.
pub const SPLIT_ENUM_CAP: usize = 6;

/// Relative slack under which two utilities count as equal.
const UTILITY_EPS: f64 = 1e-9;

/// A partition written as a list of UAV index lists; the JSON interchange
/// form used by warm-start datasets and fixtures.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Grouping(pub Vec<Vec<usize>>);

impl Grouping {
    pub fn singletons(n: usize) -> Self {
        Grouping((0..n).map(|j| vec![j]).collect())
    }

    /// Sorts members within each group and groups by their smallest member.
    pub fn canonical(mut self) -> Self {
        for g in &mut self.0 {
            g.sort_unstable();
        }
        self.0.retain(|g| !g.is_empty());
        self.0.sort_by_key(|g| g[0]);
        self
    }

    /// Checks that the groups are non-empty, disjoint and cover `0..n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for g in &self.0 {
            if g.is_empty() {
                return Err(Error::InvalidScenario("empty coalition".into()));
            }
            for &j in g {
                if j >= n {
                    return Err(Error::InvalidScenario(format!("UAV {j} out of range 0..{n}")));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidScenario(format!("UAV {j} in two coalitions")));
                }
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidScenario(format!("UAV {j} not covered")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    /// Disjoint coalitions covering every UAV, each sorted, ordered by their
    /// smallest member.
    pub coalitions: Vec<Vec<usize>>,
    /// Allocation actually executed by each coalition: the optimal one for
    /// the serving coalition, all-zero for the rest.
    pub allocations: Vec<AllocationResult>,
    /// Index of the coalition the task is handed to, if any holds work.
    pub serving: Option<usize>,
    /// Merge/split rules applied so far.
    pub generation: usize,
}

impl Partition {
    pub fn grouping(&self) -> Grouping {
        Grouping(self.coalitions.clone())
    }

    pub fn n_uavs(&self) -> usize {
        self.coalitions.iter().map(Vec::len).sum()
    }

    pub fn utility_of(&self, uav: usize) -> f64 {
        self.allocations
            .iter()
            .find_map(|a| a.utility_of(uav))
            .expect("UAV covered by partition")
    }

    /// `(uav, utility)` for each of `uavs`, in the given order.
    pub fn fragment(&self, uavs: &[usize]) -> Vec<(usize, f64)> {
        uavs.iter().map(|&j| (j, self.utility_of(j))).collect()
    }

    /// Sum of coalition utilities over coalitions that hold work.
    pub fn total_utility(&self) -> f64 {
        self.allocations
            .iter()
            .filter(|a| a.is_active())
            .map(|a| a.coalition_utility)
            .sum()
    }

    /// Coalition index holding `uav`.
    pub fn index_of(&self, uav: usize) -> usize {
        self.coalitions
            .iter()
            .position(|g| g.contains(&uav))
            .expect("UAV covered by partition")
    }
}

/// Evaluation context for one slot: the snapshot, weights and a cache of
/// coalition offers.
pub struct Game<'a> {
    pub state: &'a NetworkState,
    pub weights: &'a WeightConfig,
    pub tol: f64,
    offers: RefCell<HashMap<Vec<usize>, AllocationResult>>,
}

impl<'a> Game<'a> {
    pub fn new(state: &'a NetworkState, weights: &'a WeightConfig) -> Self {
        Game {
            state,
            weights,
            tol: allocator::DEFAULT_TOL,
            offers: RefCell::new(HashMap::new()),
        }
    }

    /// Optimal allocation of `coalition` (sorted) if it were to serve.
    pub fn offer(&self, coalition: &[usize]) -> Result<AllocationResult> {
        if let Some(hit) = self.offers.borrow().get(coalition) {
            return Ok(hit.clone());
        }
        let solved = allocator::solve_f3(coalition, self.state, self.weights, self.tol)?;
        self.offers
            .borrow_mut()
            .insert(coalition.to_vec(), solved.clone());
        Ok(solved)
    }

    /// Builds a partition from a grouping: every coalition's offer is solved
    /// and the task goes to the best one.
    pub fn evaluate(&self, grouping: Grouping, generation: usize) -> Result<Partition> {
        let grouping = grouping.canonical();
        grouping.validate(self.state.n_uavs())?;
        let offers = grouping
            .0
            .iter()
            .map(|g| self.offer(g))
            .collect::<Result<Vec<_>>>()?;
        let mut serving: Option<usize> = None;
        for (k, offer) in offers.iter().enumerate() {
            if !offer.is_active() {
                continue;
            }
            match serving {
                Some(best) if offers[best].coalition_utility >= offer.coalition_utility => {}
                _ => serving = Some(k),
            }
        }
        let allocations = offers
            .into_iter()
            .enumerate()
            .map(|(k, offer)| {
                if Some(k) == serving {
                    offer
                } else {
                    AllocationResult::idle(&grouping.0[k])
                }
            })
            .collect();
        Ok(Partition {
            coalitions: grouping.0,
            allocations,
            serving,
            generation,
        })
    }
}

fn same_within(a: f64, b: f64) -> f64 {
    UTILITY_EPS * a.abs().max(b.abs()).max(1.0)
}

/// True iff `a` gives every UAV at least its utility in `b` and some UAV
/// strictly more. Both fragments must list the same UAVs.
pub fn pareto_dominates(a: &[(usize, f64)], b: &[(usize, f64)]) -> Result<bool> {
    let mut a_sorted = a.to_vec();
    let mut b_sorted = b.to_vec();
    a_sorted.sort_by_key(|e| e.0);
    b_sorted.sort_by_key(|e| e.0);
    if a_sorted.len() != b_sorted.len()
        || a_sorted.iter().zip(&b_sorted).any(|(x, y)| x.0 != y.0)
    {
        return Err(Error::InvalidComparison(
            "fragments cover different UAV sets".into(),
        ));
    }
    let mut strict = false;
    for ((_, ua), (_, ub)) in a_sorted.iter().zip(&b_sorted) {
        let eps = same_within(*ua, *ub);
        if *ua < ub - eps {
            return Ok(false);
        }
        if *ua > ub + eps {
            strict = true;
        }
    }
    Ok(strict)
}

/// Merges coalitions `k1` and `k2` if the union Pareto-dominates the pair.
pub fn try_merge(game: &Game<'_>, partition: &Partition, k1: usize, k2: usize) -> Result<Option<Partition>> {
    let k = partition.coalitions.len();
    if k1 == k2 || k1 >= k || k2 >= k {
        return Err(Error::InvalidComparison(format!(
            "cannot merge coalitions {k1} and {k2} of {k}"
        )));
    }
    let mut union: Vec<usize> = partition.coalitions[k1]
        .iter()
        .chain(&partition.coalitions[k2])
        .copied()
        .collect();
    union.sort_unstable();
    let mut groups: Vec<Vec<usize>> = partition
        .coalitions
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k1 && *i != k2)
        .map(|(_, g)| g.clone())
        .collect();
    groups.push(union.clone());
    let candidate = game.evaluate(Grouping(groups), partition.generation + 1)?;
    let better = pareto_dominates(&candidate.fragment(&union), &partition.fragment(&union))?;
    Ok(better.then_some(candidate))
}

/// Splits coalition `k` into `part` and its complement if the two halves
/// Pareto-dominate the whole.
pub fn try_split(
    game: &Game<'_>,
    partition: &Partition,
    k: usize,
    part: &[usize],
) -> Result<Option<Partition>> {
    let whole = partition
        .coalitions
        .get(k)
        .ok_or_else(|| Error::InvalidComparison(format!("no coalition {k}")))?;
    let mut first: Vec<usize> = part.to_vec();
    first.sort_unstable();
    first.dedup();
    let malformed = first.is_empty()
        || first.len() != part.len()
        || first.len() >= whole.len()
        || first.iter().any(|j| !whole.contains(j));
    if malformed {
        return Err(Error::InvalidComparison(format!(
            "{part:?} is not a proper bipartition of {whole:?}"
        )));
    }
    let second: Vec<usize> = whole.iter().copied().filter(|j| !first.contains(j)).collect();
    let mut groups: Vec<Vec<usize>> = partition
        .coalitions
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != k)
        .map(|(_, g)| g.clone())
        .collect();
    groups.push(first);
    groups.push(second);
    let candidate = game.evaluate(Grouping(groups), partition.generation + 1)?;
    let better = pareto_dominates(&candidate.fragment(whole), &partition.fragment(whole))?;
    Ok(better.then_some(candidate))
}

/// First parts of the bipartitions tried for `coalition`: every split when
/// it has at most [`SPLIT_ENUM_CAP`] members, otherwise single peel-offs.
pub fn split_candidates(coalition: &[usize]) -> Vec<Vec<usize>> {
    let m = coalition.len();
    if m < 2 {
        return Vec::new();
    }
    if m > SPLIT_ENUM_CAP {
        return coalition.iter().map(|&j| vec![j]).collect();
    }
    // The first member always stays in the first part; masks pick the rest.
    let rest = m - 1;
    (0..(1usize << rest) - 1)
        .map(|mask| {
            std::iter::once(coalition[0])
                .chain((0..rest).filter(|b| mask >> b & 1 == 1).map(|b| coalition[b + 1]))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilizeLimits {
    /// Maximum number of scans; each scan ends at the first applied rule or
    /// after finding none.
    pub max_rounds: usize,
}

impl Default for StabilizeLimits {
    fn default() -> Self {
        StabilizeLimits { max_rounds: 10_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MoveKind {
    Merge,
    Split,
}

/// One applied rule with the affected UAVs' utilities before and after.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppliedMove {
    pub kind: MoveKind,
    pub before: Vec<(usize, f64)>,
    pub after: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationReport {
    pub final_partition: Partition,
    /// Merge and split evaluations performed.
    pub iterations: usize,
    pub merges_applied: usize,
    pub splits_applied: usize,
    pub converged: bool,
    pub log: Vec<AppliedMove>,
}

enum Scan {
    Applied(Partition, AppliedMove),
    Stable,
}

fn scan(game: &Game<'_>, partition: &Partition, evaluations: &mut usize) -> Result<Scan> {
    let k = partition.coalitions.len();
    for k1 in 0..k {
        for k2 in k1 + 1..k {
            *evaluations += 1;
            if let Some(next) = try_merge(game, partition, k1, k2)? {
                let mut fragment = partition.coalitions[k1].clone();
                fragment.extend(&partition.coalitions[k2]);
                fragment.sort_unstable();
                let applied = AppliedMove {
                    kind: MoveKind::Merge,
                    before: partition.fragment(&fragment),
                    after: next.fragment(&fragment),
                };
                return Ok(Scan::Applied(next, applied));
            }
        }
    }
    for (idx, coalition) in partition.coalitions.iter().enumerate() {
        for part in split_candidates(coalition) {
            *evaluations += 1;
            if let Some(next) = try_split(game, partition, idx, &part)? {
                let applied = AppliedMove {
                    kind: MoveKind::Split,
                    before: partition.fragment(coalition),
                    after: next.fragment(coalition),
                };
                return Ok(Scan::Applied(next, applied));
            }
        }
    }
    Ok(Scan::Stable)
}

/// Applies merge and split rules, first improvement in ascending scan order,
/// until a full scan finds nothing to apply or `limits.max_rounds` scans ran.
pub fn stabilize(game: &Game<'_>, initial: Partition, limits: StabilizeLimits) -> Result<StabilizationReport> {
    let mut partition = initial;
    let mut report = StabilizationReport {
        final_partition: partition.clone(),
        iterations: 0,
        merges_applied: 0,
        splits_applied: 0,
        converged: false,
        log: Vec::new(),
    };
    for _ in 0..limits.max_rounds {
        match scan(game, &partition, &mut report.iterations)? {
            Scan::Stable => {
                report.converged = true;
                break;
            }
            Scan::Applied(next, applied) => {
                match applied.kind {
                    MoveKind::Merge => report.merges_applied += 1,
                    MoveKind::Split => report.splits_applied += 1,
                }
                log::trace!("{:?} -> {:?}", applied.kind, next.coalitions);
                report.log.push(applied);
                partition = next;
            }
        }
    }
    report.final_partition = partition;
    Ok(report)
}

/// Whether any pairwise merge or any bipartition split (exhaustive, no cap)
/// of `partition` is Pareto-improving. Independent of the scan order used by
/// [`stabilize`].
pub fn has_improving_move(game: &Game<'_>, partition: &Partition) -> Result<bool> {
    let k = partition.coalitions.len();
    for k1 in 0..k {
        for k2 in k1 + 1..k {
            if try_merge(game, partition, k1, k2)?.is_some() {
                return Ok(true);
            }
        }
    }
    for (idx, coalition) in partition.coalitions.iter().enumerate() {
        let m = coalition.len();
        if m < 2 {
            continue;
        }
        for mask in 1..(1usize << m) - 1 {
            let part: Vec<usize> = (0..m).filter(|b| mask >> b & 1 == 1).map(|b| coalition[b]).collect();
            if try_split(game, partition, idx, &part)?.is_some() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::twin::{snapshot, Channel, MedTwin, Position, UavTwin};

    fn uav(x: f64, bw: f64, cache_mbyte: f64) -> UavTwin {
        UavTwin {
            position: Position::new(x, 0.0, 800.0),
            bandwidth_max: bw,
            compute_max: 8e9,
            cache_max: cache_mbyte * 8e6,
            hover_power: 168.0,
            chip_coeff: 1e-28,
        }
    }

    fn state(uavs: Vec<UavTwin>, task_mbyte: f64) -> NetworkState {
        let med = MedTwin {
            position: Position::new(0.0, 0.0, 0.0),
            task_size: task_mbyte * 8e6,
            complexity: 100.0,
            tx_power: 0.08,
            deadline: 0.3,
        };
        snapshot(med, uavs, 16e6, 0, Channel::default()).unwrap()
    }

    fn light_weights() -> WeightConfig {
        WeightConfig {
            compute_penalty: 0.05,
            ..WeightConfig::default()
        }
    }

    #[test]
    fn pareto_examples() {
        let a = vec![(0, 1.0), (1, 2.0)];
        assert!(!pareto_dominates(&a, &a).unwrap());
        let up = vec![(0, 1.1), (1, 2.1)];
        assert!(pareto_dominates(&up, &a).unwrap());
        let mixed = vec![(0, 1.5), (1, 1.5)];
        assert!(!pareto_dominates(&mixed, &a).unwrap());
        let other = vec![(0, 1.0), (2, 2.0)];
        assert!(matches!(
            pareto_dominates(&other, &a),
            Err(Error::InvalidComparison(_))
        ));
    }

    #[test]
    fn merge_into_itself_is_an_error() {
        let s = state(vec![uav(0.0, 2e6, 1.0), uav(100.0, 2e6, 1.0)], 10.0);
        let w = WeightConfig::default();
        let game = Game::new(&s, &w);
        let p = game.evaluate(Grouping::singletons(2), 0).unwrap();
        assert!(matches!(try_merge(&game, &p, 1, 1), Err(Error::InvalidComparison(_))));
    }

    #[test]
    fn idle_uavs_take_over_when_pooling_pays() {
        // UAV 0 serves alone; UAVs 1 and 2 together beat it and both profit.
        let s = state(
            vec![uav(0.0, 3e6, 1.0), uav(50.0, 3e6, 1.0), uav(60.0, 3e6, 1.0)],
            25.0,
        );
        let w = light_weights();
        let game = Game::new(&s, &w);
        let p = game.evaluate(Grouping::singletons(3), 0).unwrap();
        assert_eq!(p.serving, Some(0));
        let merged = try_merge(&game, &p, 1, 2).unwrap().expect("takeover applies");
        assert_eq!(merged.coalitions, vec![vec![0], vec![1, 2]]);
        assert_eq!(merged.serving, Some(1));
        assert!(merged.utility_of(1) > 0.0 && merged.utility_of(2) > 0.0);
    }

    #[test]
    fn unreachable_pair_does_not_merge() {
        let mut s = state(vec![uav(0.0, 2e6, 1.0), uav(100.0, 2e6, 1.0)], 10.0);
        s.capacities = vec![0.0, 0.0];
        let w = WeightConfig::default();
        let game = Game::new(&s, &w);
        let p = game.evaluate(Grouping::singletons(2), 0).unwrap();
        assert!(try_merge(&game, &p, 0, 1).unwrap().is_none());
    }

    #[test]
    fn idle_member_splits_off() {
        // A tiny task leaves UAV 1 with no share while it hovers with UAV 0.
        let s = state(vec![uav(0.0, 3e6, 1.0), uav(700.0, 1e6, 1.0)], 0.05);
        let w = WeightConfig::default();
        let game = Game::new(&s, &w);
        let together = game.evaluate(Grouping(vec![vec![0, 1]]), 0).unwrap();
        assert_eq!(together.allocations[0].shares[1], 0.0);
        assert!(together.utility_of(1) < 0.0);
        let split = try_split(&game, &together, 0, &[0]).unwrap().expect("peel-off applies");
        assert_eq!(split.utility_of(1), 0.0);
        assert!(split.utility_of(0) >= together.utility_of(0));
    }

    #[test]
    fn singleton_has_no_bipartition_and_bad_parts_are_rejected() {
        assert!(split_candidates(&[4]).is_empty());
        assert_eq!(split_candidates(&[1, 2, 3]).len(), 3);
        assert_eq!(split_candidates(&[0, 1, 2, 3, 4, 5]).len(), 31);
        assert_eq!(split_candidates(&[0, 1, 2, 3, 4, 5, 6]).len(), 7);

        let s = state(vec![uav(0.0, 2e6, 1.0), uav(100.0, 2e6, 1.0)], 10.0);
        let w = WeightConfig::default();
        let game = Game::new(&s, &w);
        let p = game.evaluate(Grouping(vec![vec![0, 1]]), 0).unwrap();
        for bad in [&[][..], &[0, 1][..], &[5][..], &[0, 0][..]] {
            assert!(matches!(try_split(&game, &p, 0, bad), Err(Error::InvalidComparison(_))));
        }
    }

    #[test]
    fn pooled_coalition_does_not_split_when_both_halves_lose() {
        let s = state(vec![uav(0.0, 3e6, 1.0), uav(0.0, 3e6, 1.0)], 25.0);
        let w = WeightConfig {
            satisfaction: 200.0,
            ..light_weights()
        };
        let game = Game::new(&s, &w);
        let together = game.evaluate(Grouping(vec![vec![0, 1]]), 0).unwrap();
        // Apart, only one half serves; the other drops to zero.
        assert!(together.utility_of(0) > 0.0 && together.utility_of(1) > 0.0);
        assert!(try_split(&game, &together, 0, &[0]).unwrap().is_none());
    }

    #[test]
    fn stable_start_costs_one_scan() {
        let s = state(vec![uav(0.0, 2e6, 1.0), uav(300.0, 2e6, 1.0), uav(600.0, 2e6, 1.0)], 10.0);
        let w = WeightConfig::default();
        let game = Game::new(&s, &w);
        let start = game.evaluate(Grouping::singletons(3), 0).unwrap();
        let first = stabilize(&game, start, StabilizeLimits::default()).unwrap();
        assert!(first.converged);
        let again = stabilize(&game, first.final_partition.clone(), StabilizeLimits::default()).unwrap();
        assert!(again.converged);
        assert_eq!(again.merges_applied + again.splits_applied, 0);
        let k = again.final_partition.coalitions.len();
        let splits: usize = again
            .final_partition
            .coalitions
            .iter()
            .map(|g| split_candidates(g).len())
            .sum();
        assert_eq!(again.iterations, k * (k - 1) / 2 + splits);
    }

    #[test]
    fn applied_moves_never_hurt_anyone() {
        let uavs = (0..6)
            .map(|k| uav(90.0 * k as f64, 1e6 + 7e5 * k as f64, 1.0 + 0.2 * k as f64))
            .collect();
        let s = state(uavs, 20.0);
        let w = light_weights();
        let game = Game::new(&s, &w);
        let start = game.evaluate(Grouping::singletons(6), 0).unwrap();
        let report = stabilize(&game, start, StabilizeLimits::default()).unwrap();
        assert!(report.converged);
        assert!(!report.log.is_empty());
        for m in &report.log {
            assert!(pareto_dominates(&m.after, &m.before).unwrap());
        }
        assert!(!has_improving_move(&game, &report.final_partition).unwrap());
        report.final_partition.grouping().validate(6).unwrap();
    }

    #[test]
    fn round_limit_reports_non_convergence() {
        let uavs = (0..4).map(|k| uav(40.0 * k as f64, 3e6, 1.0)).collect();
        let s = state(uavs, 25.0);
        let w = light_weights();
        let game = Game::new(&s, &w);
        let start = game.evaluate(Grouping::singletons(4), 0).unwrap();
        let report = stabilize(&game, start, StabilizeLimits { max_rounds: 1 }).unwrap();
        assert!(!report.converged);
        assert_eq!(report.merges_applied + report.splits_applied, 1);
    }

    #[test]
    fn grouping_validation() {
        assert!(Grouping(vec![vec![0], vec![1, 2]]).validate(3).is_ok());
        assert!(Grouping(vec![vec![0], vec![0, 1, 2]]).validate(3).is_err());
        assert!(Grouping(vec![vec![0], vec![2]]).validate(3).is_err());
        assert!(Grouping(vec![vec![0], vec![], vec![1]]).validate(2).is_err());
        let json = serde_json::to_string(&Grouping(vec![vec![0, 2], vec![1]])).unwrap();
        assert_eq!(json, "[[0,2],[1]]");
    }
}
