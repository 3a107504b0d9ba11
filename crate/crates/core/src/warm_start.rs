//! Initial coalition structures for the stabilization loop, and the
//! strategy dataset that replay draws from.
//!
//! Replayed partitions are stored by capacity rank rather than by UAV index:
//! rank 0 is the UAV with the largest share cap at full bandwidth. A recorded
//! structure is mapped onto a new instance by matching ranks, so it transfers
//! between instances whose UAVs are numbered differently.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::allocator::member_cap;
use crate::engine::{Grouping, StabilizationReport};
use crate::error::{Error, Result};
use crate::twin::NetworkState;
use crate::units::BITS_PER_MBYTE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WarmStartKind {
    Cold,
    Replay,
    Heuristic,
}

impl WarmStartKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WarmStartKind::Cold => "cold",
            WarmStartKind::Replay => "replay",
            WarmStartKind::Heuristic => "heuristic",
        }
    }
}

impl std::fmt::Display for WarmStartKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for WarmStartKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [WarmStartKind::Cold, WarmStartKind::Replay, WarmStartKind::Heuristic]
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown warm start `{s}`")))
    }
}

/// A recorded stable structure and the scenario it was found for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRecord {
    pub feature_vector: Vec<f64>,
    /// Coalitions of capacity ranks.
    pub partition: Grouping,
    pub achieved_utility: f64,
}

impl StrategyRecord {
    pub fn n_uavs(&self) -> usize {
        self.partition.0.iter().map(Vec::len).sum()
    }

    fn validate(&self) -> Result<()> {
        if self.feature_vector.iter().any(|x| !x.is_finite()) {
            return Err(Error::RecordRejected("non-finite feature".into()));
        }
        self.partition
            .validate(self.n_uavs())
            .map_err(|e| Error::RecordRejected(e.to_string()))
    }
}

// Midpoints of the nominal parameter ranges, used to make features scale-free.
const TASK_MID_BITS: f64 = 15.0 * BITS_PER_MBYTE;
const COMPLEXITY_MID: f64 = 175.0;
const DEADLINE_MID: f64 = 0.325;
const FLEET_MID: f64 = 17.5;
const CAP_MID_BITS: f64 = 1.5 * BITS_PER_MBYTE;

fn full_caps(state: &NetworkState) -> Vec<f64> {
    (0..state.n_uavs())
        .map(|j| member_cap(state, j, state.uavs[j].bandwidth_max))
        .collect()
}

/// UAV indices ordered by share cap at full bandwidth, largest first; ties
/// keep index order.
pub fn capacity_ranking(state: &NetworkState) -> Vec<usize> {
    let caps = full_caps(state);
    let mut order: Vec<usize> = (0..caps.len()).collect();
    order.sort_by(|&a, &b| caps[b].total_cmp(&caps[a]));
    order
}

/// Normalized descriptor: task size, complexity, deadline, fleet size, then
/// the mean, largest and smallest per-UAV share caps.
pub fn feature_vector(state: &NetworkState) -> Vec<f64> {
    let caps = full_caps(state);
    let n = caps.len() as f64;
    let mean = caps.iter().sum::<f64>() / n;
    let max = caps.iter().copied().fold(0.0, f64::max);
    let min = caps.iter().copied().fold(f64::INFINITY, f64::min);
    vec![
        state.med.task_size / TASK_MID_BITS,
        state.med.complexity / COMPLEXITY_MID,
        state.med.deadline / DEADLINE_MID,
        n / FLEET_MID,
        mean / CAP_MID_BITS,
        max / CAP_MID_BITS,
        min / CAP_MID_BITS,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStartProvider {
    pub kind: WarmStartKind,
    #[serde(default)]
    pub dataset_path: Option<PathBuf>,
    #[serde(skip)]
    records: Vec<StrategyRecord>,
}

/// A proposed initial grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct Proposal {
    pub grouping: Grouping,
    /// Replay found no usable record and used the heuristic instead.
    pub fell_back: bool,
}

impl WarmStartProvider {
    pub fn cold() -> Self {
        Self::new(WarmStartKind::Cold, None)
    }

    pub fn heuristic() -> Self {
        Self::new(WarmStartKind::Heuristic, None)
    }

    pub fn new(kind: WarmStartKind, dataset_path: Option<PathBuf>) -> Self {
        WarmStartProvider {
            kind,
            dataset_path,
            records: Vec::new(),
        }
    }

    /// Replay over in-memory records.
    pub fn with_records(records: Vec<StrategyRecord>) -> Self {
        WarmStartProvider {
            kind: WarmStartKind::Replay,
            dataset_path: None,
            records,
        }
    }

    /// Reads the dataset for replay. A missing file leaves the provider
    /// without records, so proposals fall back to the heuristic.
    pub fn load(mut self) -> Result<Self> {
        if self.kind == WarmStartKind::Replay {
            if let Some(path) = &self.dataset_path {
                if path.exists() {
                    self.records = load_dataset(path)?;
                }
            }
        }
        Ok(self)
    }

    pub fn records(&self) -> &[StrategyRecord] {
        &self.records
    }

    pub fn propose(&self, state: &NetworkState) -> Proposal {
        let n = state.n_uavs();
        match self.kind {
            WarmStartKind::Cold => Proposal {
                grouping: Grouping::singletons(n),
                fell_back: false,
            },
            WarmStartKind::Heuristic => Proposal {
                grouping: heuristic_grouping(state),
                fell_back: false,
            },
            WarmStartKind::Replay => match self.nearest(state) {
                Some(record) => {
                    let ranking = capacity_ranking(state);
                    let groups = record
                        .partition
                        .0
                        .iter()
                        .map(|g| g.iter().map(|&rank| ranking[rank]).collect())
                        .collect();
                    Proposal {
                        grouping: Grouping(groups).canonical(),
                        fell_back: false,
                    }
                }
                None => Proposal {
                    grouping: heuristic_grouping(state),
                    fell_back: true,
                },
            },
        }
    }

    fn nearest(&self, state: &NetworkState) -> Option<&StrategyRecord> {
        let n = state.n_uavs();
        let query = feature_vector(state);
        let mut best: Option<(f64, &StrategyRecord)> = None;
        for record in self.records.iter().filter(|r| r.n_uavs() == n) {
            if record.feature_vector.len() != query.len() {
                continue;
            }
            let d: f64 = record
                .feature_vector
                .iter()
                .zip(&query)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, record));
            }
        }
        best.map(|(_, r)| r)
    }
}

/// Largest-cap UAVs are grouped until their caps cover the task; everyone
/// else starts alone.
pub fn heuristic_grouping(state: &NetworkState) -> Grouping {
    let caps = full_caps(state);
    let mut group = Vec::new();
    let mut covered = 0.0;
    let mut rest = Vec::new();
    for j in capacity_ranking(state) {
        if covered < state.med.task_size && caps[j] > 0.0 {
            group.push(j);
            covered += caps[j];
        } else {
            rest.push(vec![j]);
        }
    }
    let mut groups = Vec::with_capacity(rest.len() + 1);
    if !group.is_empty() {
        groups.push(group);
    }
    groups.extend(rest);
    Grouping(groups).canonical()
}

/// Builds the record for a converged stabilization of `state`.
pub fn make_record(state: &NetworkState, report: &StabilizationReport) -> Result<StrategyRecord> {
    if !report.converged {
        return Err(Error::RecordRejected("stabilization did not converge".into()));
    }
    let ranking = capacity_ranking(state);
    let mut rank_of = vec![0; ranking.len()];
    for (rank, &j) in ranking.iter().enumerate() {
        rank_of[j] = rank;
    }
    let partition = Grouping(
        report
            .final_partition
            .coalitions
            .iter()
            .map(|g| g.iter().map(|&j| rank_of[j]).collect())
            .collect(),
    )
    .canonical();
    let record = StrategyRecord {
        feature_vector: feature_vector(state),
        partition,
        achieved_utility: report.final_partition.total_utility(),
    };
    record.validate()?;
    Ok(record)
}

/// Appends one record for `report` to the NDJSON dataset at `path`.
pub fn record(path: &Path, state: &NetworkState, report: &StabilizationReport) -> Result<StrategyRecord> {
    let rec = make_record(state, report)?;
    append_records(path, std::slice::from_ref(&rec))?;
    Ok(rec)
}

pub fn append_records(path: &Path, records: &[StrategyRecord]) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::new();
    for rec in records {
        serde_json::to_writer(&mut buf, rec)?;
        buf.push(b'\n');
    }
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Vec<StrategyRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: StrategyRecord = serde_json::from_str(&line)?;
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}
