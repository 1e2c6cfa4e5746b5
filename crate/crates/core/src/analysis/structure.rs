use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::stats::{median_u64, Proportion, Z99};
use super::SeriesPoint;
use crate::error::{argument, Result};
use crate::tree::VertexId;
use crate::walker::TrajectoryRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightReport {
    /// Median tree height at each checkpoint.
    pub median_height: Vec<SeriesPoint>,
    /// Degree counts summed over the final trees.
    pub degree_histogram: BTreeMap<u64, u64>,
    pub leaf_fraction: f64,
}

fn sample_at(record: &TrajectoryRecord, n: u64) -> Result<&crate::walker::Sample> {
    match record.samples.binary_search_by_key(&n, |x| x.n) {
        Ok(i) => Ok(&record.samples[i]),
        Err(_) => argument(format!("record has no sample at time {n}")),
    }
}

pub fn height_and_degrees(records: &[TrajectoryRecord], checkpoints: &[u64]) -> Result<HeightReport> {
    let mut median_height = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let heights = records.iter().map(|r| sample_at(r, n).map(|x| x.height)).collect::<Result<Vec<_>>>()?;
        median_height.push(SeriesPoint { n, value: median_u64(&heights).unwrap_or(0.0) });
    }
    let mut degree_histogram = BTreeMap::new();
    for r in records {
        for (&d, &c) in &r.final_tree.degree_histogram {
            let e = degree_histogram.entry(d).or_insert(0u64);
            *e = e.saturating_add(c);
        }
    }
    let total: u64 = degree_histogram.values().fold(0u64, |a, &c| a.saturating_add(c));
    let leaves = degree_histogram.get(&1).copied().unwrap_or(0);
    Ok(HeightReport {
        median_height,
        degree_histogram,
        leaf_fraction: if total == 0 { 0.0 } else { leaves as f64 / total as f64 },
    })
}

/// Recurrence evidence for the root: late visits and the growth of the
/// self-loop crossing count. Evidence only; finite runs cannot decide recurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceEvidence {
    pub replicas: usize,
    pub horizon: u64,
    /// Replicas whose walker visited the root in `[horizon / 2, horizon]`.
    pub late_root_visits: Proportion,
    /// Median number of self-loop crossings before each checkpoint.
    pub median_crossings: Vec<SeriesPoint>,
}

pub fn recurrence_evidence(records: &[TrajectoryRecord], checkpoints: &[u64]) -> Result<RecurrenceEvidence> {
    super::check_same_config(records)?;
    let horizon = records[0].horizon;
    let mut late = 0;
    for r in records {
        let Some(root) = r.targets.iter().find(|t| t.vertex == VertexId::ROOT) else {
            return argument("recurrence evidence needs the root registered as a target");
        };
        if root.last_visit.is_some_and(|t| 2 * t >= horizon) {
            late += 1;
        }
    }
    let median_crossings = checkpoints
        .iter()
        .map(|&n| {
            let counts: Vec<u64> = records.iter().map(|r| r.crossings_before(n) as u64).collect();
            SeriesPoint { n, value: median_u64(&counts).unwrap_or(0.0) }
        })
        .collect();
    Ok(RecurrenceEvidence {
        replicas: records.len(),
        horizon,
        late_root_visits: Proportion::wilson(late, records.len() as u64, Z99),
        median_crossings,
    })
}
