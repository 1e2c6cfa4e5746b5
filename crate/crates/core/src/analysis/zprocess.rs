use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::tree::VertexId;
use crate::walker::TrajectoryRecord;

/// The walk seen at even times, keeping only the moves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZProcessRecord {
    /// Positions after each move of the even-time chain.
    pub z: Vec<VertexId>,
    /// Even-chain index of each move: `z[k]` is the position at time `2 * phi[k]`.
    pub phi: Vec<u64>,
    pub depth: Vec<u64>,
    /// Number of self-loop crossings before time `2 * phi[k]`.
    pub segment: Vec<usize>,
    pub crossings: Vec<u64>,
}

pub fn extract_z_process(record: &TrajectoryRecord) -> Result<ZProcessRecord> {
    let evens: Vec<_> = record.samples.iter().filter(|x| x.n % 2 == 0).collect();
    let expected = if record.horizon == 0 { 0 } else { record.horizon / 2 + 1 };
    if evens.len() as u64 != expected || evens.iter().enumerate().any(|(i, x)| x.n != 2 * i as u64) {
        return argument("the even-time chain needs a sample at every even time");
    }
    let mut out = ZProcessRecord {
        z: Vec::new(),
        phi: Vec::new(),
        depth: Vec::new(),
        segment: Vec::new(),
        crossings: record.self_loop_crossings.clone(),
    };
    for pair in evens.windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        if cur.vertex != prev.vertex {
            out.z.push(cur.vertex);
            out.phi.push(cur.n / 2);
            out.depth.push(cur.depth);
            out.segment.push(record.crossings_before(cur.n));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiStarStats {
    pub growth_epochs: u64,
    pub quasi_star_epochs: u64,
    pub fraction: f64,
}

/// How often the walker stands on a quasi-star when growth is due.
pub fn quasi_star_stats(record: &TrajectoryRecord) -> Result<QuasiStarStats> {
    let s = record.s;
    let epochs: Vec<_> = record.samples.iter().filter(|x| x.n % s == 0 && x.n < record.horizon).collect();
    let expected = record.horizon.div_ceil(s);
    if epochs.len() as u64 != expected {
        return argument("quasi-star statistics need a sample at every growth epoch");
    }
    let hits = epochs.iter().filter(|x| x.leaves >= 1 && x.degree == x.leaves + 1).count() as u64;
    Ok(QuasiStarStats {
        growth_epochs: expected,
        quasi_star_epochs: hits,
        fraction: if expected == 0 { 0.0 } else { hits as f64 / expected as f64 },
    })
}
