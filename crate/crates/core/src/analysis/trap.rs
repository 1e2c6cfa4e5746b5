use serde::{Deserialize, Serialize};

use crate::error::{argument, Result};
use crate::tree::VertexId;
use crate::walker::TrajectoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapVerdict {
    pub trapped: bool,
    pub center: Option<VertexId>,
    /// Residue `k < s` of the times at which the walker sits on `center`.
    pub offset: Option<u64>,
}

/// Finite-window proxy for trapping: some residue class of times mod `s`
/// sees the walker on one vertex at every sample in the last `window` steps.
/// A positive answer is exact on the window; a trap that forms later than
/// the window start is missed.
pub fn detect_trap(record: &TrajectoryRecord, window: u64, s: u64) -> Result<TrapVerdict> {
    if window == 0 || s == 0 {
        return argument("trap detection needs a positive window and period");
    }
    if record.horizon < window.saturating_mul(2) {
        return argument(format!("horizon {} is shorter than twice the window {window}", record.horizon));
    }
    let start = record.horizon - window;
    let first = record.samples.partition_point(|x| x.n <= start);
    let tail = &record.samples[first..];
    if tail.is_empty() {
        return argument("no samples fall inside the trap window");
    }
    for k in 0..s {
        let mut hits = tail.iter().filter(|x| x.n % s == k);
        let Some(head) = hits.next() else { continue };
        if hits.all(|x| x.vertex == head.vertex) {
            return Ok(TrapVerdict { trapped: true, center: Some(head.vertex), offset: Some(k) });
        }
    }
    Ok(TrapVerdict { trapped: false, center: None, offset: None })
}
