//! Estimators over trajectory, hitting and exit records. Every function is
//! a pure function of its inputs; the ones that simulate take an explicit
//! seed and are independent of the number of worker threads.

mod exit;
mod probe;
pub mod stats;
mod speed;
mod structure;
pub mod survival;
mod trap;
mod zprocess;

use serde::{Deserialize, Serialize};

pub use exit::{exit_scaling, summarize as summarize_exit_times, ExitRegime, ExitRow, ExitScalingReport, ExitScalingSpec};
pub use probe::{estimate_rl, hitting_tail, HittingRow, HittingTailReport, RlEstimate, MAX_PROBE_BUDGET};
pub use speed::{estimate_speed, SpeedEstimate};
pub use stats::{LinearFit, Proportion};
pub use structure::{height_and_degrees, recurrence_evidence, HeightReport, RecurrenceEvidence};
pub use survival::{fit_tail, KaplanMeier, TailFit};
pub use trap::{detect_trap, TrapVerdict};
pub use zprocess::{extract_z_process, quasi_star_stats, QuasiStarStats, ZProcessRecord};

use crate::error::{argument, Result};
use crate::walker::TrajectoryRecord;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub n: u64,
    pub value: f64,
}

fn check_same_config(records: &[TrajectoryRecord]) -> Result<()> {
    let Some(first) = records.first() else {
        return argument("no records to analyse");
    };
    for r in &records[1..] {
        if r.s != first.s || r.horizon != first.horizon || r.stride != first.stride || r.env != first.env {
            return argument("records come from different configurations");
        }
    }
    Ok(())
}
