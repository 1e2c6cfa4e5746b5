use serde::{Deserialize, Serialize};

use super::stats::{mean, median, std_dev, Z99};
use super::{check_same_config, SeriesPoint};
use crate::error::{argument, Result};
use crate::walker::TrajectoryRecord;

/// Terminal `depth / n` across replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    pub replicas: usize,
    pub horizon: u64,
    pub mean: f64,
    /// 99% normal-approximation interval, clipped to `[0, 1]`.
    pub lower: f64,
    pub upper: f64,
    pub values: Vec<f64>,
    /// Median of `depth / n` over replicas at each sampled time `n > 0`.
    pub median_series: Vec<SeriesPoint>,
}

pub fn estimate_speed(records: &[TrajectoryRecord]) -> Result<SpeedEstimate> {
    check_same_config(records)?;
    let horizon = records[0].horizon;
    if horizon == 0 {
        return argument("speed needs a positive horizon");
    }
    let values: Vec<f64> = records.iter().map(|r| r.final_depth as f64 / horizon as f64).collect();
    let m = mean(&values);
    let half = Z99 * std_dev(&values) / (values.len() as f64).sqrt();
    let times: Vec<u64> = records[0].samples.iter().map(|s| s.n).filter(|&n| n > 0).collect();
    let mut median_series = Vec::with_capacity(times.len());
    for (j, &n) in times.iter().enumerate() {
        let col: Vec<f64> = records
            .iter()
            .map(|r| {
                let s = &r.samples[j + 1];
                debug_assert_eq!(s.n, n);
                s.depth as f64 / n as f64
            })
            .collect();
        median_series.push(SeriesPoint { n, value: median(&col).unwrap_or(0.0) });
    }
    Ok(SpeedEstimate {
        replicas: records.len(),
        horizon,
        mean: m,
        lower: (m - half).clamp(0.0, 1.0),
        upper: (m + half).clamp(0.0, 1.0),
        values,
        median_series,
    })
}
