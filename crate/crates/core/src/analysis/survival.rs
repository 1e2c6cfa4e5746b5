//! Kaplan–Meier survival and log-log tail fits for censored times.

use serde::{Deserialize, Serialize};

use super::stats::linear_fit;
use crate::error::{argument, Result};
use crate::walker::Observation;

/// Product-limit estimate of `P(T > t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KaplanMeier {
    /// Distinct event times, increasing.
    pub times: Vec<u64>,
    /// Survival just after each event time.
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub events: Vec<usize>,
    pub total: usize,
    pub censored: usize,
}

impl KaplanMeier {
    /// Censored observations at time `c` count as at risk for events at `c`.
    pub fn fit(obs: &[Observation]) -> Self {
        let mut sorted: Vec<(u64, bool)> = obs.iter().map(|o| (o.value(), o.is_censored())).collect();
        sorted.sort_unstable();
        let total = sorted.len();
        let censored = sorted.iter().filter(|(_, c)| *c).count();
        let mut times = Vec::new();
        let mut survival = Vec::new();
        let mut at_risk = Vec::new();
        let mut events = Vec::new();
        let mut s = 1.0;
        let mut i = 0;
        while i < total {
            let t = sorted[i].0;
            let risk = total - i;
            let mut deaths = 0;
            let mut j = i;
            while j < total && sorted[j].0 == t {
                deaths += usize::from(!sorted[j].1);
                j += 1;
            }
            if deaths > 0 {
                s *= 1.0 - deaths as f64 / risk as f64;
                times.push(t);
                survival.push(s);
                at_risk.push(risk);
                events.push(deaths);
            }
            i = j;
        }
        Self { times, survival, at_risk, events, total, censored }
    }

    /// `P(T > t)`.
    pub fn survival_at(&self, t: u64) -> f64 {
        match self.times.partition_point(|&x| x <= t) {
            0 => 1.0,
            k => self.survival[k - 1],
        }
    }
}

/// Minimum number of uncensored observations a tail fit may rest on.
pub const MIN_TAIL_EVENTS: usize = 30;
const GRID_POINTS: usize = 24;

/// Least squares slope of `ln P(T > t)` against `ln t` on a log-spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub slope: f64,
    pub std_error: f64,
    pub threshold: u64,
    /// Largest grid time; at least `MIN_TAIL_EVENTS` events lie at or above it.
    pub upper: u64,
    pub uncensored_above: usize,
    pub grid_points: usize,
}

/// Fit the survival tail above `threshold`. Without an explicit threshold,
/// the smallest event time is used.
pub fn fit_tail(obs: &[Observation], threshold: Option<u64>) -> Result<TailFit> {
    let mut events: Vec<u64> = obs.iter().filter_map(|o| o.observed()).collect();
    events.sort_unstable();
    let threshold = match threshold {
        Some(t) => t.max(1),
        None => events.first().copied().unwrap_or(1).max(1),
    };
    let above = events.len() - events.partition_point(|&t| t < threshold);
    if above < MIN_TAIL_EVENTS {
        return argument(format!(
            "only {above} uncensored times at or above {threshold}; a tail fit needs {MIN_TAIL_EVENTS}"
        ));
    }
    let upper = events[events.len() - MIN_TAIL_EVENTS];
    if upper <= threshold {
        return argument(format!("tail range [{threshold}, {upper}] is empty"));
    }
    let km = KaplanMeier::fit(obs);
    let (lo, hi) = ((threshold as f64).ln(), (upper as f64).ln());
    let mut grid: Vec<u64> = (0..GRID_POINTS)
        .map(|i| (lo + (hi - lo) * i as f64 / (GRID_POINTS - 1) as f64).exp().round() as u64)
        .collect();
    grid.dedup();
    let (xs, ys): (Vec<f64>, Vec<f64>) = grid
        .iter()
        .map(|&t| (t, km.survival_at(t)))
        .filter(|&(_, s)| s > 0.0)
        .map(|(t, s)| ((t as f64).ln(), s.ln()))
        .unzip();
    let Some(fit) = linear_fit(&xs, &ys) else {
        return argument("tail grid has fewer than two distinct points");
    };
    Ok(TailFit {
        slope: fit.slope,
        std_error: fit.slope_std_error,
        threshold,
        upper,
        uncensored_above: above,
        grid_points: xs.len(),
    })
}
