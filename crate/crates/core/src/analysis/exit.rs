use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{linear_fit, LinearFit};
use super::survival::{fit_tail, KaplanMeier, TailFit};
use crate::env::EnvironmentSpec;
use crate::error::{argument, Result};
use crate::rng::replica_stream;
use crate::walker::{exit_time, Observation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitScalingSpec {
    /// Half the growth period.
    pub k: u64,
    pub ells: Vec<u64>,
    pub replicas: usize,
    pub budget: u64,
    #[serde(default)]
    pub tail_threshold: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitRegime {
    /// Mean leaves per growth below `k`: finite mean, linear in the star size.
    Linear,
    /// Mean at least `k`: infinite mean, only tails are meaningful.
    HeavyTail,
    /// Mean not available in closed form.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitRow {
    pub ell: u64,
    pub replicas: usize,
    /// Mean of `min(exit time, budget)`.
    pub censored_mean: f64,
    pub censor_rate: f64,
    /// Kaplan–Meier median, when the survival curve drops to 1/2.
    pub median: Option<u64>,
    pub tail: Option<TailFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitScalingReport {
    pub s: u64,
    pub budget: u64,
    pub regime: ExitRegime,
    pub rows: Vec<ExitRow>,
    /// Censored mean against star size.
    pub fit: Option<LinearFit>,
    /// Raw exit times per row, in replica order.
    #[serde(skip)]
    pub observations: Vec<Vec<Observation>>,
}

/// Exit times from stars of each size in `spec.ells`. Row `j`, replica `i`
/// uses stream `(seed, j, i)`.
pub fn exit_scaling(env: &EnvironmentSpec, spec: &ExitScalingSpec, seed: u64) -> Result<ExitScalingReport> {
    if spec.k == 0 {
        return argument("k must be at least 1");
    }
    if spec.replicas == 0 || spec.ells.is_empty() {
        return argument("exit scaling needs replicas and at least one star size");
    }
    let s = 2 * spec.k;
    let sampler = env.sampler()?;
    let mut rows = Vec::with_capacity(spec.ells.len());
    let mut observations = Vec::with_capacity(spec.ells.len());
    for (j, &ell) in spec.ells.iter().enumerate() {
        let obs: Vec<Observation> = (0..spec.replicas as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = replica_stream(seed, j as u32, i);
                exit_time(ell, &sampler, s, spec.budget, &mut rng).map(|r| r.time)
            })
            .collect::<Result<_>>()?;
        rows.push(summarize(ell, &obs, spec.tail_threshold));
        observations.push(obs);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.ell as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.censored_mean).collect();
    let regime = match env.mean() {
        Some(mu) if mu < spec.k as f64 => ExitRegime::Linear,
        Some(_) => ExitRegime::HeavyTail,
        None => ExitRegime::Unknown,
    };
    Ok(ExitScalingReport { s, budget: spec.budget, regime, rows, fit: linear_fit(&xs, &ys), observations })
}

pub fn summarize(ell: u64, obs: &[Observation], tail_threshold: Option<u64>) -> ExitRow {
    let n = obs.len();
    let censored = obs.iter().filter(|o| o.is_censored()).count();
    let km = KaplanMeier::fit(obs);
    let median = km.times.iter().zip(&km.survival).find(|(_, &s)| s <= 0.5).map(|(&t, _)| t);
    ExitRow {
        ell,
        replicas: n,
        censored_mean: obs.iter().map(|o| o.value() as f64).sum::<f64>() / n as f64,
        censor_rate: censored as f64 / n as f64,
        median,
        tail: fit_tail(obs, tail_threshold).ok(),
    }
}
