use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::stats::{Proportion, Z99};
use crate::env::{EnvironmentSpec, Sampler};
use crate::error::{argument, config, Result};
use crate::rng::replica_stream;
use crate::tree::{GrowingTree, TreeShape, VertexId};
use crate::walker::{first_hitting_time, step, WalkerState};

/// Largest step budget a probe may request.
pub const MAX_PROBE_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlEstimate {
    pub r: u64,
    pub alpha: f64,
    pub s: u64,
    pub budget: u64,
    /// Reaching depth `2r` within the budget from a leaf at depth `r`.
    pub right: Proportion,
    /// Climbing `r` levels within the budget from the same start.
    pub left: Proportion,
}

fn stretched_budget(r: u64, alpha: f64) -> Result<u64> {
    let b = (r as f64).powf(alpha).exp().floor();
    if b > MAX_PROBE_BUDGET as f64 {
        let r_max = (MAX_PROBE_BUDGET as f64).ln().powf(1.0 / alpha).floor();
        return config(format!(
            "budget exp(r^alpha) = {b:e} exceeds the cap {MAX_PROBE_BUDGET}; largest feasible r is {r_max}"
        ));
    }
    Ok(b as u64)
}

fn path_tip(r: u64) -> Result<(GrowingTree, VertexId)> {
    let len = u32::try_from(r).map_err(|_| crate::Error::Argument(format!("r = {r} is too large")))?;
    Ok((GrowingTree::new(&TreeShape::Path { length: len, loop_at_root: true })?, VertexId(len)))
}

fn right_probe<R: rand::Rng + ?Sized>(
    tree0: &GrowingTree,
    x0: VertexId,
    env: &Sampler,
    s: u64,
    budget: u64,
    rng: &mut R,
) -> Result<bool> {
    let goal = 2 * tree0.depth(x0);
    let mut tree = tree0.clone();
    let mut state = WalkerState::new(x0, s)?;
    while state.time < budget {
        step(&mut state, &mut tree, env, rng);
        if tree.depth(state.position) >= goal {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Empirical right/left probabilities with budget `floor(exp(r^alpha))`.
/// Replica `i` uses stream `(seed, 0, i)` for the right probe and
/// `(seed, 1, i)` for the left probe.
pub fn estimate_rl(r: u64, alpha: f64, env: &EnvironmentSpec, s: u64, replicas: usize, seed: u64) -> Result<RlEstimate> {
    if r == 0 {
        return argument("r must be at least 1");
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return config(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    let budget = stretched_budget(r, alpha)?;
    let sampler = env.sampler()?;
    let (tree0, x0) = path_tip(r)?;
    let right = (0..replicas as u64)
        .into_par_iter()
        .map(|i| right_probe(&tree0, x0, &sampler, s, budget, &mut replica_stream(seed, 0, i)))
        .collect::<Result<Vec<bool>>>()?;
    let left = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            first_hitting_time(&tree0, x0, VertexId::ROOT, &sampler, s, budget, &mut replica_stream(seed, 1, i))
                .map(|h| !h.time.is_censored())
        })
        .collect::<Result<Vec<bool>>>()?;
    let count = |v: &[bool]| v.iter().filter(|&&b| b).count() as u64;
    Ok(RlEstimate {
        r,
        alpha,
        s,
        budget,
        right: Proportion::wilson(count(&right), replicas as u64, Z99),
        left: Proportion::wilson(count(&left), replicas as u64, Z99),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingRow {
    pub ell: u64,
    pub budget: u64,
    pub hits: Proportion,
    /// `sqrt(ell) * P(hit within budget)`.
    pub c_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingTailReport {
    pub s: u64,
    pub rows: Vec<HittingRow>,
    /// Ratio of the largest to the smallest `c_estimate`, if all are positive.
    pub c_spread: Option<f64>,
}

/// `P(hit the root within floor(exp(sqrt(ell))) steps)` from the tip of a
/// path of length `ell` with a root self-loop. Row `j` uses lane `j`.
pub fn hitting_tail(ells: &[u64], env: &EnvironmentSpec, s: u64, replicas: usize, seed: u64) -> Result<HittingTailReport> {
    if ells.is_empty() || replicas == 0 {
        return argument("hitting tail needs replicas and at least one path length");
    }
    let sampler = env.sampler()?;
    let mut rows = Vec::with_capacity(ells.len());
    for (j, &ell) in ells.iter().enumerate() {
        if ell == 0 {
            return argument("path length must be at least 1");
        }
        let budget = stretched_budget(ell, 0.5)?;
        let (tree0, x0) = path_tip(ell)?;
        let hits = (0..replicas as u64)
            .into_par_iter()
            .map(|i| {
                first_hitting_time(&tree0, x0, VertexId::ROOT, &sampler, s, budget, &mut replica_stream(seed, j as u32, i))
                    .map(|h| u64::from(!h.time.is_censored()))
            })
            .collect::<Result<Vec<u64>>>()?
            .into_iter()
            .sum();
        let p = Proportion::wilson(hits, replicas as u64, Z99);
        rows.push(HittingRow { ell, budget, c_estimate: (ell as f64).sqrt() * p.estimate, hits: p });
    }
    let cs: Vec<f64> = rows.iter().map(|r| r.c_estimate).collect();
    let min = cs.iter().copied().fold(f64::INFINITY, f64::min);
    let max = cs.iter().copied().fold(0.0, f64::max);
    Ok(HittingTailReport { s, rows, c_spread: (min > 0.0).then(|| max / min) })
}
