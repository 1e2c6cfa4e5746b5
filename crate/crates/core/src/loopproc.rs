//! The generalized loop process: a walk on a path `0..=len` whose vertices
//! carry loops instead of leaves. Its hitting time of 0 is stochastically
//! smaller than the tree walk's hitting time of the matching ancestor.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env::{EnvironmentSpec, Sampler};
use crate::error::{argument, Error, Result};
use crate::rng::replica_stream;
use crate::tree::{GrowingTree, VertexId};
use crate::walker::{first_hitting_time, Observation};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BackboneJson", into = "BackboneJson")]
pub struct Backbone {
    loops: Vec<u64>,
    pub position: usize,
    pub time: u64,
}

#[derive(Serialize, Deserialize)]
struct BackboneJson {
    length: usize,
    loops: Vec<u64>,
    #[serde(default)]
    position: Option<usize>,
    #[serde(default)]
    time: u64,
}

impl From<Backbone> for BackboneJson {
    fn from(b: Backbone) -> Self {
        Self { length: b.length(), loops: b.loops, position: Some(b.position), time: b.time }
    }
}

impl TryFrom<BackboneJson> for Backbone {
    type Error = Error;

    fn try_from(j: BackboneJson) -> Result<Self> {
        if j.loops.len() != j.length + 1 {
            return argument(format!("backbone of length {} needs {} loop counts", j.length, j.length + 1));
        }
        let mut b = Backbone::new(j.loops)?;
        if let Some(p) = j.position {
            if p > j.length {
                return argument(format!("position {p} is off the backbone"));
            }
            b.position = p;
        }
        b.time = j.time;
        Ok(b)
    }
}

impl Backbone {
    /// Path of length `loops.len() - 1`, walker at the far end.
    pub fn new(loops: Vec<u64>) -> Result<Self> {
        if loops.len() < 2 {
            return argument("a backbone needs length at least 1");
        }
        if *loops.last().unwrap() == 0 {
            return Err(Error::ShapeViolation("no loop at the far end of the backbone".into()));
        }
        let position = loops.len() - 1;
        Ok(Self { loops, position, time: 0 })
    }

    pub fn length(&self) -> usize {
        self.loops.len() - 1
    }

    pub fn loops(&self) -> &[u64] {
        &self.loops
    }

    fn path_neighbors(&self, i: usize) -> u64 {
        u64::from(i > 0) + u64::from(i < self.length())
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.path_neighbors(i) + self.loops[i]
    }
}

/// Backbone of the path from ancestor `z` (index 0) to `x0` (index `len`).
/// Every neighbour of a path vertex that is off the path, pristine leaves
/// and the root self-loop included, becomes a loop.
pub fn build_backbone(tree: &GrowingTree, z: VertexId, x0: VertexId) -> Result<Backbone> {
    if !tree.contains(z) || !tree.contains(x0) {
        return argument("backbone endpoints must be materialized vertices");
    }
    if !tree.is_ancestor(z, x0) {
        return argument(format!("{z} is not an ancestor of {x0}"));
    }
    let len = (tree.depth(x0) - tree.depth(z)) as usize;
    if len < 2 {
        return argument(format!("{z} is at distance {len} from {x0}; need at least 2"));
    }
    let mut path = Vec::with_capacity(len + 1);
    let mut v = x0;
    path.push(v);
    while v != z {
        v = tree.parent(v).expect("ancestor walk reached the root");
        path.push(v);
    }
    path.reverse();
    let loops: Vec<u64> = path
        .iter()
        .enumerate()
        .map(|(i, &p)| tree.degree(p) - u64::from(i > 0) - u64::from(i < len))
        .collect();
    Backbone::new(loops)
}

/// Grow (when `time % s == 0`) then move uniformly over the edges at the
/// current position. A loop choice keeps the position.
#[inline]
pub fn loop_step<R: Rng + ?Sized>(b: &mut Backbone, env: &Sampler, s: u64, rng: &mut R) {
    let i = b.position;
    if b.time % s == 0 {
        b.loops[i] = b.loops[i].saturating_add(env.sample(b.time, rng));
    }
    let degree = b.degree(i);
    let mut slot = rng.random_range(0..degree);
    if i > 0 {
        if slot == 0 {
            b.position -= 1;
            b.time += 1;
            return;
        }
        slot -= 1;
    }
    if i < b.length() && slot == 0 {
        b.position += 1;
    }
    b.time += 1;
}

/// First `t >= 0` with the process at index 0.
pub fn run_loop_process<R: Rng + ?Sized>(
    mut b: Backbone,
    env: &Sampler,
    s: u64,
    budget: u64,
    rng: &mut R,
) -> Result<Observation> {
    if s == 0 {
        return argument("growth period s must be at least 1");
    }
    while b.position != 0 {
        if b.time >= budget {
            return Ok(Observation::Timeout(budget));
        }
        loop_step(&mut b, env, s, rng);
    }
    Ok(Observation::Observed(b.time))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub t: u64,
    pub tbrw: f64,
    pub loop_process: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub length: usize,
    pub replicas: usize,
    pub budget: u64,
    /// Both empirical CDFs at every observed time.
    pub cdf: Vec<CdfPoint>,
    pub tbrw_censored: usize,
    pub loop_censored: usize,
    /// Largest `F_tbrw(t) - F_loop(t)`, floored at 0.
    pub max_excess: f64,
    pub worst_time: Option<u64>,
    /// Sum of the two one-sided DKW half-widths at 99% joint confidence.
    pub band: f64,
    pub violated: bool,
    /// Raw hitting times in replica order.
    #[serde(skip)]
    pub tbrw_times: Vec<Observation>,
    #[serde(skip)]
    pub loop_times: Vec<Observation>,
}

/// One-sided DKW half-width for `n` samples at level `alpha`.
pub fn dkw_epsilon(n: usize, alpha: f64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    ((1.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

const DOMINANCE_ALPHA: f64 = 0.01;

/// Compares the law of the tree walk's hitting time of `z` with the loop
/// process on the extracted backbone. Replica `i` of the tree walk uses
/// stream `(seed, 0, i)`, the loop process `(seed, 1, i)`.
#[allow(clippy::too_many_arguments)]
pub fn dominance_check(
    tree0: &GrowingTree,
    z: VertexId,
    x0: VertexId,
    env: &EnvironmentSpec,
    s: u64,
    budget: u64,
    replicas: usize,
    seed: u64,
) -> Result<DominanceReport> {
    if replicas == 0 {
        return argument("dominance check needs at least one replica");
    }
    let backbone = build_backbone(tree0, z, x0)?;
    let sampler = env.sampler()?;
    let tbrw: Vec<Observation> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_stream(seed, 0, i);
            first_hitting_time(tree0, x0, z, &sampler, s, budget, &mut rng).map(|r| r.time)
        })
        .collect::<Result<_>>()?;
    let looped: Vec<Observation> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_stream(seed, 1, i);
            run_loop_process(backbone.clone(), &sampler, s, budget, &mut rng)
        })
        .collect::<Result<_>>()?;
    Ok(compare(backbone.length(), budget, tbrw, looped))
}

fn sorted_observed(obs: &[Observation]) -> Vec<u64> {
    let mut v: Vec<u64> = obs.iter().filter_map(|o| o.observed()).collect();
    v.sort_unstable();
    v
}

fn compare(length: usize, budget: u64, tbrw: Vec<Observation>, looped: Vec<Observation>) -> DominanceReport {
    let a = sorted_observed(&tbrw);
    let b = sorted_observed(&looped);
    let mut times: Vec<u64> = a.iter().chain(&b).copied().collect();
    times.sort_unstable();
    times.dedup();
    let (na, nb) = (tbrw.len() as f64, looped.len() as f64);
    let mut cdf = Vec::with_capacity(times.len());
    let mut max_excess = 0.0;
    let mut worst_time = None;
    for &t in &times {
        let fa = a.partition_point(|&x| x <= t) as f64 / na;
        let fb = b.partition_point(|&x| x <= t) as f64 / nb;
        if fa - fb > max_excess {
            max_excess = fa - fb;
            worst_time = Some(t);
        }
        cdf.push(CdfPoint { t, tbrw: fa, loop_process: fb });
    }
    let band = dkw_epsilon(tbrw.len(), DOMINANCE_ALPHA / 2.0) + dkw_epsilon(looped.len(), DOMINANCE_ALPHA / 2.0);
    DominanceReport {
        length,
        replicas: tbrw.len(),
        budget,
        cdf,
        tbrw_censored: tbrw.len() - a.len(),
        loop_censored: looped.len() - b.len(),
        max_excess,
        worst_time,
        band,
        violated: max_excess > band,
        tbrw_times: tbrw,
        loop_times: looped,
    }
}
