//! Walker dynamics: growth at times divisible by `s`, then a uniform move
//! over the edges of the grown tree.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{EnvironmentSpec, Sampler};
use crate::error::{argument, Result};
use crate::tree::{GrowingTree, MoveOutcome, TreeShape, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkerState {
    pub time: u64,
    pub position: VertexId,
    pub s: u64,
    pub self_loop_crossings: u64,
}

impl WalkerState {
    pub fn new(position: VertexId, s: u64) -> Result<Self> {
        if s == 0 {
            return argument("growth period s must be at least 1");
        }
        Ok(Self { time: 0, position, s, self_loop_crossings: 0 })
    }

    /// `(time + depth) mod 2`.
    pub fn parity(&self, tree: &GrowingTree) -> u8 {
        ((self.time + tree.depth(self.position)) % 2) as u8
    }
}

/// Advance one time unit.
#[inline]
pub fn step<R: Rng + ?Sized>(
    state: &mut WalkerState,
    tree: &mut GrowingTree,
    env: &Sampler,
    rng: &mut R,
) -> MoveOutcome {
    if state.time % state.s == 0 {
        let xi = env.sample(state.time, rng);
        tree.add_leaves(state.position, xi);
    }
    let outcome = tree.uniform_neighbor(state.position, state.time + 1, rng);
    match outcome {
        MoveOutcome::ToParent => {
            state.position = tree.parent(state.position).expect("moved to parent of the root");
        }
        MoveOutcome::ToChild(c) | MoveOutcome::ToFreshLeaf(c) => state.position = c,
        MoveOutcome::SelfLoop => state.self_loop_crossings += 1,
    }
    state.time += 1;
    outcome
}

/// A censored nonnegative time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "snake_case")]
pub enum Observation {
    Observed(u64),
    /// The event did not happen within the budget.
    Timeout(u64),
}

impl Observation {
    /// Observed value or the censoring budget.
    pub fn value(self) -> u64 {
        match self {
            Self::Observed(v) | Self::Timeout(v) => v,
        }
    }

    pub fn is_censored(self) -> bool {
        matches!(self, Self::Timeout(_))
    }

    pub fn observed(self) -> Option<u64> {
        match self {
            Self::Observed(v) => Some(v),
            Self::Timeout(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingTimeRecord {
    pub target: VertexId,
    pub time: Observation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExitTimeRecord {
    pub leaves: u64,
    pub time: Observation,
}

/// Parameters of a single trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub s: u64,
    pub horizon: u64,
    /// Sample every `stride` steps; the horizon itself is always sampled.
    pub stride: u64,
    /// Vertices whose first hitting time and visit counts are tracked.
    #[serde(default)]
    pub targets: Vec<VertexId>,
}

/// State of the walk at one sampled time, measured in the tree before the
/// growth step of that time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub n: u64,
    pub vertex: VertexId,
    pub depth: u64,
    pub height: u64,
    pub degree: u64,
    pub leaves: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetRecord {
    pub vertex: VertexId,
    /// First `n >= 1` with the walker at `vertex`.
    pub first_hit: Option<u64>,
    pub last_visit: Option<u64>,
    /// Number of `n` in `1..=horizon` with the walker at `vertex`.
    pub visits: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub vertex_count: u64,
    pub materialized: u64,
    pub height: u64,
    pub degree_histogram: BTreeMap<u64, u64>,
}

impl TreeSummary {
    pub fn of(tree: &GrowingTree) -> Self {
        Self {
            vertex_count: tree.vertex_count(),
            materialized: tree.materialized_count() as u64,
            height: tree.height(),
            degree_histogram: tree.degree_histogram(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub s: u64,
    pub horizon: u64,
    pub stride: u64,
    pub env: EnvironmentSpec,
    pub seed: Option<u64>,
    pub samples: Vec<Sample>,
    /// Times `n` at which the step `n -> n+1` traversed the root self-loop.
    pub self_loop_crossings: Vec<u64>,
    pub targets: Vec<TargetRecord>,
    pub final_vertex: VertexId,
    pub final_depth: u64,
    pub final_tree: TreeSummary,
}

/// Everything in a [`TrajectoryRecord`] except the sample series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub s: u64,
    pub horizon: u64,
    pub stride: u64,
    pub env: EnvironmentSpec,
    pub seed: Option<u64>,
    pub sample_count: usize,
    pub self_loop_crossings: u64,
    pub targets: Vec<TargetRecord>,
    pub final_vertex: VertexId,
    pub final_depth: u64,
    pub final_tree: TreeSummary,
}

impl TrajectoryRecord {
    pub fn summary(&self) -> TrajectorySummary {
        TrajectorySummary {
            s: self.s,
            horizon: self.horizon,
            stride: self.stride,
            env: self.env.clone(),
            seed: self.seed,
            sample_count: self.samples.len(),
            self_loop_crossings: self.self_loop_crossings.len() as u64,
            targets: self.targets.clone(),
            final_vertex: self.final_vertex,
            final_depth: self.final_depth,
            final_tree: self.final_tree.clone(),
        }
    }

    /// One JSON object per sample.
    pub fn write_samples_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for sample in &self.samples {
            serde_json::to_writer(&mut out, sample)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Crossings up to and including step `n -> n+1` with `n < time`.
    pub fn crossings_before(&self, time: u64) -> usize {
        self.self_loop_crossings.partition_point(|&c| c < time)
    }
}

fn sample_at(tree: &GrowingTree, state: &WalkerState) -> Sample {
    let v = state.position;
    Sample {
        n: state.time,
        vertex: v,
        depth: tree.depth(v),
        height: tree.height(),
        degree: tree.degree(v),
        leaves: tree.leaf_count(v),
    }
}

/// Simulate `spec.horizon` steps from `(tree0, x0)`.
pub fn run<R: Rng + ?Sized>(
    tree0: &GrowingTree,
    x0: VertexId,
    env: &EnvironmentSpec,
    spec: &RunSpec,
    rng: &mut R,
) -> Result<TrajectoryRecord> {
    if !tree0.contains(x0) {
        return argument(format!("start vertex {x0} is not in the initial tree"));
    }
    if spec.stride == 0 {
        return argument("sampling stride must be at least 1");
    }
    if let Some(t) = spec.targets.iter().find(|t| !tree0.contains(**t)) {
        return argument(format!("target {t} is not in the initial tree"));
    }
    let sampler = env.sampler()?;
    let mut tree = tree0.clone();
    let mut state = WalkerState::new(x0, spec.s)?;
    let mut samples = Vec::new();
    let mut crossings = Vec::new();
    let mut targets: Vec<TargetRecord> = spec
        .targets
        .iter()
        .map(|&vertex| TargetRecord { vertex, first_hit: None, last_visit: None, visits: 0 })
        .collect();

    if spec.horizon > 0 {
        samples.push(sample_at(&tree, &state));
    }
    while state.time < spec.horizon {
        let n = state.time;
        if step(&mut state, &mut tree, &sampler, rng) == MoveOutcome::SelfLoop {
            crossings.push(n);
        }
        for t in targets.iter_mut().filter(|t| t.vertex == state.position) {
            t.first_hit.get_or_insert(state.time);
            t.last_visit = Some(state.time);
            t.visits += 1;
        }
        if state.time % spec.stride == 0 || state.time == spec.horizon {
            samples.push(sample_at(&tree, &state));
        }
    }
    Ok(TrajectoryRecord {
        s: spec.s,
        horizon: spec.horizon,
        stride: spec.stride,
        env: env.clone(),
        seed: None,
        samples,
        self_loop_crossings: crossings,
        targets,
        final_vertex: state.position,
        final_depth: tree.depth(state.position),
        final_tree: TreeSummary::of(&tree),
    })
}

/// First `n >= 1` with the walker at `z`, or a timeout after `budget` steps.
pub fn first_hitting_time<R: Rng + ?Sized>(
    tree0: &GrowingTree,
    x0: VertexId,
    z: VertexId,
    env: &Sampler,
    s: u64,
    budget: u64,
    rng: &mut R,
) -> Result<HittingTimeRecord> {
    if !tree0.contains(z) {
        return argument(format!("target {z} is not materialized in the initial tree"));
    }
    if !tree0.contains(x0) {
        return argument(format!("start vertex {x0} is not in the initial tree"));
    }
    let mut tree = tree0.clone();
    let mut state = WalkerState::new(x0, s)?;
    while state.time < budget {
        step(&mut state, &mut tree, env, rng);
        if state.position == z {
            return Ok(HittingTimeRecord { target: z, time: Observation::Observed(state.time) });
        }
    }
    Ok(HittingTimeRecord { target: z, time: Observation::Timeout(budget) })
}

/// First even time at which the walker started at the root of a star with
/// `leaves` leaves and a self-loop is away from the root.
pub fn exit_time<R: Rng + ?Sized>(
    leaves: u64,
    env: &Sampler,
    s: u64,
    budget: u64,
    rng: &mut R,
) -> Result<ExitTimeRecord> {
    if s == 0 || s % 2 == 1 {
        return argument(format!("exit times need an even growth period, got s = {s}"));
    }
    if leaves == 0 {
        return argument("the initial star needs at least one leaf");
    }
    let mut tree = GrowingTree::new(&TreeShape::StarWithLoop { leaves })?;
    let mut state = WalkerState::new(VertexId::ROOT, s)?;
    while state.time < budget {
        step(&mut state, &mut tree, env, rng);
        if state.time % 2 == 0 && state.position != VertexId::ROOT {
            return Ok(ExitTimeRecord { leaves, time: Observation::Observed(state.time) });
        }
    }
    Ok(ExitTimeRecord { leaves, time: Observation::Timeout(budget) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn spec(s: u64, horizon: u64, stride: u64) -> RunSpec {
        RunSpec { s, horizon, stride, targets: vec![] }
    }

    #[test]
    fn horizon_zero_is_empty() {
        let tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let rec = run(&tree, VertexId::ROOT, &EnvironmentSpec::Constant { c: 1 }, &spec(1, 0, 1), &mut stream(1))
            .unwrap();
        assert!(rec.samples.is_empty());
        assert!(rec.self_loop_crossings.is_empty());
        assert_eq!(rec.final_vertex, VertexId::ROOT);
    }

    #[test]
    fn growth_happens_before_the_move() {
        // A leaf with one fresh neighbour: each option has probability 1/2.
        let env = EnvironmentSpec::Constant { c: 1 }.sampler().unwrap();
        let mut rng = stream(2);
        let mut fresh = 0;
        const N: u32 = 100_000;
        for _ in 0..N {
            let mut tree = GrowingTree::new(&TreeShape::Path { length: 1, loop_at_root: true }).unwrap();
            let mut state = WalkerState::new(VertexId(1), 1).unwrap();
            let out = step(&mut state, &mut tree, &env, &mut rng);
            assert_eq!(tree.degree(VertexId(1)), 2);
            if matches!(out, MoveOutcome::ToFreshLeaf(_)) {
                fresh += 1;
            }
        }
        let p = f64::from(fresh) / f64::from(N);
        assert!((p - 0.5).abs() < 5.0 * (0.25 / f64::from(N)).sqrt(), "p = {p}");
    }

    #[test]
    fn odd_times_do_not_grow_when_s_is_two() {
        let env = EnvironmentSpec::Constant { c: 3 }.sampler().unwrap();
        let mut tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let mut state = WalkerState::new(VertexId::ROOT, 2).unwrap();
        let mut rng = stream(3);
        step(&mut state, &mut tree, &env, &mut rng);
        let before = tree.vertex_count();
        step(&mut state, &mut tree, &env, &mut rng);
        assert_eq!(tree.vertex_count(), before);
        assert_eq!(before, 4);
    }

    #[test]
    fn crossings_counted_exactly_on_self_loops() {
        let env = EnvironmentSpec::Bernoulli { p: 0.5 }.sampler().unwrap();
        let mut tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let mut state = WalkerState::new(VertexId::ROOT, 2).unwrap();
        let mut rng = stream(4);
        let mut loops = 0;
        for _ in 0..10_000 {
            if step(&mut state, &mut tree, &env, &mut rng) == MoveOutcome::SelfLoop {
                loops += 1;
            }
            assert_eq!(state.self_loop_crossings, loops);
        }
        assert!(loops > 0);
    }

    #[test]
    fn samples_follow_stride_and_end_at_horizon() {
        let tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let rec = run(&tree, VertexId::ROOT, &EnvironmentSpec::Constant { c: 1 }, &spec(1, 25, 10), &mut stream(5))
            .unwrap();
        let times: Vec<u64> = rec.samples.iter().map(|s| s.n).collect();
        assert_eq!(times, vec![0, 10, 20, 25]);
        assert!(rec.samples.iter().all(|s| s.depth <= s.height));
        assert_eq!(rec.final_depth, rec.samples.last().unwrap().depth);
    }

    #[test]
    fn hitting_and_exit_validate_arguments() {
        let tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let env = EnvironmentSpec::Constant { c: 1 }.sampler().unwrap();
        assert!(first_hitting_time(&tree, VertexId::ROOT, VertexId(3), &env, 1, 10, &mut stream(0)).is_err());
        assert!(exit_time(1, &env, 3, 10, &mut stream(0)).is_err());
        assert!(exit_time(0, &env, 2, 10, &mut stream(0)).is_err());
    }

    #[test]
    fn return_time_is_at_least_one() {
        let tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let env = EnvironmentSpec::Bernoulli { p: 0.5 }.sampler().unwrap();
        let mut rng = stream(6);
        for _ in 0..1000 {
            let rec = first_hitting_time(&tree, VertexId::ROOT, VertexId::ROOT, &env, 1, 1000, &mut rng).unwrap();
            assert!(rec.time.value() >= 1);
        }
    }

    #[test]
    fn observation_json() {
        let text = serde_json::to_string(&Observation::Timeout(10)).unwrap();
        assert_eq!(text, r#"{"status":"timeout","value":10}"#);
    }
}
