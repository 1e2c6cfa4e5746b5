//! Simulation and estimation toolkit for tree builder random walks: a walker
//! on a rooted tree that attaches a random number of leaves to its position
//! every `s` steps and then moves to a uniform neighbour.

pub mod analysis;
pub mod env;
pub mod error;
pub mod harness;
pub mod loopproc;
pub mod rng;
pub mod tree;
pub mod walker;

pub use env::{classify_conditions, classify_conditions_at, ConditionReport, EnvironmentSpec, Sampler};
pub use error::{Error, Result};
pub use harness::{run_experiment, Aggregate, Experiment, ExperimentConfig, RunResult};
pub use loopproc::{build_backbone, dominance_check, run_loop_process, Backbone, DominanceReport};
pub use tree::{GrowingTree, MoveOutcome, TreeShape, TreeSnapshot, VertexId};
pub use walker::{
    exit_time, first_hitting_time, run, step, ExitTimeRecord, HittingTimeRecord, Observation, RunSpec,
    TrajectoryRecord, WalkerState,
};
