//! Reproducible experiment runner. Replica `i` of an experiment with seed
//! `seed` always draws from the stream derived from `(seed, lane, i)`, so
//! results do not depend on the number of worker threads.
//!
//! Output directory layout:
//!
//! | file | content |
//! |---|---|
//! | `aggregate.json` | kind-tagged aggregate report; byte-identical across reruns |
//! | `replicas.jsonl` | one JSON object per replica, in replica order |
//! | `run.json` | config echo, software version, wall-clock seconds |
//! | `table.csv` | kind-specific table with a header line, when one applies |
//! | `trajectories.jsonl` | `simulate` only: one sample per line |

mod config;
mod runner;

pub use config::{Experiment, ExperimentConfig, SCHEMA_VERSION};
pub use runner::{aggregate_json, run_experiment, write_outputs, Aggregate, RunResult, SimulateAggregate, TrapAggregate};
