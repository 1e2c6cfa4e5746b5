use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::MAX_PROBE_BUDGET;
use crate::env::EnvironmentSpec;
use crate::error::{config, Error, Result};
use crate::tree::{GrowingTree, TreeShape, VertexId};

pub const SCHEMA_VERSION: u32 = 1;

/// A complete, reproducible experiment description.
///
/// ```json
/// {"schema": 1, "kind": "speed", "s": 1, "horizon": 100000, "stride": 1000,
///  "env": {"family": "constant", "c": 1}, "replicas": 200, "seed": 7}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(flatten)]
    pub experiment: Experiment,
    pub env: EnvironmentSpec,
    pub replicas: usize,
    pub seed: u64,
    /// Worker threads; the machine default when absent. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Output directory; nothing is written when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn single_vertex() -> TreeShape {
    TreeShape::SingleVertexWithLoop
}

fn one() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    /// Raw trajectories.
    Simulate {
        s: u64,
        #[serde(default = "single_vertex")]
        tree: TreeShape,
        #[serde(default)]
        start: Option<VertexId>,
        horizon: u64,
        #[serde(default = "one")]
        stride: u64,
        #[serde(default)]
        targets: Vec<VertexId>,
    },
    Speed {
        s: u64,
        #[serde(default = "single_vertex")]
        tree: TreeShape,
        horizon: u64,
        #[serde(default = "one")]
        stride: u64,
    },
    Recurrence {
        s: u64,
        #[serde(default = "single_vertex")]
        tree: TreeShape,
        horizon: u64,
        /// Times at which the median self-loop crossing count is reported.
        checkpoints: Vec<u64>,
    },
    Trap {
        s: u64,
        #[serde(default = "single_vertex")]
        tree: TreeShape,
        horizon: u64,
        /// Defaults to a tenth of the horizon.
        #[serde(default)]
        window: Option<u64>,
    },
    ExitScaling {
        k: u64,
        ells: Vec<u64>,
        budget: u64,
        #[serde(default)]
        tail_threshold: Option<u64>,
    },
    HittingTail {
        s: u64,
        ells: Vec<u64>,
    },
    /// Path of `length` edges from the root (with self-loop) to the start,
    /// with `side_leaves` leaves on every non-root path vertex.
    LoopDominance {
        s: u64,
        length: u32,
        side_leaves: u64,
        budget: u64,
    },
    Height {
        s: u64,
        #[serde(default = "single_vertex")]
        tree: TreeShape,
        checkpoints: Vec<u64>,
    },
    RlProbe {
        s: u64,
        r: u64,
        alpha: f64,
    },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Simulate { .. } => "simulate",
            Self::Speed { .. } => "speed",
            Self::Recurrence { .. } => "recurrence",
            Self::Trap { .. } => "trap",
            Self::ExitScaling { .. } => "exit_scaling",
            Self::HittingTail { .. } => "hitting_tail",
            Self::LoopDominance { .. } => "loop_dominance",
            Self::Height { .. } => "height",
            Self::RlProbe { .. } => "rl_probe",
        }
    }
}

fn positive(name: &str, v: u64) -> Result<()> {
    if v == 0 {
        return config(format!("{name} must be at least 1"));
    }
    Ok(())
}

fn valid_tree(tree: &TreeShape) -> Result<GrowingTree> {
    GrowingTree::new(tree).map_err(|e| Error::Config(e.to_string()))
}

fn valid_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.is_empty() {
        return config("at least one checkpoint is required");
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) || checkpoints[0] == 0 {
        return config("checkpoints must be positive and strictly increasing");
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks everything that can be checked without simulating.
    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return config(format!("unsupported schema {}; expected {SCHEMA_VERSION}", self.schema));
        }
        if self.replicas == 0 {
            return config("replicas must be at least 1");
        }
        if self.workers == Some(0) {
            return config("workers must be at least 1");
        }
        self.env.validate()?;
        match &self.experiment {
            Experiment::Simulate { s, tree, start, stride, targets, .. } => {
                positive("s", *s)?;
                positive("stride", *stride)?;
                let t = valid_tree(tree)?;
                for v in start.iter().chain(targets) {
                    if !t.contains(*v) {
                        return config(format!("vertex {v} is not in the initial tree"));
                    }
                }
            }
            Experiment::Speed { s, tree, stride, .. } => {
                positive("s", *s)?;
                positive("stride", *stride)?;
                valid_tree(tree)?;
            }
            Experiment::Recurrence { s, tree, horizon, checkpoints } => {
                positive("s", *s)?;
                valid_tree(tree)?;
                valid_checkpoints(checkpoints)?;
                if checkpoints.last() > Some(horizon) {
                    return config("checkpoints must not exceed the horizon");
                }
            }
            Experiment::Trap { s, tree, horizon, window } => {
                positive("s", *s)?;
                valid_tree(tree)?;
                let w = window.unwrap_or(horizon / 10);
                positive("window", w)?;
                if *horizon < 2 * w {
                    return config(format!("horizon {horizon} must be at least twice the window {w}"));
                }
            }
            Experiment::ExitScaling { k, ells, .. } => {
                positive("k", *k)?;
                if ells.is_empty() || ells.contains(&0) {
                    return config("ells must be a nonempty list of positive star sizes");
                }
            }
            Experiment::HittingTail { s, ells } => {
                positive("s", *s)?;
                if ells.is_empty() || ells.contains(&0) {
                    return config("ells must be a nonempty list of positive path lengths");
                }
                let largest = *ells.iter().max().unwrap() as f64;
                if largest.sqrt().exp() > MAX_PROBE_BUDGET as f64 {
                    return config(format!("path length {largest} needs a budget above {MAX_PROBE_BUDGET}"));
                }
            }
            Experiment::LoopDominance { s, length, side_leaves, .. } => {
                positive("s", *s)?;
                if *length < 2 {
                    return config("loop dominance needs a path of length at least 2");
                }
                if *side_leaves == 0 {
                    return config("side_leaves must be at least 1 so the far end carries a loop");
                }
            }
            Experiment::Height { s, tree, checkpoints } => {
                positive("s", *s)?;
                valid_tree(tree)?;
                valid_checkpoints(checkpoints)?;
            }
            Experiment::RlProbe { s, r, alpha } => {
                positive("s", *s)?;
                positive("r", *r)?;
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return config(format!("alpha must lie in (0, 1), got {alpha}"));
                }
            }
        }
        Ok(())
    }
}
