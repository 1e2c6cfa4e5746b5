//! `tbrw`: command line front end for the tree builder random walk toolkit.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tbrw_core::harness::{aggregate_json, SCHEMA_VERSION};
use tbrw_core::{
    classify_conditions_at, run_experiment, EnvironmentSpec, Error, Experiment, ExperimentConfig, TreeShape,
};

#[derive(Parser)]
#[command(name = "tbrw", version, about = "Simulate and analyse tree builder random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment config; its values take precedence over flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    /// Output directory for replicas.jsonl, aggregate.json, run.json and tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Family {
    Constant,
    Bernoulli,
    Geometric,
    Poisson,
    PowerLawTail,
    DeterministicPolynomial,
    Table,
    BernoulliDecay,
}

#[derive(Args, Clone, Default)]
struct EnvArgs {
    #[arg(long, value_enum)]
    family: Option<Family>,
    #[arg(long)]
    c: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    mean: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Tail index of `power-law-tail`.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Exponent of `deterministic-polynomial`.
    #[arg(long)]
    a: Option<f64>,
    #[arg(long, default_value_t = 1)]
    period: u64,
    /// Comma-separated probabilities of 0, 1, 2, ... for `table`.
    #[arg(long, value_delimiter = ',')]
    pmf: Vec<f64>,
    /// Decay exponent of `bernoulli-decay`.
    #[arg(long)]
    exponent: Option<f64>,
}

fn need<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    match v {
        Some(x) => Ok(x),
        None => Err(Error::Config(format!("family {family} needs --{flag}")).into()),
    }
}

impl EnvArgs {
    fn spec(&self) -> Result<EnvironmentSpec> {
        let Some(family) = self.family else {
            return Err(Error::Config("an environment is required: pass --family or --config".into()).into());
        };
        let spec = match family {
            Family::Constant => EnvironmentSpec::Constant { c: need(self.c, "c", "constant")? },
            Family::Bernoulli => EnvironmentSpec::Bernoulli { p: need(self.p, "p", "bernoulli")? },
            Family::Geometric => EnvironmentSpec::Geometric { mean: need(self.mean, "mean", "geometric")? },
            Family::Poisson => EnvironmentSpec::Poisson { lambda: need(self.lambda, "lambda", "poisson")? },
            Family::PowerLawTail => EnvironmentSpec::PowerLawTail {
                alpha: need(self.alpha, "alpha", "power-law-tail")?,
                delta: need(self.delta, "delta", "power-law-tail")?,
            },
            Family::DeterministicPolynomial => EnvironmentSpec::DeterministicPolynomial {
                a: need(self.a, "a", "deterministic-polynomial")?,
                period: self.period,
            },
            Family::Table => EnvironmentSpec::Table { pmf: self.pmf.clone() },
            Family::BernoulliDecay => {
                EnvironmentSpec::BernoulliDecay { exponent: need(self.exponent, "exponent", "bernoulli-decay")? }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `single`, `star:<leaves>`, `path:<length>` (root self-loop) or
/// `bare-path:<length>` (no self-loop).
fn parse_tree(text: &str) -> Result<TreeShape, String> {
    let (name, arg) = text.split_once(':').unwrap_or((text, ""));
    let num = || arg.parse::<u64>().map_err(|_| format!("tree `{text}` needs a numeric argument"));
    let len = || arg.parse::<u32>().map_err(|_| format!("tree `{text}` needs a numeric argument"));
    match name {
        "single" => Ok(TreeShape::SingleVertexWithLoop),
        "star" => Ok(TreeShape::StarWithLoop { leaves: num()? }),
        "path" => Ok(TreeShape::Path { length: len()?, loop_at_root: true }),
        "bare-path" => Ok(TreeShape::Path { length: len()?, loop_at_root: false }),
        _ => Err(format!("unknown tree `{text}`; use single, star:N, path:N or bare-path:N")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate trajectories and write them sample by sample.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long, value_parser = parse_tree, default_value = "single")]
        tree: TreeShape,
        #[arg(long, default_value_t = 1)]
        stride: u64,
    },
    /// Terminal depth over time, with a 99% interval.
    Speed {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 1)]
        s: u64,
        /// Defaults to a hundredth of the horizon.
        #[arg(long)]
        stride: Option<u64>,
    },
    /// Late root visits and self-loop crossing counts.
    Recurrence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 2)]
        s: u64,
        /// Defaults to the horizon alone.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
    },
    /// Fraction of replicas whose walker is confined to one vertex at the end.
    Trap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 2)]
        s: u64,
        #[arg(long)]
        window: Option<u64>,
    },
    /// Exit times from stars of several sizes.
    ExitScaling {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        /// Half the growth period.
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, value_delimiter = ',', required_unless_present = "config")]
        ells: Vec<u64>,
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        #[arg(long)]
        tail_threshold: Option<u64>,
    },
    /// Probability of climbing a path of length l within exp(sqrt(l)) steps.
    HittingTail {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long, value_delimiter = ',', required_unless_present = "config")]
        ells: Vec<u64>,
    },
    /// Compare tree-walk hitting times with the loop process on a decorated path.
    LoopDominance {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long, default_value_t = 4)]
        length: u32,
        #[arg(long, default_value_t = 1)]
        side_leaves: u64,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
    },
    /// Median tree height at checkpoints and the final degree histogram.
    Height {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 2)]
        s: u64,
        /// Defaults to the horizon alone.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
    },
    /// Empirical right/left probabilities with budget exp(r^stretch).
    RlProbe {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long, default_value_t = 1)]
        s: u64,
        #[arg(long, required_unless_present = "config")]
        r: Option<u64>,
        #[arg(long, default_value_t = 0.5)]
        stretch: f64,
    },
    /// Print which growth conditions an environment satisfies.
    ClassifyEnv {
        #[command(flatten)]
        env: EnvArgs,
        /// Moment order to check.
        #[arg(long, default_value_t = 1.0)]
        order: f64,
        #[arg(long)]
        json: bool,
    },
}

fn checkpoints_or_horizon(checkpoints: Vec<u64>, horizon: u64) -> Vec<u64> {
    if checkpoints.is_empty() {
        vec![horizon]
    } else {
        checkpoints
    }
}

fn experiment(common: Common, env: EnvArgs, experiment: Experiment) -> Result<()> {
    let config = match &common.config {
        Some(path) => {
            let mut cfg = ExperimentConfig::load(path)?;
            if cfg.experiment.name() != experiment.name() {
                bail!(Error::Config(format!(
                    "config describes a {} experiment, not {}",
                    cfg.experiment.name(),
                    experiment.name()
                )));
            }
            cfg.out = cfg.out.or(common.out);
            cfg.workers = cfg.workers.or(common.workers);
            cfg
        }
        None => {
            let Some(seed) = common.seed else {
                bail!(Error::Config("--seed is required".into()));
            };
            let cfg = ExperimentConfig {
                schema: SCHEMA_VERSION,
                experiment,
                env: env.spec()?,
                replicas: common.replicas,
                seed,
                workers: common.workers,
                out: common.out,
            };
            cfg.validate()?;
            cfg
        }
    };
    let result = run_experiment(&config)?;
    print!("{}", aggregate_json(&result.aggregate));
    if let Some(dir) = &config.out {
        eprintln!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, env, s, tree, stride } => {
            let e = Experiment::Simulate { s, tree, start: None, horizon: common.horizon, stride, targets: vec![] };
            experiment(common, env, e)
        }
        Command::Speed { common, env, s, stride } => {
            let stride = stride.unwrap_or((common.horizon / 100).max(1));
            let e = Experiment::Speed { s, tree: TreeShape::SingleVertexWithLoop, horizon: common.horizon, stride };
            experiment(common, env, e)
        }
        Command::Recurrence { common, env, s, checkpoints } => {
            let e = Experiment::Recurrence {
                s,
                tree: TreeShape::SingleVertexWithLoop,
                horizon: common.horizon,
                checkpoints: checkpoints_or_horizon(checkpoints, common.horizon),
            };
            experiment(common, env, e)
        }
        Command::Trap { common, env, s, window } => {
            let e = Experiment::Trap { s, tree: TreeShape::SingleVertexWithLoop, horizon: common.horizon, window };
            experiment(common, env, e)
        }
        Command::ExitScaling { common, env, k, ells, budget, tail_threshold } => {
            experiment(common, env, Experiment::ExitScaling { k, ells, budget, tail_threshold })
        }
        Command::HittingTail { common, env, s, ells } => experiment(common, env, Experiment::HittingTail { s, ells }),
        Command::LoopDominance { common, env, s, length, side_leaves, budget } => {
            experiment(common, env, Experiment::LoopDominance { s, length, side_leaves, budget })
        }
        Command::Height { common, env, s, checkpoints } => {
            let e = Experiment::Height {
                s,
                tree: TreeShape::SingleVertexWithLoop,
                checkpoints: checkpoints_or_horizon(checkpoints, common.horizon),
            };
            experiment(common, env, e)
        }
        Command::RlProbe { common, env, s, r, stretch } => {
            experiment(common, env, Experiment::RlProbe { s, r: r.unwrap_or(0), alpha: stretch })
        }
        Command::ClassifyEnv { env, order, json } => {
            let report = classify_conditions_at(&env.spec()?, order)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report).context("serializing report")?);
            } else {
                print!("{report}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            let code = err.downcast_ref::<Error>().map_or(1, Error::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
