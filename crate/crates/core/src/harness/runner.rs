use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Experiment, ExperimentConfig};
use crate::analysis::{
    detect_trap, estimate_rl, estimate_speed, exit_scaling, height_and_degrees, hitting_tail, recurrence_evidence,
    stats::{mean, Z99},
    ExitScalingReport, ExitScalingSpec, HeightReport, HittingTailReport, Proportion, RecurrenceEvidence, RlEstimate,
    SpeedEstimate,
};
use crate::error::{Error, Result};
use crate::loopproc::{dominance_check, DominanceReport};
use crate::rng::replica_stream;
use crate::tree::{GrowingTree, TreeShape, VertexId};
use crate::walker::{run, RunSpec, TrajectoryRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateAggregate {
    pub replicas: usize,
    pub horizon: u64,
    pub mean_final_depth: f64,
    pub mean_height: f64,
    pub mean_vertex_count: f64,
    pub mean_self_loop_crossings: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapAggregate {
    pub replicas: usize,
    pub window: u64,
    pub trapped: Proportion,
    pub trapped_fraction: f64,
}

/// Kind-specific aggregate report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "report", rename_all = "snake_case")]
pub enum Aggregate {
    Simulate(SimulateAggregate),
    /// Absent for a zero horizon.
    Speed(Option<SpeedEstimate>),
    Recurrence(RecurrenceEvidence),
    Trap(TrapAggregate),
    ExitScaling(ExitScalingReport),
    HittingTail(HittingTailReport),
    LoopDominance(DominanceReport),
    Height(HeightReport),
    RlProbe(RlEstimate),
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    /// One JSON object per replica (or per row and replica), in order.
    pub replicas: Vec<Value>,
    pub aggregate: Aggregate,
    /// CSV text with a header line, for kinds with a natural table.
    pub table: Option<String>,
    /// Full trajectories, kept only by `simulate`.
    pub trajectories: Vec<TrajectoryRecord>,
    pub wall_clock_seconds: f64,
    pub version: &'static str,
}

/// Run `config` on a dedicated thread pool and, when `config.out` is set,
/// write `replicas.jsonl`, `aggregate.json`, `run.json` and, where it
/// applies, `table.csv` and `trajectories.jsonl`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = config.workers {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let started = Instant::now();
    let (replicas, aggregate, table, trajectories) = pool.install(|| execute(config))?;
    let result = RunResult {
        config: config.clone(),
        replicas,
        aggregate,
        table,
        trajectories,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        version: env!("CARGO_PKG_VERSION"),
    };
    if let Some(dir) = &config.out {
        write_outputs(&result, dir)?;
    }
    Ok(result)
}

type Parts = (Vec<Value>, Aggregate, Option<String>, Vec<TrajectoryRecord>);

fn trajectories<T: Send>(
    cfg: &ExperimentConfig,
    tree: &TreeShape,
    start: VertexId,
    spec: RunSpec,
    f: impl Fn(TrajectoryRecord) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let tree0 = GrowingTree::new(tree)?;
    (0..cfg.replicas as u64)
        .into_par_iter()
        .map(|i| {
            let mut record = run(&tree0, start, &cfg.env, &spec, &mut replica_stream(cfg.seed, 0, i))?;
            record.seed = Some(cfg.seed);
            f(record)
        })
        .collect()
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn execute(cfg: &ExperimentConfig) -> Result<Parts> {
    match &cfg.experiment {
        Experiment::Simulate { s, tree, start, horizon, stride, targets } => {
            let spec = RunSpec { s: *s, horizon: *horizon, stride: *stride, targets: targets.clone() };
            let records = trajectories(cfg, tree, start.unwrap_or(VertexId::ROOT), spec, Ok)?;
            let lines = records
                .iter()
                .enumerate()
                .map(|(i, r)| json!({ "replica": i, "summary": r.summary() }))
                .collect();
            let col = |f: fn(&TrajectoryRecord) -> f64| mean(&records.iter().map(f).collect::<Vec<_>>());
            let agg = SimulateAggregate {
                replicas: records.len(),
                horizon: *horizon,
                mean_final_depth: col(|r| r.final_depth as f64),
                mean_height: col(|r| r.final_tree.height as f64),
                mean_vertex_count: col(|r| r.final_tree.vertex_count as f64),
                mean_self_loop_crossings: col(|r| r.self_loop_crossings.len() as f64),
            };
            Ok((lines, Aggregate::Simulate(agg), None, records))
        }
        Experiment::Speed { s, tree, horizon, stride } => {
            let spec = RunSpec { s: *s, horizon: *horizon, stride: *stride, targets: vec![] };
            let records = trajectories(cfg, tree, VertexId::ROOT, spec, Ok)?;
            let lines = records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let speed = if *horizon == 0 { 0.0 } else { r.final_depth as f64 / *horizon as f64 };
                    json!({ "replica": i, "final_depth": r.final_depth, "speed": speed })
                })
                .collect();
            let estimate = if *horizon == 0 { None } else { Some(estimate_speed(&records)?) };
            let table = estimate.as_ref().map(|e| {
                csv("n,median_speed", e.median_series.iter().map(|p| format!("{},{}", p.n, p.value)))
            });
            Ok((lines, Aggregate::Speed(estimate), table, vec![]))
        }
        Experiment::Recurrence { s, tree, horizon, checkpoints } => {
            let spec = RunSpec { s: *s, horizon: *horizon, stride: (*horizon).max(1), targets: vec![VertexId::ROOT] };
            let records = trajectories(cfg, tree, VertexId::ROOT, spec, |mut r| {
                r.samples.clear();
                Ok(r)
            })?;
            let lines = records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let counts: Vec<usize> = checkpoints.iter().map(|&n| r.crossings_before(n)).collect();
                    json!({
                        "replica": i,
                        "crossings": counts,
                        "root_last_visit": r.targets[0].last_visit,
                        "root_visits": r.targets[0].visits,
                    })
                })
                .collect();
            let evidence = recurrence_evidence(&records, checkpoints)?;
            Ok((lines, Aggregate::Recurrence(evidence), None, vec![]))
        }
        Experiment::Trap { s, tree, horizon, window } => {
            let w = window.unwrap_or(horizon / 10);
            let spec = RunSpec { s: *s, horizon: *horizon, stride: 1, targets: vec![] };
            let verdicts = trajectories(cfg, tree, VertexId::ROOT, spec, |r| detect_trap(&r, w, *s))?;
            let trapped = verdicts.iter().filter(|v| v.trapped).count() as u64;
            let lines = verdicts.iter().enumerate().map(|(i, v)| json!({ "replica": i, "verdict": v })).collect();
            let agg = TrapAggregate {
                replicas: verdicts.len(),
                window: w,
                trapped: Proportion::wilson(trapped, verdicts.len() as u64, Z99),
                trapped_fraction: trapped as f64 / verdicts.len() as f64,
            };
            Ok((lines, Aggregate::Trap(agg), None, vec![]))
        }
        Experiment::ExitScaling { k, ells, budget, tail_threshold } => {
            let spec = ExitScalingSpec {
                k: *k,
                ells: ells.clone(),
                replicas: cfg.replicas,
                budget: *budget,
                tail_threshold: *tail_threshold,
            };
            let report = exit_scaling(&cfg.env, &spec, cfg.seed)?;
            let mut lines = Vec::new();
            for (row, obs) in report.rows.iter().zip(&report.observations) {
                for (i, o) in obs.iter().enumerate() {
                    lines.push(json!({ "ell": row.ell, "replica": i, "time": o }));
                }
            }
            let table = csv(
                "ell,replicas,censored_mean,censor_rate,median,tail_slope",
                report.rows.iter().map(|r| {
                    format!(
                        "{},{},{},{},{},{}",
                        r.ell,
                        r.replicas,
                        r.censored_mean,
                        r.censor_rate,
                        opt(r.median),
                        opt(r.tail.as_ref().map(|t| t.slope))
                    )
                }),
            );
            Ok((lines, Aggregate::ExitScaling(report), Some(table), vec![]))
        }
        Experiment::HittingTail { s, ells } => {
            let report = hitting_tail(ells, &cfg.env, *s, cfg.replicas, cfg.seed)?;
            let table = csv(
                "ell,budget,hits,trials,probability,lower,upper,c_estimate",
                report.rows.iter().map(|r| {
                    format!(
                        "{},{},{},{},{},{},{},{}",
                        r.ell, r.budget, r.hits.successes, r.hits.trials, r.hits.estimate, r.hits.lower, r.hits.upper,
                        r.c_estimate
                    )
                }),
            );
            Ok((vec![], Aggregate::HittingTail(report), Some(table), vec![]))
        }
        Experiment::LoopDominance { s, length, side_leaves, budget } => {
            let mut tree = GrowingTree::new(&TreeShape::Path { length: *length, loop_at_root: true })?;
            for v in 1..=*length {
                tree.add_leaves(VertexId(v), *side_leaves);
            }
            let report =
                dominance_check(&tree, VertexId::ROOT, VertexId(*length), &cfg.env, *s, *budget, cfg.replicas, cfg.seed)?;
            let lines = report
                .tbrw_times
                .iter()
                .zip(&report.loop_times)
                .enumerate()
                .map(|(i, (a, b))| json!({ "replica": i, "tbrw": a, "loop_process": b }))
                .collect();
            let table = csv(
                "t,tbrw,loop_process",
                report.cdf.iter().map(|p| format!("{},{},{}", p.t, p.tbrw, p.loop_process)),
            );
            Ok((lines, Aggregate::LoopDominance(report), Some(table), vec![]))
        }
        Experiment::Height { s, tree, checkpoints } => {
            let horizon = *checkpoints.last().unwrap();
            let stride = checkpoints.iter().fold(0, |g, &c| gcd(g, c));
            let spec = RunSpec { s: *s, horizon, stride, targets: vec![] };
            let records = trajectories(cfg, tree, VertexId::ROOT, spec, |mut r| {
                r.samples.retain(|x| checkpoints.binary_search(&x.n).is_ok());
                Ok(r)
            })?;
            let lines = records
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let heights: Vec<u64> = r.samples.iter().map(|x| x.height).collect();
                    json!({ "replica": i, "heights": heights, "vertex_count": r.final_tree.vertex_count })
                })
                .collect();
            let report = height_and_degrees(&records, checkpoints)?;
            let table = csv("degree,count", report.degree_histogram.iter().map(|(d, c)| format!("{d},{c}")));
            Ok((lines, Aggregate::Height(report), Some(table), vec![]))
        }
        Experiment::RlProbe { s, r, alpha } => {
            let est = estimate_rl(*r, *alpha, &cfg.env, *s, cfg.replicas, cfg.seed)?;
            Ok((vec![], Aggregate::RlProbe(est), None, vec![]))
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Output(std::io::Error::other(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| output_error(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| output_error(path, e))
}

fn json_line<W: Write, T: Serialize>(w: &mut W, value: &T) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n")
}

/// Aggregate JSON exactly as written to `aggregate.json`.
pub fn aggregate_json(aggregate: &Aggregate) -> String {
    let mut s = serde_json::to_string_pretty(aggregate).expect("aggregate serializes");
    s.push('\n');
    s
}

pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| output_error(dir, e))?;
    write_file(&dir.join("replicas.jsonl"), |w| result.replicas.iter().try_for_each(|v| json_line(w, v)))?;
    write_file(&dir.join("aggregate.json"), |w| w.write_all(aggregate_json(&result.aggregate).as_bytes()))?;
    let meta = json!({
        "config": result.config,
        "version": result.version,
        "wall_clock_seconds": result.wall_clock_seconds,
        "replica_lines": result.replicas.len(),
    });
    write_file(&dir.join("run.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &meta)?;
        w.write_all(b"\n")
    })?;
    if let Some(table) = &result.table {
        write_file(&dir.join("table.csv"), |w| w.write_all(table.as_bytes()))?;
    }
    if !result.trajectories.is_empty() {
        write_file(&dir.join("trajectories.jsonl"), |w| {
            for (i, r) in result.trajectories.iter().enumerate() {
                for sample in &r.samples {
                    json_line(w, &json!({ "replica": i, "sample": sample }))?;
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}
