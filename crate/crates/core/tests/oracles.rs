mod support;

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use support::{enumerate, RefTree, RefWalk};
use tbrw_core::rng::replica_stream;
use tbrw_core::walker::{step, WalkerState};
use tbrw_core::*;

/// `|observed - p| <= k * sqrt(p (1 - p) / n)`, with zero-probability
/// outcomes required to be absent.
fn assert_frequencies(exact: &BTreeMap<Vec<u64>, f64>, counts: &BTreeMap<Vec<u64>, u64>, n: u64, k: f64) {
    for key in counts.keys() {
        assert!(exact.contains_key(key), "impossible outcome {key:?} observed");
    }
    for (key, &p) in exact {
        let seen = counts.get(key).copied().unwrap_or(0) as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((seen - p).abs() <= k * se + 1e-12, "{key:?}: exact {p}, observed {seen}, se {se}");
    }
}

fn depth_series_law(pmf: &[(u64, f64)], horizon: u64) -> BTreeMap<Vec<u64>, f64> {
    let mut law = BTreeMap::new();
    enumerate(RefTree::single_with_loop(), 0, 1, pmf, horizon, &mut |h, p| {
        *law.entry(h.iter().map(|&(_, d)| d).collect()).or_insert(0.0) += p;
    });
    law
}

#[test]
fn enumeration_probabilities_sum_to_one() {
    for pmf in [vec![(0, 0.5), (1, 0.5)], vec![(1, 1.0)], vec![(0, 0.3), (2, 0.7)]] {
        let total: f64 = depth_series_law(&pmf, 4).values().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_step_branch_count() {
    // s = 1, Bernoulli(1/2). Step one: no growth gives 1 edge, growth gives 2.
    // Step two from (root, degree 1): 1 + 2; from (root, degree 2): 2 + 3;
    // from the new leaf: 1 + 2.
    let mut branches = 0;
    enumerate(RefTree::single_with_loop(), 0, 1, &[(0, 0.5), (1, 0.5)], 2, &mut |_, _| branches += 1);
    assert_eq!(branches, 3 + 5 + 3);
    let law = depth_series_law(&[(0, 0.5), (1, 0.5)], 2);
    // Depth 2 at time 2: grow, step down, grow, step down.
    assert!((law[&vec![0, 1, 2]] - 0.5 * 0.5 * 0.5 * 0.5).abs() < 1e-12);
}

#[test]
fn walker_matches_exact_depth_law() {
    const N: u64 = 200_000;
    const H: u64 = 3;
    for p in [0.0, 0.5, 1.0] {
        let exact = depth_series_law(&[(0, 1.0 - p), (1, p)], H);
        let env = EnvironmentSpec::Bernoulli { p }.sampler().unwrap();
        let tree0 = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let counts = (0..N)
            .into_par_iter()
            .map(|i| {
                let mut rng = replica_stream(100, 0, i);
                let mut tree = tree0.clone();
                let mut state = WalkerState::new(VertexId::ROOT, 1).unwrap();
                let mut series = vec![0];
                for _ in 0..H {
                    step(&mut state, &mut tree, &env, &mut rng);
                    series.push(tree.depth(state.position));
                }
                series
            })
            .fold(BTreeMap::new, |mut m, k| {
                *m.entry(k).or_insert(0u64) += 1;
                m
            })
            .reduce(BTreeMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
                a
            });
        assert_frequencies(&exact, &counts, N, 5.0);
    }
}

fn exit_law(leaves: usize, pmf: &[(u64, f64)], horizon: u64) -> BTreeMap<Vec<u64>, f64> {
    let mut law = BTreeMap::new();
    enumerate(RefTree::star_with_loop(leaves), 0, 2, pmf, horizon, &mut |h, p| {
        let t = (2..=horizon).step_by(2).find(|&t| h[t as usize].0 != 0).unwrap_or(u64::MAX);
        *law.entry(vec![t]).or_insert(0.0) += p;
    });
    law
}

fn sampled_exit_law(leaves: u64, env: &EnvironmentSpec, budget: u64, n: u64, seed: u64) -> BTreeMap<Vec<u64>, u64> {
    let sampler = env.sampler().unwrap();
    let mut counts = BTreeMap::new();
    for i in 0..n {
        let rec = exit_time(leaves, &sampler, 2, budget, &mut replica_stream(seed, 0, i)).unwrap();
        let key = rec.time.observed().unwrap_or(u64::MAX);
        *counts.entry(vec![key]).or_insert(0) += 1;
    }
    counts
}

#[test]
fn exit_time_without_growth_is_geometric() {
    // Loop then leaf is the only exit pattern: probability 1/4 per pair.
    let exact = exit_law(1, &[(0, 1.0)], 6);
    for (t, q) in [(2u64, 0.25), (4, 0.75 * 0.25), (6, 0.75 * 0.75 * 0.25)] {
        assert!((exact[&vec![t]] - q).abs() < 1e-12);
    }
    let counts = sampled_exit_law(1, &EnvironmentSpec::Constant { c: 0 }, 6, 100_000, 1);
    assert_frequencies(&exact, &counts, 100_000, 5.0);
}

#[test]
fn exit_time_with_growth_matches_enumeration() {
    let exact = exit_law(1, &[(1, 1.0)], 6);
    let counts = sampled_exit_law(1, &EnvironmentSpec::Bernoulli { p: 1.0 }, 6, 100_000, 2);
    assert_frequencies(&exact, &counts, 100_000, 5.0);

    let exact = exit_law(2, &[(0, 0.5), (1, 0.5)], 6);
    let counts = sampled_exit_law(2, &EnvironmentSpec::Bernoulli { p: 0.5 }, 6, 100_000, 3);
    assert_frequencies(&exact, &counts, 100_000, 5.0);
}

#[test]
fn loop_process_without_growth_is_geometric() {
    let env = EnvironmentSpec::Constant { c: 0 }.sampler().unwrap();
    const N: u64 = 100_000;
    let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for i in 0..N {
        let b = Backbone::new(vec![0, 1]).unwrap();
        let t = run_loop_process(b, &env, 2, 8, &mut replica_stream(4, 0, i)).unwrap();
        *counts.entry(vec![t.observed().unwrap_or(u64::MAX)]).or_insert(0) += 1;
    }
    let mut exact: BTreeMap<Vec<u64>, f64> = (1..=8).map(|t| (vec![t], 0.5f64.powi(t as i32))).collect();
    exact.insert(vec![u64::MAX], 0.5f64.powi(8));
    assert_frequencies(&exact, &counts, N, 5.0);
}

#[test]
fn single_step_hit_probability() {
    // Leaf next to the root: growth at time 0 makes its degree 2.
    let tree = GrowingTree::new(&TreeShape::Path { length: 1, loop_at_root: true }).unwrap();
    let env = EnvironmentSpec::Constant { c: 1 }.sampler().unwrap();
    const N: u64 = 100_000;
    let hits = (0..N)
        .filter(|&i| {
            let r = first_hitting_time(&tree, VertexId(1), VertexId::ROOT, &env, 2, 1, &mut replica_stream(5, 0, i))
                .unwrap();
            r.time == Observation::Observed(1)
        })
        .count();
    let p = hits as f64 / N as f64;
    assert!((p - 0.5).abs() < 5.0 * (0.25 / N as f64).sqrt(), "p = {p}");
}

/// Compressed simulator against the fully materialized reference: terminal
/// depth and height means agree within five standard errors.
#[test]
fn compressed_tree_matches_reference_walk() {
    const N: u64 = 20_000;
    const H: u64 = 300;
    let cases = [
        (1, EnvironmentSpec::Bernoulli { p: 0.5 }, vec![(0, 0.5), (1, 0.5)]),
        (2, EnvironmentSpec::Constant { c: 1 }, vec![(1, 1.0)]),
        (3, EnvironmentSpec::Bernoulli { p: 0.5 }, vec![(0, 0.5), (1, 0.5)]),
        (2, EnvironmentSpec::Table { pmf: vec![0.2, 0.5, 0.3] }, vec![(0, 0.2), (1, 0.5), (2, 0.3)]),
    ];
    for (s, env, pmf) in cases {
        let tree0 = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
        let spec = RunSpec { s, horizon: H, stride: H, targets: vec![] };
        let fast: Vec<(f64, f64)> = (0..N)
            .into_par_iter()
            .map(|i| {
                let r = run(&tree0, VertexId::ROOT, &env, &spec, &mut replica_stream(6, 0, i)).unwrap();
                (r.final_depth as f64, r.final_tree.height as f64)
            })
            .collect();
        let slow: Vec<(f64, f64)> = (0..N)
            .into_par_iter()
            .map(|i| {
                let mut rng = replica_stream(6, 1, i);
                let mut w = RefWalk::new(RefTree::single_with_loop(), 0, s);
                for _ in 0..H {
                    w.step(
                        |_, rng: &mut _| {
                            let u: f64 = Rng::random(rng);
                            let mut acc = 0.0;
                            for &(k, p) in &pmf {
                                acc += p;
                                if u < acc {
                                    return k;
                                }
                            }
                            pmf.last().unwrap().0
                        },
                        &mut rng,
                    );
                }
                (w.depth() as f64, w.tree.height() as f64)
            })
            .collect();
        for pick in [|x: &(f64, f64)| x.0, |x: &(f64, f64)| x.1] {
            let a: Vec<f64> = fast.iter().map(pick).collect();
            let b: Vec<f64> = slow.iter().map(pick).collect();
            let (ma, mb) = (mean(&a), mean(&b));
            let se = (var(&a) / N as f64 + var(&b) / N as f64).sqrt();
            assert!((ma - mb).abs() < 5.0 * se, "s = {s}: compressed {ma}, reference {mb}, se {se}");
        }
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn var(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

/// Before the first loop crossing the walker sits on the root at every even
/// time, so `P(first crossing >= 2n)` equals the environment average of
/// `prod_{i<n} (1 - 1/(d + S_i))` with `d` the initial root degree.
#[test]
fn first_crossing_tail_matches_environment_product() {
    const N: u64 = 40_000;
    let env = EnvironmentSpec::Geometric { mean: 2.0 };
    let sampler = env.sampler().unwrap();
    let checkpoints = [1u64, 4, 16, 64];
    let horizon = 2 * checkpoints[checkpoints.len() - 1];
    let tree0 = GrowingTree::new(&TreeShape::StarWithLoop { leaves: 1 }).unwrap();
    let first: Vec<u64> = (0..N)
        .into_par_iter()
        .map(|i| {
            let spec = RunSpec { s: 2, horizon, stride: horizon, targets: vec![] };
            let r = run(&tree0, VertexId::ROOT, &env, &spec, &mut replica_stream(7, 0, i)).unwrap();
            r.self_loop_crossings.first().copied().unwrap_or(u64::MAX)
        })
        .collect();
    let products: Vec<Vec<f64>> = (0..N)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_stream(7, 1, i);
            let d = 2.0;
            let mut partial = 0u64;
            let mut prod = 1.0;
            let mut out = Vec::new();
            for j in 0..*checkpoints.last().unwrap() {
                partial += sampler.sample(2 * j, &mut rng);
                prod *= 1.0 - 1.0 / (d + partial as f64);
                if checkpoints.contains(&(j + 1)) {
                    out.push(prod);
                }
            }
            out
        })
        .collect();
    for (c, &n) in checkpoints.iter().enumerate() {
        let walk: Vec<f64> = first.iter().map(|&t| f64::from(u8::from(t >= 2 * n))).collect();
        let oracle: Vec<f64> = products.iter().map(|p| p[c]).collect();
        let se = (var(&walk) / N as f64 + var(&oracle) / N as f64).sqrt();
        let (a, b) = (mean(&walk), mean(&oracle));
        assert!((a - b).abs() < 5.0 * se, "n = {n}: walk {a}, product {b}, se {se}");
    }
}

#[test]
fn backbone_matches_snapshot_recount() {
    let tree0 = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
    let env = EnvironmentSpec::Bernoulli { p: 0.7 };
    for seed in 0..20u64 {
        // Grow a random tree, then pick the deepest vertex with a child or leaf.
        let sampler = env.sampler().unwrap();
        let mut tree = tree0.clone();
        let mut state = WalkerState::new(VertexId::ROOT, 1).unwrap();
        let mut rng = replica_stream(8, 0, seed);
        for _ in 0..400 {
            step(&mut state, &mut tree, &sampler, &mut rng);
        }
        let snap = tree.snapshot();
        let Some(x0) = snap
            .vertices
            .iter()
            .filter(|v| v.depth >= 2 && (v.pristine > 0 || snap.vertices.iter().any(|w| w.parent == Some(v.id))))
            .max_by_key(|v| (v.depth, v.id))
            .map(|v| v.id)
        else {
            continue;
        };
        let b = build_backbone(&tree, VertexId::ROOT, x0).unwrap();
        assert_eq!(b.length() as u64, tree.dist(x0, VertexId::ROOT));

        // Recount from the snapshot alone: path by parent links, then every
        // neighbour (parent, children, pristine leaves, root loop) not on the path.
        let parent_of = |id: VertexId| snap.vertices[id.index()].parent;
        let mut path = vec![x0];
        while let Some(p) = parent_of(*path.last().unwrap()) {
            path.push(p);
        }
        path.reverse();
        for (i, &v) in path.iter().enumerate() {
            let rec = &snap.vertices[v.index()];
            let mut off = rec.pristine;
            off += snap
                .vertices
                .iter()
                .filter(|w| w.parent == Some(v) && !path.contains(&w.id))
                .count() as u64;
            if let Some(p) = rec.parent {
                off += u64::from(!path.contains(&p));
            }
            if v == VertexId::ROOT && snap.root_self_loop {
                off += 1;
            }
            assert_eq!(b.loops()[i], off, "seed {seed}, index {i}");
        }
    }
}
