use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use tbrw_bench::{looped_backbone, warm_walk};
use tbrw_core::rng::stream;
use tbrw_core::{exit_time, run, run_loop_process, step, EnvironmentSpec, GrowingTree, RunSpec, TreeShape, VertexId};

fn single_steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for (name, env, s) in [
        ("bernoulli_s1", EnvironmentSpec::Bernoulli { p: 0.5 }, 1),
        ("constant_s2", EnvironmentSpec::Constant { c: 1 }, 2),
        ("power_law_s2", EnvironmentSpec::PowerLawTail { alpha: 0.5, delta: 1.0 }, 2),
    ] {
        let mut w = warm_walk(&env, s, 100_000, 1);
        group.bench_function(name, |b| b.iter(|| step(&mut w.state, &mut w.tree, &w.sampler, &mut w.rng)));
    }
    group.finish();
}

fn full_runs(c: &mut Criterion) {
    let tree = GrowingTree::new(&TreeShape::SingleVertexWithLoop).unwrap();
    let env = EnvironmentSpec::Bernoulli { p: 0.5 };
    let mut group = c.benchmark_group("run");
    group.sample_size(20);
    for stride in [1, 1000] {
        let spec = RunSpec { s: 1, horizon: 100_000, stride, targets: vec![VertexId::ROOT] };
        let mut seed = 0;
        group.bench_function(format!("horizon_1e5_stride_{stride}"), |b| {
            b.iter(|| {
                seed += 1;
                run(&tree, VertexId::ROOT, &env, &spec, &mut stream(seed)).unwrap()
            })
        });
    }
    group.finish();
}

fn exit_times(c: &mut Criterion) {
    let sampler = EnvironmentSpec::Bernoulli { p: 0.5 }.sampler().unwrap();
    let mut rng = stream(2);
    c.bench_function("exit_time_star_100", |b| {
        b.iter(|| exit_time(100, &sampler, 2, 1_000_000, &mut rng).unwrap())
    });
}

fn loop_process(c: &mut Criterion) {
    let sampler = EnvironmentSpec::Bernoulli { p: 0.5 }.sampler().unwrap();
    let mut rng = stream(3);
    c.bench_function("loop_process_length_9", |b| {
        b.iter_batched(
            || looped_backbone(9),
            |bb| run_loop_process(bb, &sampler, 1, 10_000, &mut rng).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, single_steps, full_runs, exit_times, loop_process);
criterion_main!(benches);
