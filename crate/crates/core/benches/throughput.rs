use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use colav_core::batch::{run, RunSpec};
use colav_core::exec::Execution;
use colav_core::perception::cast_rays_with;
use colav_core::policy::PolicySpec;
use colav_core::scenario::{generate_training_scenario, ScenarioSpec, TrainingKnobs};
use colav_core::Env;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn batch_episodes(c: &mut Criterion) {
    let spec = RunSpec {
        scenario: ScenarioSpec::from_name("head_on").unwrap(),
        policy: PolicySpec::from_name("give_way_scripted", None).unwrap(),
        episodes: 8,
        seed: 0,
    };
    let mut group = c.benchmark_group("batch_head_on_x8");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run(black_box(&spec), exec, false).unwrap())
        });
    }
    group.finish();
}

fn ray_casting(c: &mut Criterion) {
    let cfg = generate_training_scenario(3, &TrainingKnobs::default()).unwrap();
    let range = cfg.perception.sensor_range;
    let mut env = Env::new(cfg).unwrap();
    env.reset();
    let os = *env.state();
    let obstacles = env.obstacles_now();
    let mut group = c.benchmark_group("ray_cast");
    for n_rays in [180, 720] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n_rays), &n_rays, |b, &n| {
                b.iter(|| cast_rays_with(exec, black_box(&os), &obstacles, n, range))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, batch_episodes, ray_casting);
criterion_main!(benches);
