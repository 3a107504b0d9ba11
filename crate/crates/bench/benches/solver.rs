use aerial_mec::engine::{stabilize, Game, Grouping, StabilizeLimits};
use aerial_mec::sim::{generate_scenario, ScenarioConfig};
use aerial_mec::{solve_f3, NetworkState, WeightConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn states(n_uavs: usize) -> Vec<NetworkState> {
    let cfg = ScenarioConfig {
        n_uavs,
        n_slots: 8,
        seed: 42,
        ..Default::default()
    };
    generate_scenario(&cfg).unwrap().map(Result::unwrap).collect()
}

fn bench_allocator(c: &mut Criterion) {
    let weights = WeightConfig::default();
    let mut group = c.benchmark_group("solve_f3");
    for n in [1, 3, 10] {
        let all = states(n);
        let members: Vec<usize> = (0..n).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &all, |b, all| {
            b.iter(|| {
                for s in all {
                    black_box(solve_f3(&members, s, &weights, 1e-6).unwrap());
                }
            })
        });
    }
    group.finish();
}

fn bench_stabilize(c: &mut Criterion) {
    let weights = WeightConfig::default();
    let mut group = c.benchmark_group("stabilize_from_singletons");
    group.sample_size(10);
    for n in [5, 10, 20] {
        let all = states(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &all, |b, all| {
            b.iter(|| {
                for s in all {
                    let game = Game::new(s, &weights);
                    let start = game.evaluate(Grouping::singletons(n), 0).unwrap();
                    black_box(stabilize(&game, start, StabilizeLimits::default()).unwrap());
                }
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_allocator, bench_stabilize);
criterion_main!(benches);
