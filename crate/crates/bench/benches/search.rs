use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use htps::gen::{GenConfig, Generator};
use htps::htps::{search, SearchParams};
use htps::learn::HeuristicOracle;
use htps_bench::{basic_env, goals, IDENTITIES};

fn bench_search(c: &mut Criterion) {
    let env = basic_env();
    let oracle = HeuristicOracle::new(env.clone());
    let params = SearchParams { budget: 500, ..SearchParams::default() };
    let mut group = c.benchmark_group("search");
    for (name, goal) in IDENTITIES.iter().zip(goals()) {
        group.bench_function(*name, |b| {
            b.iter_batched(|| goal.clone(), |g| search(&env, g, &oracle, &params), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn bench_tactics(c: &mut Criterion) {
    let env = basic_env();
    let goal = goals().pop().unwrap();
    c.bench_function("enumerate_tactics", |b| b.iter(|| env.enumerate_tactics(&goal, 4096).len()));
}

fn bench_generate(c: &mut Criterion) {
    let env = basic_env();
    c.bench_function("random_walk", |b| {
        let mut g = Generator::new(env.clone(), GenConfig { walk_len: [4, 8], ..GenConfig::default() }).unwrap();
        b.iter(|| g.random_walk().unwrap())
    });
}

criterion_group!(benches, bench_search, bench_tactics, bench_generate);
criterion_main!(benches);
