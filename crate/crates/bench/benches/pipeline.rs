use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use tollsim_bench::{carrier, commuters, grid, GridOracle};
use tollsim_core::choice::{ChoiceModel, Nest};
use tollsim_core::clock::PeriodWindows;
use tollsim_core::freight::generate_vop_choice_set;
use tollsim_core::mesosim::{simulate_day, PathCache, SchemeGeometry, SkimSet, SupplySpec};
use tollsim_core::pricing::TollScheme;
use tollsim_core::scenario::{run_scenario, synthesize, ScenarioConfig};

fn choice(c: &mut Criterion) {
    let v: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
    let nests: Vec<Nest> = (0..5)
        .map(|k| Nest {
            members: (k * 10..k * 10 + 10).collect(),
            coef: 0.5,
        })
        .collect();
    c.bench_function("mnl_50", |b| b.iter(|| ChoiceModel::mnl(black_box(v.clone()), 1.0).probabilities().unwrap()));
    c.bench_function("nested_50", |b| {
        b.iter(|| ChoiceModel::nested(black_box(v.clone()), 1.0, nests.clone()).probabilities().unwrap())
    });
}

fn vop(c: &mut Criterion) {
    let (s, f) = carrier(10, 4);
    c.bench_function("vop_choice_set_10x4", |b| b.iter(|| generate_vop_choice_set(black_box(&s), &f, &GridOracle).unwrap()));
}

fn supply(c: &mut Criterion) {
    let net = grid(10);
    let plans = commuters(&net, 2000);
    let spec = SupplySpec::default();
    let geo = SchemeGeometry::new(&net, net.zones.iter().map(|z| z.in_toll_area).collect());
    let skims = SkimSet::free_flow(&net, &geo, PeriodWindows::default(), spec.n_intervals());
    let mut g = c.benchmark_group("supply");
    g.sample_size(10);
    g.bench_function("simulate_day_2000_cars", |b| {
        b.iter(|| {
            let mut cache = PathCache::new(spec.k_paths);
            simulate_day(&net, black_box(&plans), &TollScheme::none(), &skims, &spec, &mut cache, 1).unwrap()
        })
    });
    g.finish();
}

fn scenario(c: &mut Criterion) {
    let cfg = ScenarioConfig::tiny();
    let syn = synthesize(&cfg).unwrap();
    let mut g = c.benchmark_group("scenario");
    g.sample_size(10);
    g.bench_function("tiny_synthesis", |b| b.iter(|| synthesize(black_box(&cfg)).unwrap()));
    g.bench_function("tiny_baseline_run", |b| b.iter(|| run_scenario(&cfg, &syn, &TollScheme::none()).unwrap()));
    g.finish();
}

criterion_group!(benches, choice, vop, supply, scenario);
criterion_main!(benches);
