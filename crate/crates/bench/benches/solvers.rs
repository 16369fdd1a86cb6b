use criterion::{criterion_group, criterion_main, Criterion};
use qkdleak_core::decoylp::{solve_refined, Quantity};
use qkdleak_core::gramsdp::{overlap_lower_bound, GramProblem, DEFAULT_TOL};
use qkdleak_core::lp::{solve, LinearProgram, Relation, Sense};
use qkdleak_core::{Engine, EngineConfig, IntensitySet, LeakageModel, PhaseDistribution, SourceScenario};
use std::hint::black_box;

fn general(epsilon: f64) -> SourceScenario {
    SourceScenario::new(LeakageModel::GeneralEpsilon { epsilon, dist: PhaseDistribution::UniformContinuous })
}

fn lp(c: &mut Criterion) {
    // Transportation-like program with 12 variables and 7 rows.
    let mut p = LinearProgram::unit_box(12);
    p.objective = (0..12).map(|i| 1.0 + (i % 5) as f64).collect();
    for r in 0..3 {
        p.add_sparse(&[(4 * r, 1.0), (4 * r + 1, 1.0), (4 * r + 2, 1.0), (4 * r + 3, 1.0)], Relation::Ge, 1.5);
    }
    for k in 0..4 {
        p.add_sparse(&[(k, 1.0), (k + 4, 1.0), (k + 8, 1.0)], Relation::Le, 1.2);
    }
    c.bench_function("lp/dense_12x7", |b| b.iter(|| solve(black_box(&p), Sense::Minimize).unwrap()));

    let engine = Engine::new(general(1e-8), EngineConfig::default()).unwrap();
    let set = IntensitySet::asymptotic(0.5, 0.1, 0.0).unwrap();
    let groups = engine.decoy_inputs(50.0, &set).unwrap();
    let inp = &groups[0].inputs;
    let refs = vec![[0.5; 3]; inp.n_cut + 1];
    c.bench_function("lp/decoy_single_photon_yield", |b| {
        b.iter(|| solve_refined(black_box(inp), Quantity::Yield, (1, 0), &refs, 2).unwrap())
    });
}

fn sdp(c: &mut Criterion) {
    let problem = GramProblem { ideal_overlap: 0.7, gamma_zeta: 1e-3, gamma_gamma: 4e-3 };
    c.bench_function("sdp/overlap_lower_bound", |b| {
        b.iter(|| overlap_lower_bound(black_box(&problem), DEFAULT_TOL).unwrap())
    });
}

fn key_rate(c: &mut Criterion) {
    let set = IntensitySet::asymptotic(0.5, 0.1, 0.0).unwrap();
    let mut g = c.benchmark_group("key_rate");
    g.sample_size(20);
    for eps in [0.0, 1e-8] {
        let engine = Engine::new(general(eps), EngineConfig::default()).unwrap();
        g.bench_function(format!("point_eps_{eps:e}"), |b| b.iter(|| engine.evaluate_point(black_box(50.0), &set).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, lp, sdp, key_rate);
criterion_main!(benches);
