use bpbkit_core::harness::{Pipeline, ScenarioKind};
use bpbkit_core::moduli::{convexity_modulus, Method};
use bpbkit_core::{align_isometry, NormedSpace};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use serde_json::{json, Value};
use std::hint::black_box;

fn solve_bench(c: &mut Criterion, name: &str, kind: ScenarioKind, params: Value) {
    let pipeline = Pipeline::new(kind, &params).expect("valid parameters");
    let docs: Vec<_> = (0..16).map(|s| pipeline.generate(s).expect("instance")).collect();
    let mut i = 0;
    c.bench_function(name, |b| {
        b.iter(|| {
            i = (i + 1) % docs.len();
            black_box(pipeline.solve(&docs[i]).expect("solution"))
        })
    });
}

fn alignment(c: &mut Criterion) {
    let mut group = c.benchmark_group("align");
    for dim in [2usize, 8, 16] {
        let u: Vec<f64> = (0..dim).map(|k| ((k + 1) as f64).sqrt()).collect();
        let v: Vec<f64> = (0..dim).map(|k| if k % 2 == 0 { 1.0 } else { -0.5 }).collect();
        let (nu, nv) = (u.iter().map(|x| x * x).sum::<f64>().sqrt(), v.iter().map(|x| x * x).sum::<f64>().sqrt());
        let u: Vec<f64> = u.iter().map(|x| x / nu).collect();
        let v: Vec<f64> = v.iter().map(|x| x / nv).collect();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| align_isometry(black_box(&u), black_box(&v)).expect("unit pair"))
        });
    }
    group.finish();
}

fn pipelines(c: &mut Criterion) {
    let plane = json!({"kind": "euclidean", "dim": 2});
    solve_bench(
        c,
        "correct_l1sum/3x2",
        ScenarioKind::CorrectL1sum,
        json!({"dims": [2, 2, 2], "h_dim": 3, "epsilon": 0.2}),
    );
    for (name, generator) in [("l1", json!({"kind": "lp", "p": 1.0})), ("l3", json!({"kind": "lp", "p": 3.0}))] {
        solve_bench(
            c,
            &format!("ahsp_direct_sum/{name}"),
            ScenarioKind::AhspDirectSum,
            json!({"first": plane, "second": plane, "generator": generator, "epsilon": 0.5}),
        );
    }
    solve_bench(
        c,
        "ahsp_lattice_sum/l2x3",
        ScenarioKind::AhspLatticeSum,
        json!({"lattice": {"kind": "lp", "p": 2.0, "dim": 3}, "components": [plane, plane, plane], "epsilon": 0.4}),
    );
}

fn moduli(c: &mut Criterion) {
    let space = NormedSpace::euclidean(3).expect("positive dimension");
    c.bench_function("convexity_modulus/brute_force_1000", |b| {
        b.iter(|| convexity_modulus(&space, black_box(0.5), Method::BruteForce { resolution: 1000 }).expect("modulus"))
    });
}

criterion_group!(benches, alignment, pipelines, moduli);
criterion_main!(benches);
