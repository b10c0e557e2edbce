//! Acceptance criteria, run in sequence with one summary line each.
//!
//! Summary lines go straight to the process stdout so they show up without
//! `--nocapture`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use bpbkit_core::ahsp::{direct_sum_witness, series_deficit, verify_ahsp_witness, FiniteDimOracle, SumCase};
use bpbkit_core::bpb::filter_large_real_part;
use bpbkit_core::harness::{run_scenario, Report, Scenario, ScenarioKind, TrialReport};
use bpbkit_core::lattice_sum::build_norming_element;
use bpbkit_core::moduli::{convexity_modulus, monotonicity_modulus, Method};
use bpbkit_core::{AbsoluteNorm2, Error, FiniteLattice, Hp, NormedSpace, Real};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Default)]
struct Suite {
    /// Every scenario run so far with its serialized report.
    runs: Vec<(Scenario, String)>,
    results: Vec<(usize, bool)>,
}

impl Suite {
    fn run(&mut self, kind: ScenarioKind, params: Value, seed: u64, trials: usize) -> Report {
        let s = Scenario {
            kind,
            params,
            seed,
            trials,
        };
        let report = run_scenario(&s).unwrap_or_else(|e| panic!("{kind:?}: {e}"));
        self.runs.push((s, serde_json::to_string(&report).unwrap()));
        report
    }

    fn criterion(&mut self, n: usize, title: &str, budget: Duration, f: impl FnOnce(&mut Self) -> Outcome) {
        let start = Instant::now();
        let out = f(self);
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let pass = out.pass && in_time;
        let mut line = format!(
            "criterion {n} [{}] {title}: {} ({:.2}s of {:.0}s budget)",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs_f64()
        );
        if out.pass && !in_time {
            line.push_str(" over time budget");
        }
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "{line}").unwrap();
        stdout.flush().unwrap();
        self.results.push((n, pass));
    }
}

fn first_failure(r: &Report) -> String {
    match r.trials.iter().find(|t| !t.passed) {
        None => String::new(),
        Some(t) => match &t.error {
            Some(e) => format!("; trial {} seed {}: {e}", t.index, t.seed),
            None => {
                let labels: Vec<&str> = t.certificates().filter(|c| !c.holds).map(|c| c.label.as_str()).collect();
                format!("; trial {} seed {} failed {}", t.index, t.seed, labels.join(","))
            }
        },
    }
}

fn has_labels(t: &TrialReport, labels: &[&str]) -> bool {
    labels.iter().all(|l| t.certificates().any(|c| c.label == *l))
}

fn euclid(dim: usize) -> Value {
    json!({"kind": "euclidean", "dim": dim})
}

fn generators() -> Vec<(&'static str, Value)> {
    vec![
        ("l1", json!({"kind": "lp", "p": 1.0})),
        ("l2", json!({"kind": "lp", "p": 2.0})),
        ("l3", json!({"kind": "lp", "p": 3.0})),
        ("sup-table", json!({"kind": "table", "samples": [[1.0, 0.0, 1.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]]})),
    ]
}

fn aligning_isometry(suite: &mut Suite) -> Outcome {
    let mut failures = Vec::new();
    let mut total = 0;
    for complex in [false, true] {
        for (i, dim) in [1usize, 2, 3, 8, 16].into_iter().enumerate() {
            let r = suite.run(ScenarioKind::Align, json!({"dim": dim, "complex": complex}), 100 + i as u64, 1000);
            total += r.passed;
            if !r.all_pass {
                failures.push(format!("dim {dim} complex {complex}: {} failed{}", r.failed, first_failure(&r)));
            }
        }
    }
    Outcome::new(failures.is_empty(), format!("{total}/10000 pairs pass {}", failures.join(" | ")))
}

fn convex_mass_filter(_: &mut Suite) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut errors = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=20);
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<Hp> = raw.iter().map(|w| Hp::new(*w) / Hp::new(total)).collect();
        let values: Vec<Hp> = (0..n)
            .map(|_| {
                let u: f64 = rng.random_range(0.0..1.0);
                Hp::new(1.0 - 2.0 * u.powi(4))
            })
            .collect();
        let avg = weights.iter().zip(&values).fold(Hp::new(0.0), |a, (w, v)| a + w.clone() * v.clone());
        let eta = (Hp::new(1.0) - avg) * Hp::new(1.01) + Hp::new(1e-30);
        let r = Hp::new(rng.random_range(0.01..0.99));
        match filter_large_real_part(&weights, &values, &eta, &r) {
            Ok(set) => {
                // Independent recount from the definition of the set.
                let mass = weights
                    .iter()
                    .zip(&values)
                    .filter(|(_, v)| **v > r)
                    .fold(Hp::new(0.0), |a, (w, _)| a + w.clone());
                let bound = Hp::new(1.0) - eta.clone() / (Hp::new(1.0) - r.clone());
                if !(mass > bound) || mass != set.mass {
                    violations += 1;
                }
            }
            Err(_) => errors += 1,
        }
    }
    Outcome::new(
        violations == 0 && errors == 0,
        format!("10000 instances, {violations} violations, {errors} errors"),
    )
}

fn l1sum_correction(suite: &mut Suite) -> Outcome {
    let construction = ["sum-outside-selected", "operator-distance", "operator-chain", "vector-distance", "vector-chain"];
    let verification = ["operator-distance", "vector-distance", "unit-vector", "attained-norm", "operator-norm"];
    let mut failures = Vec::new();
    let mut passed = 0;
    for (i, eps) in [0.1, 0.2, 0.5].into_iter().enumerate() {
        let r = suite.run(ScenarioKind::CorrectL1sum, json!({"epsilon": eps}), 300 + i as u64, 1000);
        passed += r.passed;
        let complete = r.trials.iter().all(|t| {
            construction.iter().all(|l| t.construction.get(l).count() == 1)
                && verification.iter().all(|l| t.verification.get(l).count() == 1)
        });
        if !r.all_pass || !complete {
            failures.push(format!("eps {eps}: {} failed, labels complete {complete}{}", r.failed, first_failure(&r)));
        }
    }
    Outcome::new(failures.is_empty(), format!("{passed}/3000 corrections certified {}", failures.join(" | ")))
}

fn case_fixtures() -> Result<Vec<SumCase>, Error> {
    let plane = NormedSpace::euclidean(2)?;
    let m = FiniteDimOracle::new(plane.clone())?;
    let n = FiniteDimOracle::new(plane.clone())?;
    let unit = |v: &[f64]| -> Vec<Hp> {
        let v: Vec<Hp> = v.iter().map(|x| Hp::new(*x)).collect();
        let norm = plane.norm(&v).unwrap();
        if norm.is_zero() {
            v
        } else {
            v.iter().map(|x| x.clone() / norm.clone()).collect()
        }
    };
    let pair = |a: &[f64], b: &[f64]| [unit(a), unit(b)].concat();
    let hp = |v: &[f64]| v.iter().map(|x| Hp::new(*x)).collect::<Vec<_>>();
    let fixtures = vec![
        (AbsoluteNorm2::lp(2.0), hp(&[0.2, 0.3, 0.5]), vec![pair(&[0.0, 0.0], &[0.6, 0.8]); 3], 0.5),
        (AbsoluteNorm2::lp(3.0), hp(&[0.5, 0.5]), vec![pair(&[1.0, 0.0], &[0.0, 0.0]); 2], 0.2),
        (
            AbsoluteNorm2::lp(1.0),
            hp(&[0.3, 0.3, 0.4]),
            vec![pair(&[1.0, 0.0], &[0.0, 0.0]), pair(&[0.0, 0.0], &[0.0, 1.0]), hp(&[0.5, 0.0, 0.0, 0.5])],
            0.5,
        ),
    ];
    let mut cases = Vec::new();
    for (f, w, xs, eps) in fixtures {
        let sum = NormedSpace::absolute_sum(plane.clone(), plane.clone(), f.clone());
        let out = direct_sum_witness(&m, &n, &f, &w, &xs, eps)?;
        if !out.certificates.all_hold() || !verify_ahsp_witness(&sum, &w, &xs, &out.witness).all_hold() {
            return Err(Error::InternalInvariant(format!("fixture {:?} does not verify", out.case)));
        }
        assert!(series_deficit(&sum, &w, &xs)? < Hp::new(1e-30));
        cases.push(out.case);
    }
    Ok(cases)
}

fn direct_sum(suite: &mut Suite) -> Outcome {
    let identities = ["selected-minus-first-in-second", "selected-minus-second-in-first"];
    let mut failures = Vec::new();
    let mut passed = 0;
    let mut cases: BTreeMap<String, usize> = BTreeMap::new();
    for (gi, (name, generator)) in generators().into_iter().enumerate() {
        for (ei, eps) in [0.2, 0.5].into_iter().enumerate() {
            let params = json!({"first": euclid(2), "second": euclid(2), "generator": generator, "epsilon": eps});
            let r = suite.run(ScenarioKind::AhspDirectSum, params, 400 + 10 * gi as u64 + ei as u64, 1000);
            passed += r.passed;
            let mut identities_ok = true;
            for t in &r.trials {
                let case = t.extra.get("case").and_then(Value::as_str).unwrap_or("none").to_string();
                if case == "balanced" {
                    identities_ok &= identities.iter().all(|l| {
                        let mut it = t.construction.get(l).peekable();
                        it.peek().is_some() && it.all(|c| c.holds)
                    });
                }
                *cases.entry(case).or_default() += 1;
            }
            if !r.all_pass || !identities_ok {
                failures.push(format!("{name} eps {eps}: {} failed, set identities {identities_ok}{}", r.failed, first_failure(&r)));
            }
        }
    }
    let fixtures = case_fixtures();
    let fixture_ok = matches!(
        fixtures.as_deref(),
        Ok([SumCase::SecondSummand, SumCase::FirstSummand, SumCase::Balanced])
    );
    if !fixture_ok {
        failures.push(format!("fixtures: {fixtures:?}"));
    }
    Outcome::new(
        failures.is_empty(),
        format!("{passed}/8000 witnesses verify, random cases {cases:?}, fixtures for all three cases {fixture_ok} {}", failures.join(" | ")),
    )
}

fn restriction(suite: &mut Suite) -> Outcome {
    let mut failures = Vec::new();
    let mut passed = 0;
    let gens = generators();
    for (i, (gi, k, eps)) in [(0usize, 0usize, 0.5), (2, 1, 0.5), (1, 0, 0.2), (3, 1, 0.4)].into_iter().enumerate() {
        let (name, generator) = &gens[gi];
        let params = json!({
            "first": euclid(2), "second": euclid(2), "generator": generator, "epsilon": eps, "restrict": k,
        });
        let r = suite.run(ScenarioKind::AhspDirectSum, params, 500 + i as u64, 250);
        passed += r.passed;
        let complete = r.trials.iter().all(|t| has_labels(t, &["component-norm", "complement-norm", "distance"]));
        if !r.all_pass || !complete {
            failures.push(format!("{name} component {k}: {} failed{}", r.failed, first_failure(&r)));
        }
    }
    Outcome::new(failures.is_empty(), format!("{passed}/1000 restricted witnesses verify {}", failures.join(" | ")))
}

fn lattice_sum(suite: &mut Suite) -> Outcome {
    let required = ["defect-total", "good-block-profile", "witness-distance", "functional-value", "lift-correction"];
    let mut failures = Vec::new();
    let mut passed = 0;
    for (pi, p) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        for m in 1..=4usize {
            let params = json!({
                "lattice": {"kind": "lp", "p": p, "dim": m},
                "components": vec![euclid(2); m],
                "epsilon": 0.4,
            });
            let r = suite.run(ScenarioKind::AhspLatticeSum, params, 600 + 10 * pi as u64 + m as u64, 250);
            passed += r.passed;
            let complete = r.trials.iter().all(|t| has_labels(t, &required));
            if !r.all_pass || !complete {
                failures.push(format!("p {p} m {m}: {} failed, labels complete {complete}{}", r.failed, first_failure(&r)));
            }
        }
    }
    Outcome::new(failures.is_empty(), format!("{passed}/3000 witnesses verify {}", failures.join(" | ")))
}

fn moduli(suite: &mut Suite) -> Outcome {
    let mut worst_convexity: f64 = 0.0;
    let mut worst_monotone: f64 = 0.0;
    let mut failures = Vec::new();
    let grid = [0.05, 0.25, 0.5, 1.0, 1.5, 1.95];
    for dim in 2..=4 {
        let space = NormedSpace::euclidean(dim).unwrap();
        for &eps in &grid {
            let exact = 1.0 - (1.0 - eps * eps / 4.0).sqrt();
            match convexity_modulus(&space, eps, Method::BruteForce { resolution: 1000 }) {
                Ok(v) => worst_convexity = worst_convexity.max((v - exact).abs()),
                Err(e) => failures.push(format!("convexity dim {dim} eps {eps}: {e}")),
            }
        }
    }
    for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
        for dim in 2..=6 {
            let e = FiniteLattice::lp(p, dim).unwrap();
            for eps in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let exact = 1.0 - (1.0 - f64::powf(eps, p)).powf(1.0 / p);
                match monotonicity_modulus(&e, eps, Method::BruteForce { resolution: 100 }) {
                    Ok(v) => worst_monotone = worst_monotone.max((v - exact).abs()),
                    Err(err) => failures.push(format!("monotonicity p {p} dim {dim}: {err}")),
                }
            }
        }
    }
    let sup = FiniteLattice::lp(f64::INFINITY, 3).unwrap();
    let sup_rejected = [Method::ClosedForm, Method::BruteForce { resolution: 100 }]
        .into_iter()
        .all(|m| matches!(monotonicity_modulus(&sup, 0.5, m), Err(Error::NotUniformlyMonotone { .. })));
    let r = suite.run(
        ScenarioKind::ModuliCurve,
        json!({"modulus": "convexity", "space": euclid(3), "grid": grid}),
        700,
        1,
    );
    if !r.all_pass {
        failures.push(format!("curve scenario{}", first_failure(&r)));
    }
    let pass = failures.is_empty() && worst_convexity <= 1e-4 && worst_monotone <= 1e-4 && sup_rejected;
    Outcome::new(
        pass,
        format!(
            "max convexity error {worst_convexity:.2e}, max monotonicity error {worst_monotone:.2e}, sup lattice rejected {sup_rejected} {}",
            failures.join(" | ")
        ),
    )
}

fn duality(suite: &mut Suite) -> Outcome {
    let mut failures = Vec::new();
    let mut functionals = 0;
    let mut worst_gap: f64 = 0.0;
    for (i, p) in [1.0, 2.0, 3.0].into_iter().enumerate() {
        let space = json!({
            "kind": "direct_sum",
            "dim": 7,
            "params": {
                "components": [
                    euclid(2),
                    {"kind": "lp", "dim": 3, "params": {"p": 3.0}},
                    {"kind": "lp", "dim": 2, "params": {"p": 1.5}},
                ],
                "combining": {"kind": "lp", "p": p, "dim": 3},
            },
        });
        let r = suite.run(ScenarioKind::DualityCheck, json!({"space": space}), 800 + i as u64, 40);
        functionals += r.trials.len();
        for t in &r.trials {
            for c in t.verification.get("duality-gap") {
                worst_gap = worst_gap.max(c.lhs);
            }
        }
        if !r.all_pass {
            failures.push(format!("p {p}{}", first_failure(&r)));
        }
    }
    // Norming probes with an independent check of the value and dual norm.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut violations = 0;
    for probe in 0..1000 {
        let p = [1.0, 2.0, 3.0, f64::INFINITY][probe % 4];
        let m = rng.random_range(1..=4);
        let comps: Vec<NormedSpace> = (0..m)
            .map(|k| if k % 2 == 0 { NormedSpace::euclidean(2) } else { NormedSpace::lp(3, 3.0) })
            .collect::<Result<_, _>>()
            .unwrap();
        let space = NormedSpace::direct_sum(comps, FiniteLattice::lp(p, m).unwrap()).unwrap();
        let z: Vec<f64> = (0..space.dim())
            .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(-2.0..2.0) })
            .collect();
        let eps = rng.random_range(1e-3..0.5);
        match build_norming_element(&space, &z, eps) {
            Ok((e, log)) => {
                let zs = e.assemble();
                let value: f64 = zs.iter().zip(&z).map(|(a, b)| a * b).sum();
                let dual = space.dual_norm(&zs).unwrap();
                if !log.all_hold() || !(value > space.norm(&z).unwrap() - eps) || dual > 1.0 + 1e-9 {
                    violations += 1;
                }
            }
            Err(_) => violations += 1,
        }
    }
    let pass = failures.is_empty() && violations == 0 && worst_gap <= 1e-4;
    Outcome::new(
        pass,
        format!(
            "{functionals} functionals, max gap {worst_gap:.2e}; 1000 norming probes, {violations} violations {}",
            failures.join(" | ")
        ),
    )
}

fn determinism(suite: &mut Suite) -> Outcome {
    let runs = std::mem::take(&mut suite.runs);
    let mismatched: Vec<String> = runs
        .iter()
        .filter(|(s, bytes)| serde_json::to_string(&run_scenario(s).unwrap()).unwrap() != *bytes)
        .map(|(s, _)| format!("{:?} seed {}", s.kind, s.seed))
        .collect();
    Outcome::new(
        mismatched.is_empty() && !runs.is_empty(),
        format!("{} scenarios replayed, {} differ {}", runs.len(), mismatched.len(), mismatched.join(", ")),
    )
}

#[test]
fn acceptance_criteria() {
    let mut suite = Suite::default();
    let s = Duration::from_secs;
    suite.criterion(1, "aligning isometry", s(5), aligning_isometry);
    suite.criterion(2, "convex-mass filter", s(1), convex_mass_filter);
    suite.criterion(3, "l1-sum correction", s(60), l1sum_correction);
    suite.criterion(4, "two-summand direct sum", s(120), direct_sum);
    suite.criterion(5, "witness restriction", s(30), restriction);
    suite.criterion(6, "lattice sum", s(180), lattice_sum);
    suite.criterion(7, "moduli oracles", s(30), moduli);
    suite.criterion(8, "duality and norming", s(10), duality);
    suite.criterion(9, "determinism", s(600), determinism);
    let failed: Vec<usize> = suite.results.iter().filter(|(_, p)| !p).map(|(n, _)| *n).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
