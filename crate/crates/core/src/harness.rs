//! Seeded scenario runner: random instance generation, construction,
//! independent verification and report assembly.
//!
//! Trial `i` of a scenario with master seed `s` draws its seed as the first
//! word of stream `i` of a ChaCha8 generator seeded with `s`. Trials run in
//! parallel and are collected in index order, so a report depends only on
//! the scenario.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::absolute::AbsoluteNorm2;
use crate::ahsp::{
    ahp_oracle_uniformly_convex, random_ahsp_instance, restrict_witness, verify_ahsp_witness, AhpOracle, AhspInstance,
    AhspOracle, AhspWitness, DirectSumOracle, FiniteDimOracle, SumParameters,
};
use crate::alignment::{align_isometry, verify_isometry, AligningIsometry, Field, IsometryReport};
use crate::bpb::{cascade_l1sum, random_l1sum_instance, verify_bpb_correction, ComponentOracle, HilbertOracle, L1SumCorrection, L1SumInstance};
use crate::certificate::{CertificateLog, Relation};
use crate::error::{Error, Result};
use crate::lattice::FiniteLattice;
use crate::lattice_sum::{
    build_norming_element, duality_isometry_check, random_functional, DualityReport, LatticeParameters,
    LatticeSumOracle, NormingElement,
};
use crate::linalg;
use crate::moduli::{convexity_curve, convexity_modulus, monotonicity_curve, monotonicity_modulus, Method, ModulusCurve, ModulusKind};
use crate::real::{Hp, Real};
use crate::spaces::NormedSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Align,
    CorrectL1sum,
    AhspDirectSum,
    AhspLatticeSum,
    ModuliCurve,
    DualityCheck,
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::Align => "align",
            ScenarioKind::CorrectL1sum => "correct_l1sum",
            ScenarioKind::AhspDirectSum => "ahsp_direct_sum",
            ScenarioKind::AhspLatticeSum => "ahsp_lattice_sum",
            ScenarioKind::ModuliCurve => "moduli_curve",
            ScenarioKind::DualityCheck => "duality_check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlignParams {
    pub dim: usize,
    #[serde(default)]
    pub complex: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1SumParams {
    /// Dimensions of the euclidean summands of the domain; drawn per trial
    /// when absent.
    #[serde(default)]
    pub dims: Option<Vec<usize>>,
    /// Codomain dimension; drawn per trial when absent.
    #[serde(default)]
    pub h_dim: Option<usize>,
    pub epsilon: f64,
    #[serde(default = "default_components")]
    pub max_components: usize,
    #[serde(default = "default_terms")]
    pub max_dim: usize,
}

impl L1SumParams {
    /// Summand dimensions and codomain dimension of the trial with `seed`.
    fn shape(&self, seed: u64) -> (Vec<usize>, usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let dims = self.dims.clone().unwrap_or_else(|| {
            let m = rng.random_range(1..=self.max_components);
            (0..m).map(|_| rng.random_range(1..=self.max_dim)).collect()
        });
        let h = self.h_dim.unwrap_or_else(|| rng.random_range(1..=self.max_dim));
        (dims, h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectSumParams {
    pub first: NormedSpace,
    pub second: NormedSpace,
    pub generator: AbsoluteNorm2,
    pub epsilon: f64,
    /// Series lengths cycle through `1..=max_terms`.
    #[serde(default = "default_terms")]
    pub max_terms: usize,
    /// Generate series inside this summand and restrict a sum witness at
    /// `epsilon / 2` back to it.
    #[serde(default)]
    pub restrict: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSumParams {
    pub lattice: FiniteLattice,
    /// Uniformly convex components, one per lattice coordinate.
    pub components: Vec<NormedSpace>,
    pub epsilon: f64,
    #[serde(default = "default_terms")]
    pub max_terms: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuliParams {
    pub modulus: ModulusKind,
    /// Space for the convexity modulus.
    #[serde(default)]
    pub space: Option<NormedSpace>,
    /// Lattice for the monotonicity modulus.
    #[serde(default)]
    pub lattice: Option<FiniteLattice>,
    pub grid: Vec<f64>,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_modulus_tol")]
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualityParams {
    /// A lattice sum of components with exact duals.
    pub space: NormedSpace,
    #[serde(default = "default_modulus_tol")]
    pub tolerance: f64,
    #[serde(default = "default_norming_eps")]
    pub norming_epsilon: f64,
}

fn default_terms() -> usize {
    4
}

fn default_components() -> usize {
    5
}

fn default_method() -> Method {
    Method::BruteForce { resolution: 1000 }
}

fn default_modulus_tol() -> f64 {
    1e-4
}

fn default_norming_eps() -> f64 {
    0.1
}

fn parse<T: DeserializeOwned>(kind: ScenarioKind, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("{} params: {e}", kind.name())))
}

fn from_doc<T: DeserializeOwned>(what: &str, v: &Value) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Config(format!("malformed {what}: {e}")))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

/// Seed of trial `index` under master seed `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// A generated instance together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub kind: ScenarioKind,
    pub params: Value,
    pub seed: u64,
    pub instance: Value,
    /// Amount by which the generated instance clears its hypothesis.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_margin: Option<f64>,
}

/// Output of a construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub witness: Value,
    /// Inequalities checked while constructing.
    pub certificates: CertificateLog,
    #[serde(default)]
    pub extra: Value,
}

struct DirectSumPipeline {
    params: DirectSumParams,
    oracle: DirectSumOracle<Hp>,
    parameters: SumParameters,
}

struct LatticePipeline {
    params: LatticeSumParams,
    oracle: LatticeSumOracle<Hp>,
    parameters: LatticeParameters,
}

/// Everything a scenario kind needs, computed once from its parameters.
pub struct Pipeline {
    kind: ScenarioKind,
    raw: Value,
    inner: Inner,
}

enum Inner {
    Align(AlignParams),
    L1Sum(L1SumParams),
    DirectSum(Box<DirectSumPipeline>),
    LatticeSum(Box<LatticePipeline>),
    Moduli(ModuliParams),
    Duality(DualityParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct C64(f64, f64);

fn to_c(v: &[C64]) -> Vec<Complex64> {
    v.iter().map(|c| Complex64::new(c.0, c.1)).collect()
}

fn from_c(v: &[Complex64]) -> Vec<C64> {
    v.iter().map(|c| C64(c.re, c.im)).collect()
}

#[derive(Serialize, Deserialize)]
struct AlignInstance<T> {
    u: Vec<T>,
    v: Vec<T>,
}

#[derive(Serialize, Deserialize)]
struct AlignWitness<T> {
    matrix: Vec<Vec<T>>,
    u_perp: Vec<T>,
    v_perp: Vec<T>,
    defect: f64,
}

fn isometry_log(rep: &IsometryReport) -> CertificateLog {
    let mut log = CertificateLog::new();
    log.check("unitarity", &rep.unitarity, Relation::Le, &1e-10);
    log.check("alignment", &rep.alignment, Relation::Le, &1e-10);
    log.check("defect", &rep.defect, Relation::Le, &1e-8);
    log.check("orthogonality", &rep.orthogonality, Relation::Le, &1e-10);
    log
}

fn gaussian_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn complex_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    let raw = gaussian_unit(rng, 2 * n);
    raw.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

fn solve_align<F: Field<Re = f64>>(u: &[F], v: &[F]) -> Result<(AligningIsometry<F>, CertificateLog)> {
    let phi = align_isometry(u, v)?;
    Ok((phi, CertificateLog::new()))
}

fn ahsp_doc_margin(inst: &AhspInstance, eta: f64) -> Result<f64> {
    Ok(eta - inst.deficit()?.to_f64())
}

impl Pipeline {
    pub fn new(kind: ScenarioKind, params: &Value) -> Result<Self> {
        let inner = match kind {
            ScenarioKind::Align => {
                let p: AlignParams = parse(kind, params)?;
                if p.dim == 0 {
                    return Err(Error::Config("align needs dim >= 1".into()));
                }
                Inner::Align(p)
            }
            ScenarioKind::CorrectL1sum => {
                let p: L1SumParams = parse(kind, params)?;
                let bad_dims = p.dims.as_ref().is_some_and(|d| d.is_empty() || d.contains(&0));
                if bad_dims || p.h_dim == Some(0) || p.max_components == 0 || p.max_dim == 0 {
                    return Err(Error::Config("correct_l1sum needs positive dimensions and at least one component".into()));
                }
                if !(p.epsilon > 0.0 && p.epsilon < 1.0) {
                    return Err(Error::Config(format!("epsilon {} outside (0, 1)", p.epsilon)));
                }
                Inner::L1Sum(p)
            }
            ScenarioKind::AhspDirectSum => {
                let p: DirectSumParams = parse(kind, params)?;
                if p.max_terms == 0 {
                    return Err(Error::Config("max_terms must be positive".into()));
                }
                if matches!(p.restrict, Some(k) if k > 1) {
                    return Err(Error::Config("restrict must be 0 or 1".into()));
                }
                let oracle = DirectSumOracle::new(
                    Box::new(FiniteDimOracle::new(p.first.clone())?),
                    Box::new(FiniteDimOracle::new(p.second.clone())?),
                    p.generator.clone(),
                );
                let eps = if p.restrict.is_some() { p.epsilon / 2.0 } else { p.epsilon };
                let parameters = oracle.parameters(eps)?;
                Inner::DirectSum(Box::new(DirectSumPipeline {
                    params: p,
                    oracle,
                    parameters,
                }))
            }
            ScenarioKind::AhspLatticeSum => {
                let p: LatticeSumParams = parse(kind, params)?;
                if p.components.is_empty() || p.components.len() != p.lattice.dim() {
                    return Err(Error::Config("one component per lattice coordinate is required".into()));
                }
                if p.max_terms == 0 {
                    return Err(Error::Config("max_terms must be positive".into()));
                }
                let faces: Vec<Box<dyn AhpOracle<Hp>>> = p
                    .components
                    .iter()
                    .map(|c| Ok(Box::new(ahp_oracle_uniformly_convex(c.clone())?) as Box<dyn AhpOracle<Hp>>))
                    .collect::<Result<_>>()?;
                let lattice = Box::new(FiniteDimOracle::new(NormedSpace::lattice(p.lattice.clone()))?);
                let oracle = LatticeSumOracle::new(lattice, faces)?;
                let parameters = oracle.parameters(p.epsilon)?;
                Inner::LatticeSum(Box::new(LatticePipeline {
                    params: p,
                    oracle,
                    parameters,
                }))
            }
            ScenarioKind::ModuliCurve => {
                let p: ModuliParams = parse(kind, params)?;
                let ok = match p.modulus {
                    ModulusKind::Convexity => p.space.is_some() && p.lattice.is_none(),
                    ModulusKind::Monotonicity => p.lattice.is_some() && p.space.is_none(),
                };
                if !ok {
                    return Err(Error::Config("convexity takes `space`, monotonicity takes `lattice`".into()));
                }
                if p.grid.is_empty() {
                    return Err(Error::Config("empty epsilon grid".into()));
                }
                Inner::Moduli(p)
            }
            ScenarioKind::DualityCheck => {
                let p: DualityParams = parse(kind, params)?;
                if p.space.components().is_none() {
                    return Err(Error::Config("duality_check needs a lattice sum".into()));
                }
                Inner::Duality(p)
            }
        };
        Ok(Self {
            kind,
            raw: params.clone(),
            inner,
        })
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    /// Parameters derived from the scenario, if the kind has any.
    pub fn derived(&self) -> Value {
        match &self.inner {
            Inner::DirectSum(d) => to_value(&d.parameters),
            Inner::LatticeSum(l) => to_value(&l.parameters),
            Inner::L1Sum(p) => {
                let h = NormedSpace::euclidean(p.h_dim.unwrap_or(1)).expect("positive dimension");
                cascade_l1sum(p.epsilon, |s| <HilbertOracle as ComponentOracle<Hp>>::eta(&HilbertOracle, s), &h)
                    .map(|c| to_value(&c))
                    .unwrap_or(Value::Null)
            }
            _ => Value::Null,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<InstanceDoc> {
        let (instance, hypothesis_margin) = match &self.inner {
            Inner::Align(p) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                if p.complex {
                    let u = from_c(&complex_unit(&mut rng, p.dim));
                    let v = from_c(&complex_unit(&mut rng, p.dim));
                    (to_value(&AlignInstance { u, v }), None)
                } else {
                    let u = gaussian_unit(&mut rng, p.dim);
                    let v = gaussian_unit(&mut rng, p.dim);
                    (to_value(&AlignInstance { u, v }), None)
                }
            }
            Inner::L1Sum(p) => {
                let (dims, h_dim) = p.shape(seed);
                let inst = random_l1sum_instance(seed, &dims, h_dim, p.epsilon)?;
                let cascade = cascade_l1sum(
                    p.epsilon,
                    |s| <HilbertOracle as ComponentOracle<Hp>>::eta(&HilbertOracle, s),
                    &inst.codomain,
                )?;
                let value = inst.codomain.norm(&inst.operator.mul_vec(&inst.z0)?)?;
                let t = Hp::new(cascade.t);
                let margin = value - (<Hp as Real>::one() - t.clone() * t);
                (to_value(&inst), Some(margin.to_f64()))
            }
            Inner::DirectSum(d) => {
                let count = 1 + (seed % d.params.max_terms as u64) as usize;
                let eta = d.parameters.plane_eta;
                let space = match d.params.restrict {
                    Some(0) => &d.params.first,
                    Some(_) => &d.params.second,
                    None => d.oracle.space(),
                };
                let inst = random_ahsp_instance(space, count, eta, d.params.epsilon, seed)?;
                let margin = ahsp_doc_margin(&inst, eta)?;
                (to_value(&inst), Some(margin))
            }
            Inner::LatticeSum(l) => {
                let count = 1 + (seed % l.params.max_terms as u64) as usize;
                let eta = l.parameters.lattice_eta;
                let inst = random_ahsp_instance(l.oracle.space(), count, eta, l.params.epsilon, seed)?;
                let margin = ahsp_doc_margin(&inst, eta)?;
                (to_value(&inst), Some(margin))
            }
            Inner::Moduli(p) => (json!({ "grid": p.grid }), None),
            Inner::Duality(p) => {
                let functional = random_functional(&p.space, seed);
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
                let point: Vec<f64> = (0..p.space.dim()).map(|_| rng.sample(StandardNormal)).collect();
                (json!({ "functional": functional, "point": point }), None)
            }
        };
        Ok(InstanceDoc {
            kind: self.kind,
            params: self.raw.clone(),
            seed,
            instance,
            hypothesis_margin,
        })
    }

    pub fn solve(&self, doc: &InstanceDoc) -> Result<Solution> {
        self.check_doc(doc)?;
        match &self.inner {
            Inner::Align(p) => {
                let (witness, log) = if p.complex {
                    let inst: AlignInstance<C64> = from_doc("align instance", &doc.instance)?;
                    let (phi, log) = solve_align(&to_c(&inst.u), &to_c(&inst.v))?;
                    let w = AlignWitness {
                        matrix: phi.matrix.iter().map(|r| from_c(r)).collect(),
                        u_perp: from_c(&phi.u_perp),
                        v_perp: from_c(&phi.v_perp),
                        defect: phi.defect,
                    };
                    (to_value(&w), log)
                } else {
                    let inst: AlignInstance<f64> = from_doc("align instance", &doc.instance)?;
                    let (phi, log) = solve_align(&inst.u, &inst.v)?;
                    let w = AlignWitness {
                        matrix: phi.matrix,
                        u_perp: phi.u_perp,
                        v_perp: phi.v_perp,
                        defect: phi.defect,
                    };
                    (to_value(&w), log)
                };
                Ok(Solution {
                    witness,
                    certificates: log,
                    extra: Value::Null,
                })
            }
            Inner::L1Sum(_) => {
                let inst: L1SumInstance = from_doc("l1-sum instance", &doc.instance)?;
                let out = inst.correct()?;
                let extra = json!({ "selected": out.selected, "anchor": out.anchor });
                let certificates = out.certificates.clone();
                Ok(Solution {
                    witness: to_value(&out),
                    certificates,
                    extra,
                })
            }
            Inner::DirectSum(d) => {
                let inst: AhspInstance = from_doc("series instance", &doc.instance)?;
                match d.params.restrict {
                    None => {
                        let out = d.oracle.construct_with(&d.parameters, &inst.weights, &inst.vectors)?;
                        let extra = json!({ "case": out.case, "sets": out.sets });
                        Ok(Solution {
                            witness: to_value(&out.witness),
                            certificates: out.certificates,
                            extra,
                        })
                    }
                    Some(k) => {
                        let sum = d.oracle.space();
                        let embedded: Vec<Vec<Hp>> =
                            inst.vectors.iter().map(|x| sum.embed(k, x)).collect::<Result<_>>()?;
                        let out = d.oracle.construct_with(&d.parameters, &inst.weights, &embedded)?;
                        let mut log = out.certificates;
                        let r = restrict_witness(sum, k, &inst.weights, &inst.vectors, &out.witness)?;
                        log.extend(r.certificates);
                        let extra = json!({ "case": out.case, "sum_witness": out.witness });
                        Ok(Solution {
                            witness: to_value(&r.witness),
                            certificates: log,
                            extra,
                        })
                    }
                }
            }
            Inner::LatticeSum(l) => {
                let inst: AhspInstance = from_doc("series instance", &doc.instance)?;
                let out = l.oracle.construct_with(&l.parameters, &inst.weights, &inst.vectors)?;
                let extra = json!({ "lattice_set": out.lattice_set, "good_blocks": out.good_blocks });
                Ok(Solution {
                    witness: to_value(&out.witness),
                    certificates: out.certificates,
                    extra,
                })
            }
            Inner::Moduli(p) => {
                let curve = match p.modulus {
                    ModulusKind::Convexity => {
                        let space = p.space.as_ref().expect("validated");
                        convexity_curve(space, &space_label(space), &p.grid, p.method)?
                    }
                    ModulusKind::Monotonicity => {
                        let e = p.lattice.as_ref().expect("validated");
                        monotonicity_curve(e, &lattice_label(e), &p.grid, p.method)?
                    }
                };
                Ok(Solution {
                    witness: to_value(&curve),
                    certificates: CertificateLog::new(),
                    extra: Value::Null,
                })
            }
            Inner::Duality(p) => {
                let inst: DualityInstance = from_doc("duality instance", &doc.instance)?;
                let report = duality_isometry_check(&p.space, &inst.functional, doc.seed)?;
                let (element, log) = build_norming_element(&p.space, &inst.point, p.norming_epsilon)?;
                Ok(Solution {
                    witness: to_value(&DualityWitness { duality: report, norming: element }),
                    certificates: log,
                    extra: Value::Null,
                })
            }
        }
    }

    /// Recomputes the defining properties of `witness` from scratch.
    pub fn verify(&self, doc: &InstanceDoc, witness: &Value) -> Result<CertificateLog> {
        self.check_doc(doc)?;
        match &self.inner {
            Inner::Align(p) => {
                let rep = if p.complex {
                    let inst: AlignInstance<C64> = from_doc("align instance", &doc.instance)?;
                    let w: AlignWitness<C64> = from_doc("align witness", witness)?;
                    verify_isometry(&AligningIsometry {
                        matrix: w.matrix.iter().map(|r| to_c(r)).collect(),
                        u: to_c(&inst.u),
                        v: to_c(&inst.v),
                        u_perp: to_c(&w.u_perp),
                        v_perp: to_c(&w.v_perp),
                        defect: w.defect,
                    })
                } else {
                    let inst: AlignInstance<f64> = from_doc("align instance", &doc.instance)?;
                    let w: AlignWitness<f64> = from_doc("align witness", witness)?;
                    verify_isometry(&AligningIsometry {
                        matrix: w.matrix,
                        u: inst.u,
                        v: inst.v,
                        u_perp: w.u_perp,
                        v_perp: w.v_perp,
                        defect: w.defect,
                    })
                };
                Ok(isometry_log(&rep))
            }
            Inner::L1Sum(_) => {
                let inst: L1SumInstance = from_doc("l1-sum instance", &doc.instance)?;
                let out: L1SumCorrection<Hp> = from_doc("l1-sum correction", witness)?;
                let eta = out.cascade.t * out.cascade.t;
                verify_bpb_correction(&inst.domain, &inst.codomain, &inst.as_bpb(eta), &out.correction)
            }
            Inner::DirectSum(_) | Inner::LatticeSum(_) => {
                let inst: AhspInstance = from_doc("series instance", &doc.instance)?;
                let w: AhspWitness<Hp> = from_doc("series witness", witness)?;
                Ok(verify_ahsp_witness(&inst.space, &inst.weights, &inst.vectors, &w))
            }
            Inner::Moduli(p) => {
                let curve: ModulusCurve = from_doc("modulus curve", witness)?;
                let mut log = CertificateLog::new();
                log.check_bool("admissible", curve.is_admissible());
                log.check_bool("grid", curve.samples.iter().map(|s| s.0).eq(p.grid.iter().copied()));
                for &(eps, value) in &curve.samples {
                    let closed = match p.modulus {
                        ModulusKind::Convexity => convexity_modulus(p.space.as_ref().expect("validated"), eps, Method::ClosedForm),
                        ModulusKind::Monotonicity => {
                            monotonicity_modulus(p.lattice.as_ref().expect("validated"), eps, Method::ClosedForm)
                        }
                    };
                    if let Ok(closed) = closed {
                        log.check_approx("closed-form", &value, &closed, p.tolerance);
                    }
                }
                Ok(log)
            }
            Inner::Duality(p) => {
                let inst: DualityInstance = from_doc("duality instance", &doc.instance)?;
                let w: DualityWitness = from_doc("duality witness", witness)?;
                let mut log = CertificateLog::new();
                let closed = p.space.dual_norm(&inst.functional)?;
                log.check_approx("dual-norm", &w.duality.closed_form, &closed, 1e-12);
                log.check("duality-gap", &(closed - w.duality.attained).abs(), Relation::Le, &p.tolerance);
                let z_star = w.norming.assemble();
                let zn = p.space.norm(&inst.point)?;
                log.check("norming-dual-norm", &p.space.dual_norm(&z_star)?, Relation::Le, &(1.0 + 1e-12));
                log.check(
                    "norming-value",
                    &linalg::dot(&z_star, &inst.point),
                    Relation::Gt,
                    &(zn - p.norming_epsilon),
                );
                Ok(log)
            }
        }
    }

    fn check_doc(&self, doc: &InstanceDoc) -> Result<()> {
        if doc.kind != self.kind {
            return Err(Error::Config(format!(
                "instance of kind {} given to a {} pipeline",
                doc.kind.name(),
                self.kind.name()
            )));
        }
        Ok(())
    }

    /// Generate, construct and verify one trial.
    pub fn run_trial(&self, index: usize, seed: u64) -> TrialReport {
        let mut report = TrialReport {
            index,
            seed,
            passed: false,
            error: None,
            hypothesis_margin: None,
            construction: CertificateLog::new(),
            verification: CertificateLog::new(),
            extra: Value::Null,
        };
        let result = self.generate(seed).and_then(|doc| {
            report.hypothesis_margin = doc.hypothesis_margin;
            let sol = self.solve(&doc)?;
            let check = self.verify(&doc, &sol.witness)?;
            Ok((sol, check))
        });
        match result {
            Ok((sol, check)) => {
                report.construction = sol.certificates;
                report.verification = check;
                report.extra = sol.extra;
                report.passed = report.certificate_count() > 0
                    && report.construction.entries.iter().all(|c| c.holds)
                    && report.verification.all_hold();
            }
            Err(e) => report.error = Some(e.to_string()),
        }
        report
    }
}

#[derive(Serialize, Deserialize)]
struct DualityInstance {
    functional: Vec<f64>,
    point: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DualityWitness {
    duality: DualityReport,
    norming: NormingElement<f64>,
}

fn space_label(space: &NormedSpace) -> String {
    serde_json::to_string(space).expect("serializable")
}

fn lattice_label(e: &FiniteLattice) -> String {
    serde_json::to_string(e).expect("serializable")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub index: usize,
    pub seed: u64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_margin: Option<f64>,
    pub construction: CertificateLog,
    pub verification: CertificateLog,
    #[serde(default)]
    pub extra: Value,
}

impl TrialReport {
    pub fn certificate_count(&self) -> usize {
        self.construction.len() + self.verification.len()
    }

    pub fn certificates(&self) -> impl Iterator<Item = &crate::certificate::Certificate> {
        self.construction.entries.iter().chain(&self.verification.entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scenario: Scenario,
    /// Parameters derived once for the whole scenario.
    pub derived: Value,
    pub trials: Vec<TrialReport>,
    pub passed: usize,
    pub failed: usize,
    pub certificates_checked: usize,
    /// Smallest margin per certificate label over all trials.
    pub min_margins: BTreeMap<String, f64>,
    pub all_pass: bool,
}

pub fn run_scenario(s: &Scenario) -> Result<Report> {
    if s.trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let pipeline = Pipeline::new(s.kind, &s.params)?;
    let trials: Vec<TrialReport> = (0..s.trials)
        .into_par_iter()
        .map(|i| pipeline.run_trial(i, trial_seed(s.seed, i as u64)))
        .collect();
    let passed = trials.iter().filter(|t| t.passed).count();
    let certificates_checked = trials.iter().map(TrialReport::certificate_count).sum();
    let mut min_margins = BTreeMap::new();
    for c in trials.iter().flat_map(TrialReport::certificates) {
        min_margins
            .entry(c.label.clone())
            .and_modify(|m: &mut f64| *m = m.min(c.margin))
            .or_insert(c.margin);
    }
    Ok(Report {
        scenario: s.clone(),
        derived: pipeline.derived(),
        failed: trials.len() - passed,
        passed,
        certificates_checked,
        min_margins,
        all_pass: passed == trials.len() && certificates_checked > 0,
        trials,
    })
}

pub fn generate_instance(kind: ScenarioKind, params: &Value, seed: u64) -> Result<InstanceDoc> {
    Pipeline::new(kind, params)?.generate(seed)
}

/// Construction for a generated instance, rebuilt from the parameters it
/// carries.
pub fn solve_instance(doc: &InstanceDoc) -> Result<Solution> {
    Pipeline::new(doc.kind, &doc.params)?.solve(doc)
}

pub fn verify_instance(doc: &InstanceDoc, witness: &Value) -> Result<CertificateLog> {
    Pipeline::new(doc.kind, &doc.params)?.verify(doc, witness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(kind: ScenarioKind, params: Value, seed: u64, trials: usize) -> Scenario {
        Scenario {
            kind,
            params,
            seed,
            trials,
        }
    }

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..64).map(|i| trial_seed(7, i)).collect();
        let b: Vec<u64> = (0..64).map(|i| trial_seed(7, i)).collect();
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 64);
        assert_ne!(trial_seed(7, 0), trial_seed(8, 0));
    }

    #[test]
    fn align_dim_three() {
        let r = run_scenario(&scenario(ScenarioKind::Align, json!({"dim": 3}), 7, 100)).unwrap();
        assert_eq!(r.passed, 100);
        assert!(r.all_pass);
    }

    #[test]
    fn complex_align_verifies() {
        let r = run_scenario(&scenario(ScenarioKind::Align, json!({"dim": 4, "complex": true}), 1, 20)).unwrap();
        assert!(r.all_pass, "{:?}", r.trials.iter().find(|t| !t.passed));
    }

    #[test]
    fn l1sum_two_planes() {
        let params = json!({"dims": [2, 2], "h_dim": 2, "epsilon": 0.2});
        let r = run_scenario(&scenario(ScenarioKind::CorrectL1sum, params, 3, 50)).unwrap();
        assert_eq!(r.passed, 50, "{:?}", r.trials.iter().find(|t| !t.passed));
        assert!(r.min_margins["operator-distance"] > 0.0);
        assert!(r.trials.iter().all(|t| t.hypothesis_margin.unwrap() > 0.0), "{:?}", r.trials.iter().map(|t| t.hypothesis_margin).collect::<Vec<_>>());
    }

    #[test]
    fn euclidean_convexity_curve() {
        let params = json!({
            "modulus": "convexity",
            "space": {"kind": "euclidean", "dim": 2},
            "grid": [0.1, 0.5, 1.0, 1.5, 2.0],
        });
        let r = run_scenario(&scenario(ScenarioKind::ModuliCurve, params, 0, 1)).unwrap();
        assert!(r.all_pass, "{:?}", r.trials[0]);
        assert_eq!(r.trials[0].verification.get("closed-form").count(), 5);
    }

    #[test]
    fn sup_lattice_monotonicity_fails_loudly() {
        let params = json!({
            "modulus": "monotonicity",
            "lattice": {"kind": "lp", "p": "inf", "dim": 2},
            "grid": [0.5],
        });
        let r = run_scenario(&scenario(ScenarioKind::ModuliCurve, params, 0, 1)).unwrap();
        assert!(!r.all_pass);
        assert!(r.trials[0].error.as_ref().unwrap().contains("not uniformly monotone"));
    }

    #[test]
    fn direct_sum_and_restriction_scenarios() {
        let base = json!({
            "first": {"kind": "euclidean", "dim": 2},
            "second": {"kind": "euclidean", "dim": 2},
            "generator": {"kind": "lp", "p": 2.0},
            "epsilon": 0.5,
        });
        let r = run_scenario(&scenario(ScenarioKind::AhspDirectSum, base.clone(), 11, 8)).unwrap();
        assert!(r.all_pass, "{:?}", r.trials.iter().find(|t| !t.passed));
        let mut restricted = base;
        restricted["restrict"] = json!(1);
        let r = run_scenario(&scenario(ScenarioKind::AhspDirectSum, restricted, 11, 8)).unwrap();
        assert!(r.all_pass, "{:?}", r.trials.iter().find(|t| !t.passed));
        for t in &r.trials {
            assert_eq!(t.verification.get("distance").count(), 1);
        }
    }

    #[test]
    fn lattice_sum_scenario() {
        let params = json!({
            "lattice": {"kind": "lp", "p": 2.0, "dim": 3},
            "components": [
                {"kind": "euclidean", "dim": 2},
                {"kind": "euclidean", "dim": 2},
                {"kind": "euclidean", "dim": 2},
            ],
            "epsilon": 0.4,
        });
        let r = run_scenario(&scenario(ScenarioKind::AhspLatticeSum, params, 5, 6)).unwrap();
        assert!(r.all_pass, "{:?}", r.trials.iter().find(|t| !t.passed));
    }

    #[test]
    fn duality_scenario() {
        let params = json!({
            "space": {
                "kind": "direct_sum",
                "dim": 5,
                "params": {
                    "components": [{"kind": "euclidean", "dim": 2}, {"kind": "lp", "dim": 3, "params": {"p": 3.0}}],
                    "combining": {"kind": "lp", "p": 2.0, "dim": 2},
                },
            },
        });
        let r = run_scenario(&scenario(ScenarioKind::DualityCheck, params, 9, 10)).unwrap();
        assert!(r.all_pass, "{:?}", r.trials.iter().find(|t| !t.passed));
    }

    #[test]
    fn schema_violations_are_config_errors() {
        let bad = [
            scenario(ScenarioKind::Align, json!({"dim": 3, "colour": 1}), 0, 1),
            scenario(ScenarioKind::Align, json!({"dim": 3}), 0, 0),
            scenario(ScenarioKind::CorrectL1sum, json!({"dims": [], "h_dim": 2, "epsilon": 0.2}), 0, 1),
            scenario(ScenarioKind::ModuliCurve, json!({"modulus": "convexity", "grid": [0.5]}), 0, 1),
        ];
        for s in &bad {
            assert!(matches!(run_scenario(s), Err(Error::Config(_))), "{s:?}");
        }
        let zero = generate_instance(ScenarioKind::CorrectL1sum, &json!({"dims": [], "h_dim": 2, "epsilon": 0.2}), 0);
        assert!(matches!(zero, Err(Error::Config(_))));
    }

    #[test]
    fn l1sum_random_shapes() {
        let params = json!({"epsilon": 0.5});
        let r = run_scenario(&scenario(ScenarioKind::CorrectL1sum, params.clone(), 8, 20)).unwrap();
        assert!(r.all_pass, "{:?}", r.trials.iter().find(|t| !t.passed));
        let p: L1SumParams = serde_json::from_value(params).unwrap();
        let shapes: Vec<_> = (0..20).map(|i| p.shape(trial_seed(8, i))).collect();
        assert!(shapes.iter().all(|(d, h)| (1..=5).contains(&d.len()) && d.iter().all(|&k| (1..=4).contains(&k)) && (1..=4).contains(h)));
        assert!(shapes.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn reports_replay_byte_for_byte() {
        let s = scenario(ScenarioKind::CorrectL1sum, json!({"dims": [2, 3], "h_dim": 3, "epsilon": 0.5}), 42, 6);
        let a = serde_json::to_string(&run_scenario(&s).unwrap()).unwrap();
        let b = serde_json::to_string(&run_scenario(&s).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn instance_round_trip_through_json() {
        let params = json!({
            "first": {"kind": "euclidean", "dim": 2},
            "second": {"kind": "euclidean", "dim": 2},
            "generator": {"kind": "lp", "p": 1.0},
            "epsilon": 0.5,
        });
        let doc = generate_instance(ScenarioKind::AhspDirectSum, &params, 3).unwrap();
        assert!(doc.hypothesis_margin.unwrap() > 0.0);
        let text = serde_json::to_string(&doc).unwrap();
        let back: InstanceDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        let sol = solve_instance(&back).unwrap();
        assert!(verify_instance(&back, &sol.witness).unwrap().all_hold());
    }
}
