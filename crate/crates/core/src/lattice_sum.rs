//! Sums of normed spaces over a finite lattice: norming functionals, the
//! duality check, and hyperplane-series witnesses assembled from a lattice
//! witness and pointwise face oracles of the components.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ahsp::{
    check_series, input_slack, require_deficit, run_oracle, series_deficit, verify_ahsp_witness, AhpOracle,
    AhspOracle, AhspWitness, TOL_ATTAIN,
};
use crate::bpb::filter_large_real_part;
use crate::certificate::{CertificateLog, Relation};
use crate::error::{check_dim, Error, Result};
use crate::lattice::FiniteLattice;
use crate::linalg;
use crate::moduli::{monotonicity_modulus, Method};
use crate::real::{lit, Real};
use crate::spaces::NormedSpace;

/// Tolerance for the value of the assembled functional on the witness vectors.
pub const TOL_VALUE: f64 = 1e-8;

fn parts(z: &NormedSpace) -> Result<(&[NormedSpace], &FiniteLattice)> {
    z.components()
        .ok_or_else(|| Error::Config("expected a lattice sum of components".into()))
}

/// Functional `(e*_k lambda_k x*_k)` on a lattice sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormingElement<R> {
    /// Nonnegative, norm one in the Köthe dual.
    pub e_star: Vec<R>,
    /// Signs aligning each component functional with its block.
    pub lambdas: Vec<R>,
    /// Norm-one functionals on the components.
    pub component_functionals: Vec<Vec<R>>,
}

impl<R: Real> NormingElement<R> {
    pub fn assemble(&self) -> Vec<R> {
        self.e_star
            .iter()
            .zip(&self.lambdas)
            .zip(&self.component_functionals)
            .flat_map(|((e, l), g)| g.iter().map(move |v| e.clone() * l.clone() * v.clone()))
            .collect()
    }
}

/// Norming element of `z` whose component functionals come from
/// `component_norming`, checked against the slack `eps / ((e*_k + 1) 2^k)`
/// on block `k` (counting from 1).
///
/// `component_norming(k, block)` must return a norm-one functional on
/// component `k`. Returns the element with the per-block certificates and
/// the final `z*(z) > ||z|| - eps`.
pub fn build_norming_element_with<R: Real>(
    space: &NormedSpace,
    z: &[R],
    epsilon: f64,
    component_norming: impl Fn(usize, &[R]) -> Result<Vec<R>>,
) -> Result<(NormingElement<R>, CertificateLog)> {
    let (components, lattice) = parts(space)?;
    check_dim(space.dim(), z.len())?;
    let total = space.norm(z)?;
    // The zero vector is normed by any norm-one element.
    let shape = if total.is_zero() { space.canonical_unit() } else { z.to_vec() };
    let norms = space.component_norms(z);
    let e_star: Vec<R> = lattice.norming(&space.component_norms(&shape))?.iter().map(Real::abs).collect();
    let mut log = CertificateLog::new();
    let mut lambdas = Vec::with_capacity(components.len());
    let mut functionals = Vec::with_capacity(components.len());
    for (k, (c, range)) in components.iter().zip(space.ranges()).enumerate() {
        let block = &z[range.clone()];
        let g = component_norming(k, &shape[range])?;
        log.check_approx("component-functional-norm", &c.dual_norm(&g)?, &R::one(), TOL_ATTAIN);
        let value = linalg::dot(&g, block);
        let lambda = value.signum_or_one();
        let slack = lit::<R>(epsilon) / ((e_star[k].clone() + R::one()) * lit(2f64.powi(k as i32 + 1)));
        log.check(
            "component-norming",
            &(lambda.clone() * value),
            Relation::Gt,
            &(norms[k].clone() - slack),
        );
        lambdas.push(lambda);
        functionals.push(g);
    }
    let element = NormingElement {
        e_star,
        lambdas,
        component_functionals: functionals,
    };
    let assembled = element.assemble();
    log.check_approx("norming-dual-norm", &space.dual_norm(&assembled)?, &R::one(), TOL_ATTAIN);
    log.check(
        "norming-value",
        &linalg::dot(&assembled, z),
        Relation::Gt,
        &(total - lit(epsilon)),
    );
    Ok((element, log))
}

/// [`build_norming_element_with`] using exact norming functionals of the
/// components (the canonical unit's for vanishing blocks).
pub fn build_norming_element<R: Real>(
    space: &NormedSpace,
    z: &[R],
    epsilon: f64,
) -> Result<(NormingElement<R>, CertificateLog)> {
    let (components, _) = parts(space)?;
    build_norming_element_with(space, z, epsilon, |k, block| {
        let c = &components[k];
        if c.norm_unchecked(block).is_zero() {
            c.norming(&c.canonical_unit::<R>())
        } else {
            c.norming(block)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    /// Köthe-dual norm of the component dual norms.
    pub closed_form: f64,
    /// `phi(x) / ||x||` at the best vector found by ascent.
    pub attained: f64,
    pub gap: f64,
}

/// Compares the dual norm of `x_star` computed through the Köthe dual with
/// the value the functional attains on an explicit vector of the sum found
/// by coordinate ascent over the positive part of the lattice sphere.
pub fn duality_isometry_check(space: &NormedSpace, x_star: &[f64], seed: u64) -> Result<DualityReport> {
    let (components, lattice) = parts(space)?;
    check_dim(space.dim(), x_star.len())?;
    let ranges = space.ranges();
    let duals: Vec<f64> = components
        .iter()
        .zip(&ranges)
        .map(|(c, r)| c.dual_norm(&x_star[r.clone()]))
        .collect::<Result<_>>()?;
    let closed_form = space.dual_norm(x_star)?;
    let m = lattice.dim();
    let profile_value = |v: &[f64]| {
        let n = lattice.norm(v);
        if n <= 0.0 {
            return 0.0;
        }
        v.iter().zip(&duals).map(|(a, d)| a.abs() * d).sum::<f64>() / n
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_v = vec![1.0; m];
    let mut best = profile_value(&best_v);
    for restart in 0..8 {
        let mut v: Vec<f64> = if restart == 0 {
            duals.clone()
        } else {
            (0..m).map(|_| rng.random_range(0.0..1.0)).collect()
        };
        let mut value = profile_value(&v);
        let mut step = 0.5;
        while step > 1e-12 {
            let mut improved = false;
            for k in 0..m {
                for dir in [1.0, -1.0] {
                    let mut w = v.clone();
                    w[k] = (w[k] + dir * step).max(0.0);
                    let val = profile_value(&w);
                    if val > value {
                        v = w;
                        value = val;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        if value > best {
            best = value;
            best_v = v;
        }
    }
    // Realize the profile with vectors where each component functional
    // attains its norm, and evaluate the functional there.
    let mut x = vec![0.0; space.dim()];
    for (k, (c, r)) in components.iter().zip(&ranges).enumerate() {
        let g = &x_star[r.clone()];
        let dir = if duals[k] > 0.0 {
            let unit_g: Vec<f64> = g.iter().map(|v| v / duals[k]).collect();
            c.face_point(&unit_g, &unit_g)?
        } else {
            c.canonical_unit()
        };
        for (i, d) in r.clone().zip(dir) {
            x[i] = best_v[k] * d;
        }
    }
    let xn = space.norm(&x)?;
    let attained = if xn > 0.0 { linalg::dot(x_star, &x) / xn } else { 0.0 };
    Ok(DualityReport {
        closed_form,
        attained,
        gap: (closed_form - attained).abs(),
    })
}

/// Slack parameters of the lattice-sum construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParameters {
    pub epsilon: f64,
    /// Shared face-oracle modulus at `eps / 4`.
    pub face_delta: f64,
    /// Relative defect below which a block counts as good.
    pub defect_ratio: f64,
    /// Monotonicity gap of the lattice at `eps / 4`, shrunk.
    pub monotone_gap: f64,
    /// `1 - r` for the selection threshold `r`.
    pub threshold_gap: f64,
    pub lattice_epsilon: f64,
    /// Slack the input series must satisfy.
    pub lattice_eta: f64,
}

impl LatticeParameters {
    pub fn new<R: Real>(
        lattice: &FiniteLattice,
        lattice_oracle: &dyn AhspOracle<R>,
        faces: &[&dyn AhpOracle<R>],
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Range(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if faces.is_empty() {
            return Err(Error::Config("lattice sum needs at least one component".into()));
        }
        let quarter = epsilon / 4.0;
        let face_delta = faces
            .iter()
            .map(|o| o.delta(quarter))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let defect_ratio = 0.9 * quarter.min(face_delta);
        let monotone_gap = 0.9 * monotonicity_modulus(lattice, quarter, Method::ClosedForm)?.min(quarter);
        let threshold_gap = monotone_gap * defect_ratio / (1.0 + 2.0 * defect_ratio);
        let lattice_epsilon = 0.9 * threshold_gap * epsilon / 3.0;
        let lattice_eta = lattice_oracle.eta(lattice_epsilon)?.min(0.9 * lattice_epsilon);
        Ok(Self {
            epsilon,
            face_delta,
            defect_ratio,
            monotone_gap,
            threshold_gap,
            lattice_epsilon,
            lattice_eta,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSumWitness<R> {
    pub witness: AhspWitness<R>,
    pub parameters: LatticeParameters,
    /// Indices where the lattice witness applies.
    pub lattice_set: Vec<usize>,
    /// Good blocks of each selected index, in the order of `witness.indices`.
    pub good_blocks: Vec<Vec<usize>>,
    pub certificates: CertificateLog,
}

/// Witness for a series of unit vectors in a lattice sum, built from a
/// witness of the norm profiles in the lattice and face oracles of the
/// components sharing one modulus.
///
/// A failure of the lattice oracle is reported as an oracle violation of
/// component `m`, one past the last component.
pub fn lattice_sum_witness<R: Real>(
    space: &NormedSpace,
    weights: &[R],
    xs: &[Vec<R>],
    epsilon: f64,
    lattice_oracle: &dyn AhspOracle<R>,
    faces: &[&dyn AhpOracle<R>],
) -> Result<LatticeSumWitness<R>> {
    let (_, lattice) = parts(space)?;
    let params = LatticeParameters::new(lattice, lattice_oracle, faces, epsilon)?;
    lattice_sum_witness_with(&params, space, weights, xs, lattice_oracle, faces)
}

/// [`lattice_sum_witness`] with precomputed parameters.
pub fn lattice_sum_witness_with<R: Real>(
    params: &LatticeParameters,
    space: &NormedSpace,
    weights: &[R],
    xs: &[Vec<R>],
    lattice_oracle: &dyn AhspOracle<R>,
    faces: &[&dyn AhpOracle<R>],
) -> Result<LatticeSumWitness<R>> {
    let (components, lattice) = parts(space)?;
    let m = components.len();
    check_dim(m, faces.len())?;
    check_dim(m, lattice_oracle.space().dim())?;
    for (c, o) in components.iter().zip(faces) {
        if c != o.space() {
            return Err(Error::Config("face oracle does not match its component".into()));
        }
    }
    check_series(space, weights, xs, true, input_slack(params.lattice_epsilon))?;
    require_deficit(&series_deficit(space, weights, xs)?, params.lattice_eta)?;
    let ranges = space.ranges();
    let eps: R = lit(params.epsilon);
    let quarter: R = eps.clone() / lit(4.0);
    let eps1: R = lit(params.lattice_epsilon);
    let eta1: R = lit(params.lattice_eta);
    let ratio: R = lit(params.defect_ratio);
    let gap: R = lit(params.threshold_gap);
    let r = R::one() - gap.clone();
    let mut log = CertificateLog::new();

    // Lattice witness on the norm profiles, made nonnegative.
    let profiles: Vec<Vec<R>> = xs.iter().map(|x| space.component_norms(x)).collect();
    let lw = run_oracle(lattice_oracle, m, weights, &profiles, params.lattice_epsilon)?;
    let a_set = lw.indices.clone();
    let rstar: Vec<R> = lw.functional.iter().map(Real::abs).collect();
    let mut prof = vec![Vec::new(); xs.len()];
    for (&n, z) in a_set.iter().zip(&lw.z) {
        prof[n] = z.iter().map(Real::abs).collect::<Vec<R>>();
    }
    let mass_a = a_set.iter().fold(R::zero(), |a, &n| a + weights[n].clone());
    log.check("lattice-mass", &mass_a, Relation::Gt, &(R::one() - eps1.clone()));
    let prof_gap = a_set
        .iter()
        .map(|&n| lattice.norm(&linalg::sub(&prof[n], &profiles[n])))
        .fold(R::zero(), R::max_of);
    log.check("lattice-distance", &prof_gap, Relation::Lt, &eps1);
    let prof_value = a_set
        .iter()
        .map(|&n| (linalg::dot(&rstar, &prof[n]) - R::one()).abs())
        .fold(R::zero(), R::max_of);
    log.check("lattice-attained", &prof_value, Relation::Le, &lit(TOL_ATTAIN));
    log.check_approx("lattice-functional-norm", &lattice.kothe_dual_norm(&rstar), &R::one(), TOL_ATTAIN);

    // Lift the profiles along the directions of the blocks.
    let fallback: Vec<Vec<R>> = components.iter().map(|c| c.canonical_unit()).collect();
    let mut lifted = vec![Vec::new(); xs.len()];
    for &n in &a_set {
        let mut u = Vec::with_capacity(space.dim());
        for (k, (c, range)) in components.iter().zip(&ranges).enumerate() {
            let block = &xs[n][range.clone()];
            let nb = c.norm_unchecked(block);
            let dir = if nb.is_zero() {
                fallback[k].clone()
            } else {
                linalg::scale(block, &(R::one() / nb))
            };
            u.extend(linalg::scale(&dir, &prof[n][k]));
        }
        lifted[n] = u;
    }
    let lift_gap = a_set
        .iter()
        .map(|&n| space.norm_unchecked(&linalg::sub(&lifted[n], &xs[n])))
        .fold(R::zero(), R::max_of);
    log.check("lift-distance", &lift_gap, Relation::Lt, &eps1);
    let a_weights: Vec<R> = a_set.iter().map(|&n| weights[n].clone()).collect();
    let a_vectors: Vec<Vec<R>> = a_set.iter().map(|&n| lifted[n].clone()).collect();
    let lifted_sum = linalg::weighted_sum(&a_weights, &a_vectors);
    let bound = R::one() - eta1.clone() - lit::<R>(2.0) * eps1.clone();

    // Norming element of the lifted sum and the selected set.
    let (element, norming_log) = build_norming_element(space, &lifted_sum, params.lattice_epsilon)?;
    log.extend(norming_log);
    let zstar = element.assemble();
    log.check("lift-value", &linalg::dot(&zstar, &lifted_sum), Relation::Gt, &bound);
    let values: Vec<R> = a_vectors.iter().map(|u| linalg::dot(&zstar, u)).collect();
    let filtered = filter_large_real_part(
        &a_weights,
        &values,
        &(eta1.clone() + lit::<R>(2.0) * eps1.clone()),
        &r,
    )?;
    let c_set: Vec<usize> = filtered.indices.iter().map(|&j| a_set[j]).collect();
    let selected_bound = R::one() - (eta1.clone() + lit::<R>(2.0) * eps1.clone()) / gap.clone();
    log.check("selected-mass", &filtered.mass, Relation::Gt, &selected_bound);
    log.check("selected-mass-chain", &selected_bound, Relation::Gt, &(R::one() - eps.clone()));

    // Defects and good blocks.
    let zk: Vec<Vec<R>> = ranges.iter().map(|rg| zstar[rg.clone()].to_vec()).collect();
    let zk_norm: Vec<R> = components
        .iter()
        .zip(&zk)
        .map(|(c, g)| c.dual_norm(g))
        .collect::<Result<_>>()?;
    let mut good = Vec::with_capacity(c_set.len());
    let chi = |v: &[R], set: &[usize], keep: bool| -> Vec<R> {
        v.iter()
            .enumerate()
            .map(|(k, x)| if set.contains(&k) == keep { x.clone() } else { R::zero() })
            .collect()
    };
    for &n in &c_set {
        let mut defect_total = R::zero();
        let mut good_weight = R::zero();
        let mut bad_weight = R::zero();
        let mut b_n = Vec::new();
        for k in 0..m {
            let block = &lifted[n][ranges[k].clone()];
            let size = zk_norm[k].clone() * components[k].norm_unchecked(block);
            let d = size.clone() - linalg::dot(&zk[k], block);
            defect_total += d.clone();
            if d < ratio.clone() * size.clone() {
                b_n.push(k);
                good_weight += size;
            } else {
                bad_weight += size;
            }
        }
        log.check("defect-total", &defect_total, Relation::Le, &gap);
        log.check(
            "good-block-weight",
            &good_weight,
            Relation::Gt,
            &(r.clone() - gap.clone() / ratio.clone()),
        );
        log.check(
            "bad-block-weight",
            &bad_weight,
            Relation::Lt,
            &(gap.clone() + gap.clone() / ratio.clone()),
        );
        log.check(
            "good-block-profile",
            &lattice.norm(&chi(&prof[n], &b_n, true)),
            Relation::Gt,
            &(R::one() - lit(params.monotone_gap)),
        );
        log.check(
            "bad-block-profile",
            &lattice.norm(&chi(&prof[n], &b_n, false)),
            Relation::Le,
            &quarter,
        );
        good.push(b_n);
    }

    // Face points of the good blocks under common functionals.
    let covered: Vec<bool> = (0..m).map(|k| good.iter().any(|b| b.contains(&k))).collect();
    let mut ystar: Vec<Vec<R>> = Vec::with_capacity(m);
    let mut unit_star: Vec<Option<Vec<R>>> = Vec::with_capacity(m);
    for k in 0..m {
        if covered[k] {
            let g = linalg::scale(&zk[k], &(R::one() / zk_norm[k].clone()));
            ystar.push(faces[k].upsilon(&g, params.epsilon / 4.0)?);
            unit_star.push(Some(g));
        } else {
            ystar.push(components[k].norming(&fallback[k])?);
            unit_star.push(None);
        }
    }
    let mut faces_at: Vec<Vec<Option<Vec<R>>>> = vec![vec![None; m]; c_set.len()];
    let mut worst_hyp = R::one();
    let mut worst_face = R::zero();
    let mut worst_attain = R::zero();
    for (j, &n) in c_set.iter().enumerate() {
        for &k in &good[j] {
            let block = &lifted[n][ranges[k].clone()];
            let dir = linalg::scale(block, &(R::one() / prof[n][k].clone()));
            let g = unit_star[k].as_ref().expect("covered block");
            worst_hyp = worst_hyp.min_of(linalg::dot(g, &dir));
            let point = faces[k]
                .face_point(g, &dir, params.epsilon / 4.0)
                .map_err(|e| Error::OracleViolation {
                    component: k,
                    detail: e.to_string(),
                })?;
            let dist = components[k].norm_unchecked(&linalg::sub(&point, &dir));
            let attain = (linalg::dot(&ystar[k], &point) - R::one()).abs();
            let unit = (components[k].norm_unchecked(&point) - R::one()).abs();
            if !(dist < quarter && attain <= lit(TOL_ATTAIN) && unit <= lit(crate::TOL_SPHERE)) {
                return Err(Error::OracleViolation {
                    component: k,
                    detail: format!("face point at distance {:e}", dist.to_f64()),
                });
            }
            worst_face = worst_face.max_of(dist);
            worst_attain = worst_attain.max_of(attain);
            faces_at[j][k] = Some(point);
        }
    }
    if !c_set.is_empty() && good.iter().any(|b| !b.is_empty()) {
        log.check("face-hypothesis", &worst_hyp, Relation::Gt, &(R::one() - ratio.clone()));
        log.check("face-distance", &worst_face, Relation::Lt, &quarter);
        log.check("face-attained", &worst_attain, Relation::Le, &lit(TOL_ATTAIN));
    }

    // Assemble the witness vectors; blocks good for another index borrow the
    // face point of the first such index.
    let first_owner: Vec<Option<usize>> = (0..m).map(|k| good.iter().position(|b| b.contains(&k))).collect();
    let mut zs = Vec::with_capacity(c_set.len());
    let mut worst_block = R::zero();
    let mut worst_lift = R::zero();
    let mut worst_dist = R::zero();
    let mut worst_value = R::zero();
    let vstar: Vec<R> = ystar
        .iter()
        .enumerate()
        .flat_map(|(k, y)| linalg::scale(y, &rstar[k]))
        .collect();
    for (j, &n) in c_set.iter().enumerate() {
        let mut v = Vec::with_capacity(space.dim());
        for k in 0..m {
            let dir = match (&faces_at[j][k], first_owner[k]) {
                (Some(p), _) => p.clone(),
                (None, Some(owner)) => faces_at[owner][k].clone().expect("owner has a face point"),
                (None, None) => fallback[k].clone(),
            };
            let block = linalg::scale(&dir, &prof[n][k]);
            if faces_at[j][k].is_some() {
                let d = components[k].norm_unchecked(&linalg::sub(&block, &lifted[n][ranges[k].clone()]));
                worst_block = worst_block.max_of(d - quarter.clone() * prof[n][k].clone());
            }
            v.extend(block);
        }
        worst_lift = worst_lift.max_of(space.norm_unchecked(&linalg::sub(&v, &lifted[n])));
        worst_dist = worst_dist.max_of(space.norm_unchecked(&linalg::sub(&v, &xs[n])));
        worst_value = worst_value.max_of((linalg::dot(&vstar, &v) - R::one()).abs());
        zs.push(v);
    }
    log.check("block-distance", &worst_block, Relation::Le, &R::zero());
    log.check("lift-correction", &worst_lift, Relation::Le, &(lit::<R>(3.0) * quarter.clone()));
    log.check("witness-distance", &worst_dist, Relation::Lt, &eps);
    log.check("functional-value", &worst_value, Relation::Le, &lit(TOL_VALUE));

    let witness = AhspWitness {
        indices: c_set,
        z: zs,
        functional: vstar,
        epsilon: params.epsilon,
    };
    log.extend(verify_ahsp_witness(space, weights, xs, &witness));
    if !log.all_hold() {
        let failed: Vec<String> = log.failures().map(|c| c.label.clone()).collect();
        return Err(Error::InternalInvariant(format!(
            "lattice-sum witness certificates failed: {}",
            failed.join(", ")
        )));
    }
    Ok(LatticeSumWitness {
        witness,
        parameters: *params,
        lattice_set: a_set,
        good_blocks: good,
        certificates: log,
    })
}

/// [`AhspOracle`] for a lattice sum.
pub struct LatticeSumOracle<R: Real> {
    space: NormedSpace,
    lattice: Box<dyn AhspOracle<R>>,
    faces: Vec<Box<dyn AhpOracle<R>>>,
}

impl<R: Real> LatticeSumOracle<R> {
    pub fn new(lattice: Box<dyn AhspOracle<R>>, faces: Vec<Box<dyn AhpOracle<R>>>) -> Result<Self> {
        let e = match lattice.space().kind() {
            crate::spaces::NormKind::Lattice(e) => e.clone(),
            _ => return Err(Error::Config("lattice oracle must act on a lattice space".into())),
        };
        let components = faces.iter().map(|f| f.space().clone()).collect();
        let space = NormedSpace::direct_sum(components, e)?;
        Ok(Self { space, lattice, faces })
    }

    fn face_refs(&self) -> Vec<&dyn AhpOracle<R>> {
        self.faces.iter().map(|f| f.as_ref()).collect()
    }

    pub fn parameters(&self, epsilon: f64) -> Result<LatticeParameters> {
        let (_, e) = parts(&self.space)?;
        LatticeParameters::new(e, self.lattice.as_ref(), &self.face_refs(), epsilon)
    }

    pub fn construct(&self, weights: &[R], xs: &[Vec<R>], epsilon: f64) -> Result<LatticeSumWitness<R>> {
        lattice_sum_witness(&self.space, weights, xs, epsilon, self.lattice.as_ref(), &self.face_refs())
    }

    pub fn construct_with(&self, params: &LatticeParameters, weights: &[R], xs: &[Vec<R>]) -> Result<LatticeSumWitness<R>> {
        lattice_sum_witness_with(params, &self.space, weights, xs, self.lattice.as_ref(), &self.face_refs())
    }
}

impl<R: Real> AhspOracle<R> for LatticeSumOracle<R> {
    fn space(&self) -> &NormedSpace {
        &self.space
    }

    fn eta(&self, epsilon: f64) -> Result<f64> {
        Ok(self.parameters(epsilon)?.lattice_eta)
    }

    fn witness(&self, weights: &[R], xs: &[Vec<R>], epsilon: f64) -> Result<AhspWitness<R>> {
        Ok(self.construct(weights, xs, epsilon)?.witness)
    }
}

/// Random functional on a sum, one standard normal per coordinate.
pub fn random_functional(space: &NormedSpace, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..space.dim()).map(|_| rng.sample(StandardNormal)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ahsp::{ahp_oracle_uniformly_convex, random_ahsp_instance, witness_through_sum, FiniteDimOracle};
    use crate::real::Hp;

    fn planes(p: f64, m: usize) -> NormedSpace {
        let comps = (0..m).map(|_| NormedSpace::euclidean(2).unwrap()).collect();
        NormedSpace::direct_sum(comps, FiniteLattice::lp(p, m).unwrap()).unwrap()
    }

    fn oracle(p: f64, m: usize) -> LatticeSumOracle<Hp> {
        let lattice = FiniteLattice::lp(p, m).unwrap();
        let faces: Vec<Box<dyn AhpOracle<Hp>>> = (0..m)
            .map(|_| Box::new(ahp_oracle_uniformly_convex(NormedSpace::euclidean(2).unwrap()).unwrap()) as _)
            .collect();
        LatticeSumOracle::new(
            Box::new(FiniteDimOracle::new(NormedSpace::lattice(lattice)).unwrap()),
            faces,
        )
        .unwrap()
    }

    #[test]
    fn norming_zero_vector() {
        let z = planes(2.0, 3);
        let (e, log) = build_norming_element(&z, &[0.0; 6], 0.01).unwrap();
        assert!(log.all_hold());
        assert!((z.dual_norm(&e.assemble()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norming_single_component() {
        let z = NormedSpace::direct_sum(vec![NormedSpace::euclidean(2).unwrap()], FiniteLattice::lp(2.0, 1).unwrap())
            .unwrap();
        let (e, log) = build_norming_element(&z, &[0.6, 0.8], 0.1).unwrap();
        assert!(log.all_hold());
        assert!((linalg::dot(&e.assemble(), &[0.6, 0.8]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norming_l1_of_planes() {
        let z = planes(1.0, 2);
        let x = vec![0.5, 0.0, 0.0, 0.5];
        let (e, log) = build_norming_element(&z, &x, 1e-3).unwrap();
        assert!(log.all_hold());
        assert_eq!(e.e_star, vec![1.0, 1.0]);
        assert_eq!(e.assemble(), vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(linalg::dot(&e.assemble(), &x), z.norm(&x).unwrap());
    }

    #[test]
    fn norming_is_one_norming_on_random_vectors() {
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let z = planes(p, 3);
            for seed in 0..300 {
                let x = random_functional(&z, seed);
                let (_, log) = build_norming_element(&z, &x, 1e-3).unwrap();
                assert!(log.all_hold(), "p {p} seed {seed}");
            }
        }
    }

    #[test]
    fn duality_examples() {
        let lines = NormedSpace::l1_sum(vec![NormedSpace::euclidean(1).unwrap(); 3]).unwrap();
        let r = duality_isometry_check(&lines, &[0.0, 1.0, 0.0], 0).unwrap();
        assert!((r.closed_form - 1.0).abs() < 1e-12 && (r.attained - 1.0).abs() < 1e-12);
        for seed in 0..20 {
            let z = planes(2.0, 3);
            let r = duality_isometry_check(&z, &random_functional(&z, seed), seed).unwrap();
            assert!(r.gap <= 1e-6, "{r:?}");
            let z = planes(3.0, 4);
            let r = duality_isometry_check(&z, &random_functional(&z, seed), seed).unwrap();
            assert!(r.gap <= 1e-4, "{r:?}");
        }
    }

    #[test]
    fn one_component_reduces_to_the_component() {
        let o = oracle(1.0, 1);
        let params = o.parameters(0.3).unwrap();
        let inst = random_ahsp_instance(o.space(), 4, params.lattice_eta, 0.3, 3).unwrap();
        let out = o.construct_with(&params, &inst.weights, &inst.vectors).unwrap();
        assert!(out.certificates.all_hold());
        assert_eq!(out.good_blocks.iter().filter(|b| *b == &vec![0]).count(), out.witness.indices.len());
    }

    #[test]
    fn random_lattice_sums_verify() {
        for p in [1.0, 2.0, 3.0] {
            for m in 1..=4 {
                let o = oracle(p, m);
                let params = o.parameters(0.4).unwrap();
                for seed in 0..4 {
                    let inst = random_ahsp_instance(o.space(), 1 + seed as usize % 6, params.lattice_eta, 0.4, seed).unwrap();
                    let out = o
                        .construct_with(&params, &inst.weights, &inst.vectors)
                        .unwrap_or_else(|e| panic!("p {p} m {m} seed {seed}: {e}"));
                    assert!(verify_ahsp_witness(o.space(), &inst.weights, &inst.vectors, &out.witness).all_hold());
                }
            }
        }
    }

    #[test]
    fn vanishing_block_uses_the_fallback_direction() {
        let o = oracle(2.0, 3);
        let params = o.parameters(0.5).unwrap();
        let h = |v: &[f64]| v.iter().map(|x| Hp::new(*x)).collect::<Vec<_>>();
        // Second block is zero in every vector; the rest sits on one face.
        let xs = vec![h(&[0.6, 0.8, 0.0, 0.0, 0.0, 0.0]), h(&[0.6, 0.8, 0.0, 0.0, 0.0, 0.0])];
        let xs: Vec<Vec<Hp>> = xs
            .into_iter()
            .map(|x| {
                let n = o.space().norm(&x).unwrap();
                linalg::scale(&x, &(<Hp as Real>::one() / n))
            })
            .collect();
        let w = h(&[0.5, 0.5]);
        let out = o.construct_with(&params, &w, &xs).unwrap();
        assert_eq!(out.witness.indices, vec![0, 1]);
        for b in &out.good_blocks {
            assert!(!b.contains(&1));
        }
    }

    #[test]
    fn restriction_through_lattice_sum() {
        let o = oracle(2.0, 3);
        let eps = 0.5;
        let eta = o.eta(eps / 2.0).unwrap();
        let plane = NormedSpace::euclidean(2).unwrap();
        for seed in 0..5 {
            let inst = random_ahsp_instance(&plane, 3, eta, eps, seed).unwrap();
            let r = witness_through_sum(&o, 0, &inst.weights, &inst.vectors, eps).unwrap();
            assert!(verify_ahsp_witness(&plane, &inst.weights, &inst.vectors, &r.witness).all_hold());
        }
    }

    #[test]
    fn sup_lattice_is_rejected() {
        let lattice = FiniteLattice::lp(f64::INFINITY, 2).unwrap();
        let face = ahp_oracle_uniformly_convex(NormedSpace::euclidean(2).unwrap()).unwrap();
        let lo = FiniteDimOracle::new(NormedSpace::lattice(lattice.clone())).unwrap();
        let err = LatticeParameters::new::<f64>(&lattice, &lo, &[&face, &face], 0.2).unwrap_err();
        assert!(matches!(err, Error::NotUniformlyMonotone { .. }));
    }
}
