//! Approximate hyperplane series witnesses.
//!
//! A witness for a convex series `sum alpha_k x_k` with nearly unit sum is a
//! set `A` of indices carrying most of the weight, a norm-one functional and,
//! for every `k` in `A`, a unit vector `z_k` close to `x_k` on the face of that
//! functional. This module builds witnesses for finite-dimensional spaces,
//! assembles them for two-summand absolute sums from witnesses of the
//! summands, and restricts witnesses of a sum back to one summand.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::absolute::{AbsoluteNorm2, Coordinate};
use crate::bpb::filter_large_real_part;
use crate::certificate::{CertificateLog, Relation};
use crate::error::{check_dim, Error, Result};
use crate::lattice::FiniteLattice;
use crate::linalg;
use crate::lp::is_inf;
use crate::moduli::lp_convexity_modulus;
use crate::real::{lit, Hp, Real};
use crate::spaces::{NormKind, NormedSpace};
use crate::TOL_SPHERE;

/// Tolerance for `functional(z_k) = 1` and for the dual norm of the functional.
pub const TOL_ATTAIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhspWitness<R> {
    /// Strictly increasing indices into the series.
    pub indices: Vec<usize>,
    /// One unit vector per entry of `indices`.
    pub z: Vec<Vec<R>>,
    pub functional: Vec<R>,
    pub epsilon: f64,
}

/// Checks a witness against its series with fresh norm and dual-norm
/// evaluations.
///
/// Records `mass` (`sum_A alpha > 1 - eps`), `distance` (largest
/// `||z_k - x_k|| < eps`), `unit` (largest `| ||z_k|| - 1 |`), `attained`
/// (largest `|f(z_k) - 1|`) and `functional-norm`.
pub fn verify_ahsp_witness<R: Real>(
    space: &NormedSpace,
    weights: &[R],
    xs: &[Vec<R>],
    witness: &AhspWitness<R>,
) -> CertificateLog {
    let mut log = CertificateLog::new();
    let dim = space.dim();
    let shape = weights.len() == xs.len()
        && xs.iter().all(|x| x.len() == dim)
        && witness.functional.len() == dim
        && witness.z.len() == witness.indices.len()
        && witness.z.iter().all(|z| z.len() == dim)
        && witness.indices.windows(2).all(|w| w[0] < w[1])
        && witness.indices.iter().all(|&k| k < xs.len());
    if !log.check_bool("shape", shape) {
        return log;
    }
    let eps: R = lit(witness.epsilon);
    let mass = witness.indices.iter().fold(R::zero(), |a, &k| a + weights[k].clone());
    log.check("mass", &mass, Relation::Gt, &(R::one() - eps.clone()));
    let mut dist = R::zero();
    let mut unit = R::zero();
    let mut attained = R::zero();
    for (&k, z) in witness.indices.iter().zip(&witness.z) {
        dist = dist.max_of(space.norm_unchecked(&linalg::sub(z, &xs[k])));
        unit = unit.max_of((space.norm_unchecked(z) - R::one()).abs());
        attained = attained.max_of((linalg::dot(&witness.functional, z) - R::one()).abs());
    }
    log.check("distance", &dist, Relation::Lt, &eps);
    log.check("unit", &unit, Relation::Le, &lit(TOL_SPHERE));
    log.check("attained", &attained, Relation::Le, &lit(TOL_ATTAIN));
    let fnorm = space.dual_norm(&witness.functional).unwrap_or_else(|_| R::zero());
    log.check_approx("functional-norm", &fnorm, &R::one(), TOL_ATTAIN);
    log
}

/// Inputs must be unit (or in the ball) up to `slack`.
pub(crate) fn check_series<R: Real>(space: &NormedSpace, weights: &[R], xs: &[Vec<R>], sphere: bool, slack: f64) -> Result<()> {
    check_dim(weights.len(), xs.len())?;
    if xs.is_empty() {
        return Err(Error::DegenerateInput("empty series".into()));
    }
    if weights.iter().any(|w| *w < R::zero()) {
        return Err(Error::Hypothesis("weights must be nonnegative".into()));
    }
    let total = weights.iter().fold(R::zero(), |a, w| a + w.clone());
    if (total.to_f64() - 1.0).abs() > 1e-12 {
        return Err(Error::Hypothesis(format!("weights sum to {}", total.to_f64())));
    }
    for x in xs {
        let n = space.norm(x)?;
        let bad = if sphere {
            (n.clone() - R::one()).abs() > lit(slack)
        } else {
            n.clone() > R::one() + lit(slack)
        };
        if bad {
            return Err(Error::NotOnSphere { norm: n.to_f64() });
        }
    }
    Ok(())
}

/// Rounding allowed on input norms: small against the accuracy sought.
pub(crate) fn input_slack(epsilon: f64) -> f64 {
    TOL_SPHERE.min(1e-3 * epsilon)
}

/// `1 - ||sum alpha_k x_k||`.
pub fn series_deficit<R: Real>(space: &NormedSpace, weights: &[R], xs: &[Vec<R>]) -> Result<R> {
    Ok(R::one() - space.norm(&linalg::weighted_sum(weights, xs))?)
}

pub(crate) fn require_deficit<R: Real>(deficit: &R, eta: f64) -> Result<()> {
    if *deficit >= lit(eta) {
        return Err(Error::Hypothesis(format!(
            "1 - ||sum|| = {:e} is not below eta = {eta:e}",
            deficit.to_f64()
        )));
    }
    Ok(())
}

fn is_absolute(space: &NormedSpace) -> bool {
    !matches!(space.kind(), NormKind::DirectSum { .. })
}

/// Witness for a series in the unit ball of a finite-dimensional space.
///
/// The functional norms the sum, `A` keeps the indices where it exceeds
/// `1 - eta / epsilon`, and each `z_k` is the face point nearest to `x_k`.
/// When the norm is absolute and both the inputs and the functional are
/// nonnegative, `z_k` is replaced by `|z_k|`.
pub fn finite_dim_witness<R: Real>(
    space: &NormedSpace,
    weights: &[R],
    xs: &[Vec<R>],
    epsilon: f64,
    eta: f64,
) -> Result<AhspWitness<R>> {
    if !(epsilon > 0.0 && eta > 0.0 && eta < epsilon) {
        return Err(Error::Range(format!("need 0 < eta < epsilon, got eta = {eta}, epsilon = {epsilon}")));
    }
    check_series(space, weights, xs, false, input_slack(epsilon))?;
    let total = linalg::weighted_sum(weights, xs);
    require_deficit(&(R::one() - space.norm(&total)?), eta)?;
    let functional = space.norming(&total)?;
    let values: Vec<R> = xs.iter().map(|x| linalg::dot(&functional, x)).collect();
    let threshold = R::one() - lit::<R>(eta) / lit(epsilon);
    let set = filter_large_real_part(weights, &values, &lit(eta), &threshold)?;
    let nonneg = |v: &[R]| v.iter().all(|c| *c >= R::zero());
    let positive = is_absolute(space) && nonneg(&functional) && xs.iter().all(|x| nonneg(x));
    let z = set
        .indices
        .iter()
        .map(|&k| {
            let p = space.face_point(&functional, &xs[k])?;
            Ok(if positive { p.iter().map(Real::abs).collect() } else { p })
        })
        .collect::<Result<Vec<_>>>()?;
    let witness = AhspWitness {
        indices: set.indices,
        z,
        functional,
        epsilon,
    };
    let log = verify_ahsp_witness(space, weights, xs, &witness);
    if !log.all_hold() {
        let failed: Vec<String> = log.failures().map(|c| format!("{} (margin {:e})", c.label, c.margin)).collect();
        return Err(Error::WitnessSearchFailed(failed.join(", ")));
    }
    Ok(witness)
}

/// Hypothesis slack for which [`finite_dim_witness`] succeeds at `epsilon`
/// on every series in the unit ball.
///
/// Uniformly convex norms use `0.9 eps min(2 delta(eps / 2), eps / 2)` with
/// `delta` the modulus of convexity. `l_1` uses `0.9 eps^2 / 2`, `l_inf` and
/// the line `0.9 eps^2`, and polygonal planes `0.9 eps min(gap / 2, eps / K)`
/// from their facet slab.
pub fn finite_dim_eta(space: &NormedSpace, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::Range(format!("epsilon {epsilon} outside (0, 2]")));
    }
    if space.dim() == 1 {
        return Ok(0.9 * epsilon * epsilon);
    }
    let from_exponent = |p: f64| {
        if p == 1.0 {
            0.45 * epsilon * epsilon
        } else if is_inf(p) {
            0.9 * epsilon * epsilon
        } else {
            let delta = lp_convexity_modulus(p, epsilon / 2.0);
            0.9 * epsilon * (2.0 * delta).min(epsilon / 2.0)
        }
    };
    let planar = |g: &AbsoluteNorm2| -> Result<f64> {
        if let Some(p) = g.exponent() {
            return Ok(from_exponent(p));
        }
        let slab = g
            .facet_slab()
            .ok_or_else(|| Error::Unsupported("plane norm is neither l_p nor polygonal".into()))?;
        Ok(0.9 * epsilon * (slab.gap / 2.0).min(epsilon / slab.constant))
    };
    match space.kind() {
        NormKind::Euclidean => Ok(from_exponent(2.0)),
        NormKind::Lp(p) => Ok(from_exponent(*p)),
        NormKind::Absolute2(g) => planar(g),
        NormKind::Lattice(FiniteLattice::Absolute(g)) => planar(g),
        NormKind::Lattice(e) => Ok(from_exponent(e.exponent().expect("weighted l_p lattice"))),
        NormKind::DirectSum { .. } => Err(Error::Unsupported(
            "direct sums take their slack from a sum oracle".into(),
        )),
    }
}

/// Source of witnesses for one space at any requested accuracy.
pub trait AhspOracle<R: Real>: Sync {
    fn space(&self) -> &NormedSpace;
    /// Slack on `1 - ||sum||` under which [`AhspOracle::witness`] succeeds.
    fn eta(&self, epsilon: f64) -> Result<f64>;
    fn witness(&self, weights: &[R], xs: &[Vec<R>], epsilon: f64) -> Result<AhspWitness<R>>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDimOracle {
    space: NormedSpace,
}

impl FiniteDimOracle {
    pub fn new(space: NormedSpace) -> Result<Self> {
        finite_dim_eta(&space, 0.5)?;
        Ok(Self { space })
    }
}

impl<R: Real> AhspOracle<R> for FiniteDimOracle {
    fn space(&self) -> &NormedSpace {
        &self.space
    }

    fn eta(&self, epsilon: f64) -> Result<f64> {
        finite_dim_eta(&self.space, epsilon)
    }

    fn witness(&self, weights: &[R], xs: &[Vec<R>], epsilon: f64) -> Result<AhspWitness<R>> {
        finite_dim_witness(&self.space, weights, xs, epsilon, finite_dim_eta(&self.space, epsilon)?)
    }
}

/// Slack parameters of the two-summand construction at a target accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumParameters {
    pub epsilon: f64,
    /// Completion slack of the plane norm at `eps / 5`.
    pub completion_delta: f64,
    /// Accuracy requested from the summand oracles.
    pub component_epsilon: f64,
    /// Smaller of the two summand slacks at `component_epsilon`.
    pub component_eta: f64,
    /// Below this dual norm a summand of the functional counts as negligible.
    pub case_threshold: f64,
    /// The selected set keeps functional values above `1 - filter_slack`.
    pub filter_slack: f64,
    pub plane_epsilon: f64,
    /// Slack the input series must satisfy.
    pub plane_eta: f64,
}

impl SumParameters {
    pub fn new<R: Real>(
        f: &AbsoluteNorm2,
        m: &dyn AhspOracle<R>,
        n: &dyn AhspOracle<R>,
        epsilon: f64,
    ) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Range(format!("epsilon {epsilon} outside (0, 1)")));
        }
        let completion_delta = f.lemma_fact_delta(epsilon / 5.0, 10_000)?;
        let component_epsilon = 0.9 * epsilon / 8.0;
        let component_eta = m.eta(component_epsilon)?.min(n.eta(component_epsilon)?);
        let case_threshold = 0.9 * (completion_delta / 2.0).min(component_eta / 2.0);
        let filter_slack = 0.9 * (completion_delta / 2.0).min(case_threshold * case_threshold * component_eta);
        let plane_epsilon = 0.9 * filter_slack * epsilon / 8.0;
        let plane_eta = finite_dim_eta(&NormedSpace::absolute2(f.clone()), plane_epsilon)?;
        if !(filter_slack > 0.0 && plane_eta > 0.0) {
            return Err(Error::InternalInvariant("slack parameters underflowed".into()));
        }
        Ok(Self {
            epsilon,
            completion_delta,
            component_epsilon,
            component_eta,
            case_threshold,
            filter_slack,
            plane_epsilon,
            plane_eta,
        })
    }
}

/// Which branch of the construction produced the witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SumCase {
    /// First summand of the functional is negligible.
    SecondSummand,
    /// Second summand of the functional is negligible.
    FirstSummand,
    Balanced,
}

/// Index sets produced along the way, all as indices into the input series.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumSets {
    pub plane: Vec<usize>,
    pub selected: Vec<usize>,
    pub first_large: Vec<usize>,
    pub second_large: Vec<usize>,
    pub first_witness: Vec<usize>,
    pub second_witness: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectSumWitness<R> {
    pub witness: AhspWitness<R>,
    pub case: SumCase,
    pub parameters: SumParameters,
    pub sets: SumSets,
    pub certificates: CertificateLog,
}

fn normalize_weights<R: Real>(weights: &[R], set: &[usize]) -> Vec<R> {
    let mass = set.iter().fold(R::zero(), |a, &k| a + weights[k].clone());
    set.iter().map(|&k| weights[k].clone() / mass.clone()).collect()
}

pub(crate) fn run_oracle<R: Real>(
    oracle: &dyn AhspOracle<R>,
    component: usize,
    weights: &[R],
    xs: &[Vec<R>],
    epsilon: f64,
) -> Result<AhspWitness<R>> {
    let w = oracle.witness(weights, xs, epsilon).map_err(|e| Error::OracleViolation {
        component,
        detail: e.to_string(),
    })?;
    let log = verify_ahsp_witness(oracle.space(), weights, xs, &w);
    if !log.all_hold() || w.epsilon > epsilon {
        let failed: Vec<&str> = log.failures().map(|c| c.label.as_str()).collect();
        return Err(Error::OracleViolation {
            component,
            detail: format!("witness fails {}", failed.join(", ")),
        });
    }
    Ok(w)
}

fn split<R: Real>(x: &[R], first: usize) -> (&[R], &[R]) {
    x.split_at(first)
}

fn concat<R: Real>(a: Vec<R>, b: Vec<R>) -> Vec<R> {
    let mut v = a;
    v.extend(b);
    v
}

fn max_over<R: Real>(it: impl Iterator<Item = R>) -> R {
    it.fold(R::zero(), |a, b| a.max_of(b))
}

fn min_over<R: Real>(it: impl Iterator<Item = R>, empty: R) -> R {
    it.fold(None, |a: Option<R>, b| Some(a.map_or(b.clone(), |a| a.min_of(b))))
        .unwrap_or(empty)
}

/// Witness for a series of unit vectors in `M (+)_f N` built from witnesses
/// of the summands.
pub fn direct_sum_witness<R: Real>(
    m: &dyn AhspOracle<R>,
    n: &dyn AhspOracle<R>,
    f: &AbsoluteNorm2,
    weights: &[R],
    xs: &[Vec<R>],
    epsilon: f64,
) -> Result<DirectSumWitness<R>> {
    let params = SumParameters::new(f, m, n, epsilon)?;
    direct_sum_witness_with(&params, m, n, f, weights, xs)
}

/// [`direct_sum_witness`] with precomputed parameters.
pub fn direct_sum_witness_with<R: Real>(
    params: &SumParameters,
    m: &dyn AhspOracle<R>,
    n: &dyn AhspOracle<R>,
    f: &AbsoluteNorm2,
    weights: &[R],
    xs: &[Vec<R>],
) -> Result<DirectSumWitness<R>> {
    let space = NormedSpace::absolute_sum(m.space().clone(), n.space().clone(), f.clone());
    let dm = m.space().dim();
    check_series(&space, weights, xs, true, input_slack(params.plane_epsilon))?;
    require_deficit(&series_deficit(&space, weights, xs)?, params.plane_eta)?;
    let eps: R = lit(params.epsilon);
    let eps0: R = lit(params.plane_epsilon);
    let eps1: R = lit(params.component_epsilon);
    let s_thr: R = lit(params.case_threshold);
    let r_slack: R = lit(params.filter_slack);
    let two: R = lit(2.0);
    let mut log = CertificateLog::new();

    // Plane-level witness on the norm profiles.
    let plane = NormedSpace::absolute2(f.clone());
    let profiles: Vec<Vec<R>> = xs
        .iter()
        .map(|x| {
            let (p, q) = split(x, dm);
            vec![m.space().norm_unchecked(p), n.space().norm_unchecked(q)]
        })
        .collect();
    let top = finite_dim_witness(&plane, weights, &profiles, params.plane_epsilon, params.plane_eta)?;
    let (alpha, beta) = (top.functional[0].clone(), top.functional[1].clone());
    log.check_bool(
        "plane-functional-positive",
        alpha >= R::zero() && beta >= R::zero(),
    );
    let coords: Vec<(R, R)> = top.z.iter().map(|z| (z[0].abs(), z[1].abs())).collect();
    let a_set = top.indices.clone();
    let mass_a = a_set.iter().fold(R::zero(), |a, &k| a + weights[k].clone());
    log.check("plane-mass", &mass_a, Relation::Gt, &(R::one() - eps0.clone()));
    let profile_gap = max_over(a_set.iter().zip(&coords).map(|(&k, (r, s))| {
        (profiles[k][0].clone() - r.clone())
            .abs()
            .max_of((profiles[k][1].clone() - s.clone()).abs())
    }));
    log.check("plane-profile-distance", &profile_gap, Relation::Lt, &eps0);
    let plane_dual = max_over(
        coords
            .iter()
            .map(|(r, s)| (alpha.clone() * r.clone() + beta.clone() * s.clone() - R::one()).abs()),
    );
    log.check("plane-dual", &plane_dual, Relation::Le, &lit(TOL_ATTAIN));

    // Lift to unit vectors with the plane-level profiles.
    let m0: Vec<R> = m.space().canonical_unit();
    let n0: Vec<R> = n.space().canonical_unit();
    let direction = |space: &NormedSpace, v: &[R], fallback: &[R]| {
        let nv = space.norm_unchecked(v);
        if nv.is_zero() {
            fallback.to_vec()
        } else {
            linalg::scale(v, &(R::one() / nv))
        }
    };
    let mut dir_m = vec![Vec::new(); xs.len()];
    let mut dir_n = vec![Vec::new(); xs.len()];
    let mut prof_r = vec![R::zero(); xs.len()];
    let mut prof_s = vec![R::zero(); xs.len()];
    let mut lifted = vec![Vec::new(); xs.len()];
    for (&k, (r, s)) in a_set.iter().zip(&coords) {
        let (p, q) = split(&xs[k], dm);
        dir_m[k] = direction(m.space(), p, &m0);
        dir_n[k] = direction(n.space(), q, &n0);
        prof_r[k] = r.clone();
        prof_s[k] = s.clone();
        lifted[k] = concat(linalg::scale(&dir_m[k], r), linalg::scale(&dir_n[k], s));
    }
    let lift_gap = max_over(
        a_set
            .iter()
            .map(|&k| space.norm_unchecked(&linalg::sub(&lifted[k], &xs[k]))),
    );
    log.check("lift-distance", &lift_gap, Relation::Lt, &(two.clone() * eps0.clone()));
    let a_weights: Vec<R> = a_set.iter().map(|&k| weights[k].clone()).collect();
    let a_vectors: Vec<Vec<R>> = a_set.iter().map(|&k| lifted[k].clone()).collect();
    let lifted_sum = linalg::weighted_sum(&a_weights, &a_vectors);
    let lifted_norm = space.norm_unchecked(&lifted_sum);
    log.check(
        "lift-mass",
        &lifted_norm,
        Relation::Gt,
        &(R::one() - lit::<R>(4.0) * eps0.clone()),
    );

    // Selected set where the norming functional of the lifted sum is large.
    let xstar = space.norming(&lifted_sum)?;
    let (mstar, nstar) = split(&xstar, dm);
    let values: Vec<R> = a_vectors.iter().map(|y| linalg::dot(&xstar, y)).collect();
    let filtered = filter_large_real_part(
        &a_weights,
        &values,
        &(lit::<R>(4.0) * eps0.clone()),
        &(R::one() - r_slack.clone()),
    )?;
    let b_set: Vec<usize> = filtered.indices.iter().map(|&j| a_set[j]).collect();
    let mass_b = filtered.mass.clone();
    let mass_b_bound = R::one() - lit::<R>(4.0) * eps0.clone() / r_slack.clone();
    log.check("selected-mass", &mass_b, Relation::Gt, &mass_b_bound);
    let mnorm = m.space().dual_norm(mstar)?;
    let nnorm = n.space().dual_norm(nstar)?;

    let mut sets = SumSets {
        plane: a_set.clone(),
        selected: b_set.clone(),
        ..SumSets::default()
    };
    let one_side = |side: Side, log: &mut CertificateLog| -> Result<(Vec<usize>, Vec<Vec<R>>, Vec<R>)> {
        // The other summand of the functional is negligible: the series is
        // solved in `side` and completed in the other summand.
        let (oracle, component, lead, dirs) = match side {
            Side::Second => (n, 1, &prof_s, &dir_n),
            Side::First => (m, 0, &prof_r, &dir_m),
        };
        let delta: R = lit(params.completion_delta);
        let min_lead = min_over(b_set.iter().map(|&k| lead[k].clone()), R::one());
        let lead_bound = R::one() - r_slack.clone() - s_thr.clone();
        log.check("lead-profile", &min_lead, Relation::Ge, &lead_bound);
        log.check("lead-bound-vs-completion", &lead_bound, Relation::Gt, &(R::one() - delta));
        let w = normalize_weights(weights, &b_set);
        let inputs: Vec<Vec<R>> = b_set.iter().map(|&k| linalg::scale(&dirs[k], &lead[k])).collect();
        let wit = run_oracle(oracle, component, &w, &inputs, params.component_epsilon)?;
        let c: Vec<usize> = wit.indices.iter().map(|&j| b_set[j]).collect();
        let mut zs = Vec::with_capacity(c.len());
        let mut completion_gap = R::zero();
        for (&k, v) in c.iter().zip(&wit.z) {
            let z = match side {
                Side::Second => {
                    let a = f.nearest_completion(&prof_r[k], &prof_s[k], Coordinate::SecondCoord)?;
                    completion_gap = completion_gap.max_of((a.clone() - prof_r[k].clone()).abs());
                    concat(linalg::scale(&dir_m[k], &a), v.clone())
                }
                Side::First => {
                    let b = f.nearest_completion(&prof_r[k], &prof_s[k], Coordinate::FirstCoord)?;
                    completion_gap = completion_gap.max_of((b.clone() - prof_s[k].clone()).abs());
                    concat(v.clone(), linalg::scale(&dir_n[k], &b))
                }
            };
            zs.push(z);
        }
        log.check("completion-distance", &completion_gap, Relation::Lt, &(eps.clone() / lit(5.0)));
        let functional = match side {
            Side::Second => concat(vec![R::zero(); dm], wit.functional.clone()),
            Side::First => concat(wit.functional.clone(), vec![R::zero(); n.space().dim()]),
        };
        Ok((c, zs, functional))
    };

    let (case, c_set, zs, functional) = if mnorm <= s_thr {
        let (c, zs, fun) = one_side(Side::Second, &mut log)?;
        sets.second_witness = c.clone();
        (SumCase::SecondSummand, c, zs, fun)
    } else if nnorm <= s_thr {
        let (c, zs, fun) = one_side(Side::First, &mut log)?;
        sets.first_witness = c.clone();
        (SumCase::FirstSummand, c, zs, fun)
    } else {
        let b1: Vec<usize> = b_set.iter().copied().filter(|&k| prof_r[k] >= s_thr).collect();
        let c1: Vec<usize> = b_set.iter().copied().filter(|&k| prof_s[k] >= s_thr).collect();
        let contains = |set: &[usize], k: usize| set.binary_search(&k).is_ok();
        log.check_bool(
            "selected-minus-first-in-second",
            b_set.iter().all(|&k| contains(&b1, k) || contains(&c1, k)),
        );
        log.check_bool(
            "selected-minus-second-in-first",
            b_set.iter().all(|&k| contains(&c1, k) || contains(&b1, k)),
        );
        let run = |oracle: &dyn AhspOracle<R>, component: usize, set: &[usize], dirs: &[Vec<R>]| {
            if set.is_empty() {
                return Ok(None);
            }
            let w = normalize_weights(weights, set);
            let inputs: Vec<Vec<R>> = set.iter().map(|&k| dirs[k].clone()).collect();
            run_oracle(oracle, component, &w, &inputs, params.component_epsilon).map(Some)
        };
        let (wm, wn) = rayon::join(|| run(m, 0, &b1, &dir_m), || run(n, 1, &c1, &dir_n));
        let (wm, wn) = (wm?, wn?);
        let pick = |wit: &Option<AhspWitness<R>>, set: &[usize], space: &NormedSpace, unit: &[R]| -> Result<_> {
            Ok(match wit {
                Some(w) => (
                    w.indices.iter().map(|&j| set[j]).collect::<Vec<usize>>(),
                    w.z.clone(),
                    w.functional.clone(),
                ),
                None => (Vec::new(), Vec::new(), space.norming(unit)?),
            })
        };
        let (d1, u, mfun) = pick(&wm, &b1, m.space(), &m0)?;
        let (f1, v, nfun) = pick(&wn, &c1, n.space(), &n0)?;
        let u0 = u.first().cloned().unwrap_or_else(|| m0.clone());
        let v0 = v.first().cloned().unwrap_or_else(|| n0.clone());
        let mut c = Vec::new();
        let mut zs = Vec::new();
        for &k in &b_set {
            let ud = d1.binary_search(&k).ok().map(|j| &u[j]);
            let vf = f1.binary_search(&k).ok().map(|j| &v[j]);
            let in_b1 = contains(&b1, k);
            let in_c1 = contains(&c1, k);
            let (uk, vk) = match (ud, vf) {
                (Some(uk), Some(vk)) => (uk, vk),
                (None, Some(vk)) if !in_b1 => (&u0, vk),
                (Some(uk), None) if !in_c1 => (uk, &v0),
                _ => continue,
            };
            c.push(k);
            zs.push(concat(
                linalg::scale(uk, &prof_r[k]),
                linalg::scale(vk, &prof_s[k]),
            ));
        }
        let pieces_disjoint = {
            let p1 = |k: usize| contains(&d1, k) && contains(&f1, k);
            let p2 = |k: usize| !contains(&b1, k) && contains(&f1, k);
            let p3 = |k: usize| !contains(&c1, k) && contains(&d1, k);
            c.iter()
                .all(|&k| [p1(k), p2(k), p3(k)].iter().filter(|&&b| b).count() == 1)
        };
        log.check_bool("pieces-disjoint", pieces_disjoint);
        let uncovered = b_set
            .iter()
            .filter(|&&k| !contains(&c, k))
            .all(|&k| (contains(&b1, k) && !contains(&d1, k)) || (contains(&c1, k) && !contains(&f1, k)));
        log.check_bool("uncovered-in-oracle-gaps", uncovered);
        sets.first_large = b1;
        sets.second_large = c1;
        sets.first_witness = d1;
        sets.second_witness = f1;
        let functional = concat(linalg::scale(&mfun, &alpha), linalg::scale(&nfun, &beta));
        (SumCase::Balanced, c, zs, functional)
    };

    // Mass and distance chains.
    let mass_c = c_set.iter().fold(R::zero(), |a, &k| a + weights[k].clone());
    let mass_chain = mass_b_bound.clone() - lit::<R>(4.0) * eps1.clone();
    log.check("witness-mass", &mass_c, Relation::Gt, &mass_chain);
    log.check("witness-mass-chain", &mass_chain, Relation::Gt, &(R::one() - eps.clone()));
    let distance_budget = match case {
        SumCase::Balanced => two.clone() * s_thr.clone() + eps1.clone() + two.clone() * eps0.clone(),
        _ => eps.clone() / lit(5.0) + eps1.clone() + two.clone() * eps0.clone(),
    };
    let dist = max_over(
        c_set
            .iter()
            .zip(&zs)
            .map(|(&k, z)| space.norm_unchecked(&linalg::sub(z, &xs[k]))),
    );
    log.check("witness-distance", &dist, Relation::Le, &distance_budget);
    log.check("witness-distance-chain", &distance_budget, Relation::Lt, &eps);

    let witness = AhspWitness {
        indices: c_set,
        z: zs,
        functional,
        epsilon: params.epsilon,
    };
    let final_log = verify_ahsp_witness(&space, weights, xs, &witness);
    log.extend(final_log);
    if !log.all_hold() {
        let failed: Vec<String> = log.failures().map(|c| c.label.clone()).collect();
        return Err(Error::InternalInvariant(format!(
            "direct-sum witness certificates failed: {}",
            failed.join(", ")
        )));
    }
    Ok(DirectSumWitness {
        witness,
        case,
        parameters: *params,
        sets,
        certificates: log,
    })
}

#[derive(Clone, Copy)]
enum Side {
    First,
    Second,
}

/// [`AhspOracle`] for `M (+)_f N` assembled from oracles of the summands.
pub struct DirectSumOracle<R: Real> {
    space: NormedSpace,
    f: AbsoluteNorm2,
    m: Box<dyn AhspOracle<R>>,
    n: Box<dyn AhspOracle<R>>,
}

impl<R: Real> DirectSumOracle<R> {
    pub fn new(m: Box<dyn AhspOracle<R>>, n: Box<dyn AhspOracle<R>>, f: AbsoluteNorm2) -> Self {
        let space = NormedSpace::absolute_sum(m.space().clone(), n.space().clone(), f.clone());
        Self { space, f, m, n }
    }

    pub fn parameters(&self, epsilon: f64) -> Result<SumParameters> {
        SumParameters::new(&self.f, self.m.as_ref(), self.n.as_ref(), epsilon)
    }

    pub fn construct(&self, weights: &[R], xs: &[Vec<R>], epsilon: f64) -> Result<DirectSumWitness<R>> {
        direct_sum_witness(self.m.as_ref(), self.n.as_ref(), &self.f, weights, xs, epsilon)
    }

    pub fn construct_with(&self, params: &SumParameters, weights: &[R], xs: &[Vec<R>]) -> Result<DirectSumWitness<R>> {
        direct_sum_witness_with(params, self.m.as_ref(), self.n.as_ref(), &self.f, weights, xs)
    }
}

impl<R: Real> AhspOracle<R> for DirectSumOracle<R> {
    fn space(&self) -> &NormedSpace {
        &self.space
    }

    fn eta(&self, epsilon: f64) -> Result<f64> {
        Ok(self.parameters(epsilon)?.plane_eta)
    }

    fn witness(&self, weights: &[R], xs: &[Vec<R>], epsilon: f64) -> Result<AhspWitness<R>> {
        Ok(self.construct(weights, xs, epsilon)?.witness)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Restriction<R> {
    pub witness: AhspWitness<R>,
    pub certificates: CertificateLog,
}

/// Turns a witness at `eps / 2` of a series living in summand `component` of
/// a direct sum into a witness at `eps` for the same series in the summand.
///
/// `xs` are the series vectors in summand coordinates.
pub fn restrict_witness<R: Real>(
    sum: &NormedSpace,
    component: usize,
    weights: &[R],
    xs: &[Vec<R>],
    witness: &AhspWitness<R>,
) -> Result<Restriction<R>> {
    let (components, _) = sum
        .components()
        .ok_or_else(|| Error::Config("restriction needs a direct sum".into()))?;
    let target = components
        .get(component)
        .ok_or_else(|| Error::Range(format!("no component {component}")))?;
    let range = sum.ranges()[component].clone();
    check_series(target, weights, xs, true, TOL_SPHERE)?;
    let embedded: Vec<Vec<R>> = xs.iter().map(|x| sum.embed(component, x)).collect::<Result<_>>()?;
    let sum_log = verify_ahsp_witness(sum, weights, &embedded, witness);
    if !sum_log.all_hold() {
        return Err(Error::Hypothesis("sum-level witness does not verify".into()));
    }
    let half: R = lit::<R>(witness.epsilon);
    let mut log = CertificateLog::new();
    let mstar = witness.functional[range.clone()].to_vec();
    let mnorm = target.dual_norm(&mstar)?;
    if !log.check("functional-nonzero", &mnorm, Relation::Gt, &R::zero()) {
        return Err(Error::InternalInvariant("restricted functional vanishes".into()));
    }
    let mut lead = R::one();
    let mut rest = R::zero();
    let mut attain = R::zero();
    let mut zs = Vec::with_capacity(witness.z.len());
    for z in &witness.z {
        let p = &z[range.clone()];
        let pn = target.norm_unchecked(p);
        let mut q = z.clone();
        for v in &mut q[range.clone()] {
            *v = R::zero();
        }
        rest = rest.max_of(sum.norm_unchecked(&q));
        lead = lead.min_of(pn.clone());
        attain = attain.max_of((linalg::dot(&mstar, p) - mnorm.clone() * pn.clone()).abs());
        if pn.is_zero() {
            return Err(Error::InternalInvariant("witness vector has no mass in the component".into()));
        }
        zs.push(linalg::scale(p, &(R::one() / pn)));
    }
    log.check("component-norm", &lead, Relation::Gt, &(R::one() - half.clone()));
    log.check("complement-norm", &rest, Relation::Lt, &half);
    log.check("component-attainment", &attain, Relation::Le, &lit(TOL_ATTAIN));
    let restricted = AhspWitness {
        indices: witness.indices.clone(),
        z: zs,
        functional: linalg::scale(&mstar, &(R::one() / mnorm)),
        epsilon: 2.0 * witness.epsilon,
    };
    log.extend(verify_ahsp_witness(target, weights, xs, &restricted));
    if !log.all_hold() {
        let failed: Vec<String> = log.failures().map(|c| c.label.clone()).collect();
        return Err(Error::InternalInvariant(format!("restriction failed: {}", failed.join(", "))));
    }
    Ok(Restriction {
        witness: restricted,
        certificates: log,
    })
}

/// Component witness obtained by embedding the series into a sum, asking
/// the sum oracle for a witness at `eps / 2` and restricting it.
pub fn witness_through_sum<R: Real>(
    sum_oracle: &dyn AhspOracle<R>,
    component: usize,
    weights: &[R],
    xs: &[Vec<R>],
    epsilon: f64,
) -> Result<Restriction<R>> {
    let sum = sum_oracle.space();
    let embedded: Vec<Vec<R>> = xs.iter().map(|x| sum.embed(component, x)).collect::<Result<_>>()?;
    let w = sum_oracle.witness(weights, &embedded, epsilon / 2.0)?;
    restrict_witness(sum, component, weights, xs, &w)
}

/// Pointwise face oracle: for a functional `g` from the norming set and a
/// unit `x` with `g(x) > 1 - delta(eps)`, returns a point of the face of
/// `upsilon(g)` within `eps` of `x`.
pub trait AhpOracle<R: Real>: Sync {
    fn space(&self) -> &NormedSpace;
    fn delta(&self, epsilon: f64) -> Result<f64>;
    fn upsilon(&self, functional: &[R], epsilon: f64) -> Result<Vec<R>>;
    fn face_point(&self, functional: &[R], x: &[R], epsilon: f64) -> Result<Vec<R>>;
    fn sample_norming(&self, rng: &mut dyn RngCore) -> Result<Vec<R>>;
}

/// Pointwise oracle of a uniformly convex space: the modulus of convexity as
/// `delta`, the identity as `upsilon`, and the unique face point.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformlyConvexAhp {
    space: NormedSpace,
    exponent: f64,
}

pub fn ahp_oracle_uniformly_convex(space: NormedSpace) -> Result<UniformlyConvexAhp> {
    match space.lp_exponent() {
        Some(p) if p > 1.0 && !is_inf(p) && !matches!(space.kind(), NormKind::Lattice(_)) => Ok(UniformlyConvexAhp {
            space,
            exponent: p,
        }),
        _ => Err(Error::NotUniformlyConvex),
    }
}

impl<R: Real> AhpOracle<R> for UniformlyConvexAhp {
    fn space(&self) -> &NormedSpace {
        &self.space
    }

    fn delta(&self, epsilon: f64) -> Result<f64> {
        if !(epsilon > 0.0 && epsilon <= 2.0) {
            return Err(Error::Range(format!("epsilon {epsilon} outside (0, 2]")));
        }
        Ok(lp_convexity_modulus(self.exponent, epsilon))
    }

    fn upsilon(&self, functional: &[R], _epsilon: f64) -> Result<Vec<R>> {
        check_dim(self.space.dim(), functional.len())?;
        Ok(functional.to_vec())
    }

    fn face_point(&self, functional: &[R], x: &[R], _epsilon: f64) -> Result<Vec<R>> {
        self.space.face_point(functional, x)
    }

    fn sample_norming(&self, rng: &mut dyn RngCore) -> Result<Vec<R>> {
        loop {
            let x: Vec<R> = (0..self.space.dim())
                .map(|_| lit(rng.sample::<f64, _>(StandardNormal)))
                .collect();
            if linalg::norm2(&x) > lit(1e-6) {
                return self.space.norming(&x);
            }
        }
    }
}

/// A convex series of unit vectors close to a common face.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhspInstance {
    pub space: NormedSpace,
    pub weights: Vec<Hp>,
    pub vectors: Vec<Vec<Hp>>,
    pub epsilon: f64,
}

impl AhspInstance {
    pub fn deficit(&self) -> Result<Hp> {
        series_deficit(&self.space, &self.weights, &self.vectors)
    }
}

fn random_unit(space: &NormedSpace, rng: &mut ChaCha8Rng) -> Result<Vec<Hp>> {
    loop {
        let v: Vec<Hp> = (0..space.dim())
            .map(|_| Hp::new(rng.sample(StandardNormal)))
            .collect();
        let n = space.norm(&v)?;
        if n > lit(1e-3) {
            return Ok(linalg::scale(&v, &(<Hp as Real>::one() / n)));
        }
    }
}

/// Random unit series in `space` with `1 - ||sum|| < eta / 2`.
///
/// Picks a functional norming a random direction, samples `count` unit
/// vectors, and pulls each toward the face of the functional by factors
/// `0.1^j` until the hypothesis holds.
pub fn random_ahsp_instance(
    space: &NormedSpace,
    count: usize,
    eta: f64,
    epsilon: f64,
    seed: u64,
) -> Result<AhspInstance> {
    if count == 0 {
        return Err(Error::Config("series needs at least one vector".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let anchor = random_unit(space, &mut rng)?;
    let functional = space.norming(&anchor)?;
    let raw: Vec<f64> = (0..count).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<Hp> = raw.iter().map(|w| Hp::new(*w) / Hp::new(total)).collect();
    let drift: Hp = weights[..count - 1]
        .iter()
        .fold(<Hp as Real>::zero(), |a, w| a + w.clone());
    weights[count - 1] = <Hp as Real>::one() - drift;
    let starts: Vec<Vec<Hp>> = (0..count).map(|_| random_unit(space, &mut rng)).collect::<Result<_>>()?;
    let faces: Vec<Vec<Hp>> = starts
        .iter()
        .map(|x| space.face_point(&functional, x))
        .collect::<Result<_>>()?;
    let target: Hp = lit(eta / 2.0);
    for j in 0..100 {
        let t: Hp = lit::<Hp>(0.1).powf(&lit(j as f64));
        let vectors: Vec<Vec<Hp>> = starts
            .iter()
            .zip(&faces)
            .map(|(x, p)| {
                let v = linalg::add(p, &linalg::scale(&linalg::sub(x, p), &t));
                let n = space.norm_unchecked(&v);
                linalg::scale(&v, &(<Hp as Real>::one() / n))
            })
            .collect();
        if series_deficit(space, &weights, &vectors)? < target {
            return Ok(AhspInstance {
                space: space.clone(),
                weights,
                vectors,
                epsilon,
            });
        }
    }
    Err(Error::GenerationFailed(format!("series did not reach deficit {eta:e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plane() -> NormedSpace {
        NormedSpace::euclidean(2).unwrap()
    }

    fn hp(v: &[f64]) -> Vec<Hp> {
        v.iter().map(|x| Hp::new(*x)).collect()
    }

    fn hex() -> AbsoluteNorm2 {
        AbsoluteNorm2::table(vec![[0.0, 1.0, 1.0], [1.0, 1.0, 1.2], [1.0, 0.0, 1.0]]).unwrap()
    }

    fn plane_oracles() -> (FiniteDimOracle, FiniteDimOracle) {
        (FiniteDimOracle::new(plane()).unwrap(), FiniteDimOracle::new(plane()).unwrap())
    }

    #[test]
    fn constant_series_verifies() {
        let x = vec![0.6, 0.8];
        let w = AhspWitness {
            indices: vec![0, 1],
            z: vec![x.clone(), x.clone()],
            functional: plane().norming(&x).unwrap(),
            epsilon: 0.1,
        };
        let log = verify_ahsp_witness(&plane(), &[0.5, 0.5], &[x.clone(), x.clone()], &w);
        assert!(log.all_hold());
    }

    #[test]
    fn far_witness_fails_distance() {
        let eps = 0.1;
        let x = vec![1.0, 0.0];
        let theta = 2.0 * ((eps + 0.01) / 2.0f64).asin();
        let z = vec![theta.cos(), theta.sin()];
        let w = AhspWitness {
            indices: vec![0],
            z: vec![z.clone()],
            functional: z,
            epsilon: eps,
        };
        let log = verify_ahsp_witness(&plane(), &[1.0], &[x], &w);
        let failed: Vec<&str> = log.failures().map(|c| c.label.as_str()).collect();
        assert_eq!(failed, vec!["distance"]);
    }

    #[test]
    fn equal_vectors_give_themselves() {
        for space in [plane(), NormedSpace::lp(3, 1.0).unwrap(), NormedSpace::lp(3, 3.0).unwrap()] {
            let mut x = vec![0.3, -0.5, 0.2][..space.dim()].to_vec();
            let n = space.norm(&x).unwrap();
            x.iter_mut().for_each(|v| *v /= n);
            let w = finite_dim_witness(&space, &[0.25, 0.75], &[x.clone(), x.clone()], 0.3, 0.01).unwrap();
            assert_eq!(w.indices, vec![0, 1]);
            for z in &w.z {
                assert!(linalg::norm2(&linalg::sub(z, &x)) < 1e-12);
            }
            assert_eq!(w.functional, space.norming(&x).unwrap());
        }
    }

    #[test]
    fn euclidean_pair_snaps_to_midpoint_direction() {
        let theta: f64 = 0.05;
        let xs = vec![vec![1.0, 0.0], vec![theta.cos(), theta.sin()]];
        let eta = 1.0 - (theta / 2.0).cos() + 1e-6;
        let w = finite_dim_witness(&plane(), &[0.5, 0.5], &xs, 0.2, eta).unwrap();
        assert_eq!(w.indices, vec![0, 1]);
        // Brute-force face search over a discretized circle.
        let best = (0..200_000)
            .map(|j| {
                let a = std::f64::consts::TAU * j as f64 / 200_000.0;
                (a, w.functional[0] * a.cos() + w.functional[1] * a.sin())
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0;
        for z in &w.z {
            assert!((z[0] - best.cos()).abs() < 1e-4 && (z[1] - best.sin()).abs() < 1e-4);
            assert!((z[1].atan2(z[0]) - theta / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sup_norm_top_face() {
        let space = NormedSpace::lp(2, f64::INFINITY).unwrap();
        let xs = vec![vec![0.3, 1.0], vec![-0.7, 1.0]];
        let w = finite_dim_witness(&space, &[0.5, 0.5], &xs, 0.1, 0.001).unwrap();
        assert_eq!(w.functional, vec![0.0, 1.0]);
        assert_eq!(w.z, xs);
        // The extreme dual points are the four signed basis vectors; only
        // the second one is one on both vectors.
        let extreme = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let attaining: Vec<_> = extreme
            .iter()
            .filter(|g| xs.iter().all(|x| g[0] * x[0] + g[1] * x[1] == 1.0))
            .collect();
        assert_eq!(attaining, vec![&[0.0, 1.0]]);
    }

    #[test]
    fn hypothesis_is_checked() {
        let xs = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let err = finite_dim_witness(&plane(), &[0.5, 0.5], &xs, 0.5, 0.1).unwrap_err();
        assert!(matches!(err, Error::Hypothesis(_)));
    }

    fn eta_spaces() -> Vec<NormedSpace> {
        vec![
            NormedSpace::euclidean(3).unwrap(),
            NormedSpace::lp(3, 1.0).unwrap(),
            NormedSpace::lp(3, 1.5).unwrap(),
            NormedSpace::lp(3, 4.0).unwrap(),
            NormedSpace::lp(3, f64::INFINITY).unwrap(),
            NormedSpace::lp(1, 2.0).unwrap(),
            NormedSpace::absolute2(hex()),
            NormedSpace::absolute2(AbsoluteNorm2::lp(f64::INFINITY)),
            NormedSpace::lattice(FiniteLattice::weighted_lp(1.0, vec![1.0, 2.0, 0.5]).unwrap()),
            NormedSpace::lattice(FiniteLattice::weighted_lp(3.0, vec![1.0, 2.0, 0.5]).unwrap()),
        ]
    }

    #[test]
    fn slack_policy_suffices_on_random_series() {
        for space in eta_spaces() {
            for eps in [0.05, 0.2, 0.5] {
                let eta = finite_dim_eta(&space, eps).unwrap();
                for seed in 0..20 {
                    let inst = random_ahsp_instance(&space, 1 + seed as usize % 7, eta, eps, seed).unwrap();
                    // Shrink into the open ball as well.
                    let shrink: Hp = lit(1.0 - eta / 8.0);
                    let inside: Vec<Vec<Hp>> = inst.vectors.iter().map(|x| linalg::scale(x, &shrink)).collect();
                    for xs in [&inst.vectors, &inside] {
                        let w = finite_dim_witness(&space, &inst.weights, xs, eps, eta)
                            .unwrap_or_else(|e| panic!("{space:?} eps {eps} seed {seed}: {e}"));
                        assert!(verify_ahsp_witness(&space, &inst.weights, xs, &w).all_hold());
                    }
                }
            }
        }
    }

    #[test]
    fn direct_sums_have_no_finite_slack() {
        let s = NormedSpace::absolute_sum(plane(), plane(), AbsoluteNorm2::lp(2.0));
        assert!(matches!(finite_dim_eta(&s, 0.1), Err(Error::Unsupported(_))));
    }

    /// Concatenation of two plane vectors, each rescaled to euclidean norm
    /// one (or left at zero) in working precision.
    fn embed2(a: &[f64], b: &[f64]) -> Vec<Hp> {
        let unit = |v: &[f64]| {
            let v = hp(v);
            let n = linalg::norm2(&v);
            if n.is_zero() { v } else { linalg::scale(&v, &(<Hp as Real>::one() / n)) }
        };
        [unit(a), unit(b)].concat()
    }

    #[test]
    fn second_summand_fixture() {
        let (m, n) = plane_oracles();
        let xs = vec![embed2(&[0.0, 0.0], &[0.6, 0.8]); 3];
        let w = hp(&[0.2, 0.3, 0.5]);
        let out = direct_sum_witness(&m, &n, &AbsoluteNorm2::lp(2.0), &w, &xs, 0.5).unwrap();
        assert_eq!(out.case, SumCase::SecondSummand);
        assert_eq!(out.witness.indices, vec![0, 1, 2]);
        assert!(out.certificates.all_hold());
        assert!(out.witness.functional[..2].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn first_summand_fixture() {
        let (m, n) = plane_oracles();
        let xs = vec![embed2(&[1.0, 0.0], &[0.0, 0.0]), embed2(&[1.0, 0.0], &[0.0, 0.0])];
        let w = hp(&[0.5, 0.5]);
        let out = direct_sum_witness(&m, &n, &AbsoluteNorm2::lp(3.0), &w, &xs, 0.2).unwrap();
        assert_eq!(out.case, SumCase::FirstSummand);
        assert!(out.witness.functional[2..].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn balanced_fixture_uses_all_three_pieces() {
        let (m, n) = plane_oracles();
        let xs = vec![
            embed2(&[1.0, 0.0], &[0.0, 0.0]),
            embed2(&[0.0, 0.0], &[0.0, 1.0]),
            hp(&[0.5, 0.0, 0.0, 0.5]),
        ];
        let w = hp(&[0.3, 0.3, 0.4]);
        let sum = NormedSpace::absolute_sum(plane(), plane(), AbsoluteNorm2::lp(1.0));
        assert!(series_deficit(&sum, &w, &xs).unwrap() < lit(1e-100));
        let out = direct_sum_witness(&m, &n, &AbsoluteNorm2::lp(1.0), &w, &xs, 0.5).unwrap();
        assert_eq!(out.case, SumCase::Balanced);
        let s = &out.sets;
        assert!(s.selected.iter().any(|k| !s.first_large.contains(k)));
        assert!(s.selected.iter().all(|k| s.first_large.contains(k) || s.second_large.contains(k)));
        assert!(out.certificates.get("pieces-disjoint").all(|c| c.holds));
        assert_eq!(out.witness.indices.len(), 3);
    }

    #[test]
    fn oracle_failures_are_attributed() {
        struct Liar(NormedSpace);
        impl AhspOracle<Hp> for Liar {
            fn space(&self) -> &NormedSpace {
                &self.0
            }
            fn eta(&self, epsilon: f64) -> Result<f64> {
                finite_dim_eta(&self.0, epsilon)
            }
            fn witness(&self, weights: &[Hp], xs: &[Vec<Hp>], epsilon: f64) -> Result<AhspWitness<Hp>> {
                let mut w = finite_dim_witness(&self.0, weights, xs, epsilon, self.eta(epsilon)?)?;
                w.z[0] = linalg::scale(&w.z[0], &lit(-1.0));
                Ok(w)
            }
        }
        let m = FiniteDimOracle::new(plane()).unwrap();
        let liar = Liar(plane());
        let xs = vec![embed2(&[0.0, 0.0], &[0.6, 0.8])];
        let err = direct_sum_witness(&m, &liar, &AbsoluteNorm2::lp(2.0), &hp(&[1.0]), &xs, 0.5).unwrap_err();
        assert!(matches!(err, Error::OracleViolation { component: 1, .. }), "{err}");
    }

    #[test]
    fn random_direct_sums_verify() {
        let (m, n) = plane_oracles();
        for f in [AbsoluteNorm2::lp(1.0), AbsoluteNorm2::lp(2.0), AbsoluteNorm2::lp(3.0), hex()] {
            let params = SumParameters::new::<Hp>(&f, &m, &n, 0.5).unwrap();
            let sum = NormedSpace::absolute_sum(plane(), plane(), f.clone());
            for seed in 0..10 {
                let inst = random_ahsp_instance(&sum, 1 + seed as usize % 5, params.plane_eta, 0.5, seed).unwrap();
                let out = direct_sum_witness_with(&params, &m, &n, &f, &inst.weights, &inst.vectors)
                    .unwrap_or_else(|e| panic!("{f:?} seed {seed}: {e}"));
                assert!(verify_ahsp_witness(&sum, &inst.weights, &inst.vectors, &out.witness).all_hold());
            }
        }
    }

    #[test]
    fn parameters_respect_their_ordering() {
        let (m, n) = plane_oracles();
        for eps in [0.2, 0.5] {
            let p = SumParameters::new::<f64>(&AbsoluteNorm2::lp(3.0), &m, &n, eps).unwrap();
            assert!(p.component_epsilon < eps / 8.0);
            assert!(p.case_threshold < (p.completion_delta / 2.0).min(p.component_eta / 2.0));
            assert!(p.filter_slack < (p.completion_delta / 2.0).min(p.case_threshold.powi(2) * p.component_eta));
            assert!(p.plane_epsilon < p.filter_slack * eps / 8.0);
            assert!(p.plane_eta > 0.0);
        }
    }

    #[test]
    fn identity_restriction() {
        let sum = NormedSpace::absolute_sum(plane(), plane(), AbsoluteNorm2::lp(2.0));
        let x = vec![0.6, 0.8];
        let w = AhspWitness {
            indices: vec![0],
            z: vec![sum.embed(0, &x).unwrap()],
            functional: sum.embed(0, &x).unwrap(),
            epsilon: 0.05,
        };
        let r = restrict_witness(&sum, 0, &[1.0], &[x.clone()], &w).unwrap();
        assert_eq!(r.witness.z, vec![x.clone()]);
        assert_eq!(r.witness.functional, x);
        assert_eq!(r.witness.epsilon, 0.1);
    }

    #[test]
    fn restriction_through_direct_sum_oracle() {
        let oracle: DirectSumOracle<Hp> = DirectSumOracle::new(
            Box::new(FiniteDimOracle::new(plane()).unwrap()),
            Box::new(FiniteDimOracle::new(plane()).unwrap()),
            AbsoluteNorm2::lp(2.0),
        );
        let eps = 0.5;
        let eta = oracle.eta(eps / 2.0).unwrap();
        for seed in 0..5 {
            let inst = random_ahsp_instance(&plane(), 3, eta, eps, seed).unwrap();
            for component in [0, 1] {
                let r = witness_through_sum(&oracle, component, &inst.weights, &inst.vectors, eps).unwrap();
                assert!(verify_ahsp_witness(&plane(), &inst.weights, &inst.vectors, &r.witness).all_hold());
                assert_eq!(r.witness.epsilon, eps);
            }
        }
    }

    #[test]
    fn uniformly_convex_ahp_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for space in [plane(), NormedSpace::lp(2, 3.0).unwrap(), NormedSpace::lp(3, 1.5).unwrap()] {
            let ahp = ahp_oracle_uniformly_convex(space.clone()).unwrap();
            for eps in [0.1, 0.5] {
                let delta = AhpOracle::<f64>::delta(&ahp, eps).unwrap();
                let mut probes = 0;
                while probes < 1000 {
                    let g: Vec<f64> = ahp.sample_norming(&mut rng).unwrap();
                    let face = ahp.face_point(&g, &vec![0.0; space.dim()], eps).unwrap();
                    // Random unit vector near the face.
                    let t: f64 = rng.random_range(0.0..1.0);
                    let noise: Vec<f64> = (0..space.dim()).map(|_| rng.sample::<f64, _>(StandardNormal) * t).collect();
                    let v = linalg::add(&face, &noise);
                    let x = linalg::scale(&v, &(1.0 / space.norm(&v).unwrap()));
                    if linalg::dot(&g, &x) <= 1.0 - delta {
                        continue;
                    }
                    probes += 1;
                    let z = ahp.face_point(&g, &x, eps).unwrap();
                    assert!(space.norm(&linalg::sub(&x, &z)).unwrap() < eps);
                    assert!((linalg::dot(&g, &z) - 1.0).abs() < 1e-12);
                }
            }
        }
        let ahp = ahp_oracle_uniformly_convex(plane()).unwrap();
        let x = vec![0.6, 0.8];
        assert_eq!(AhpOracle::<f64>::face_point(&ahp, &x, &x, 0.1).unwrap(), x);
        assert!(matches!(
            ahp_oracle_uniformly_convex(NormedSpace::lp(2, 1.0).unwrap()),
            Err(Error::NotUniformlyConvex)
        ));
    }
}
