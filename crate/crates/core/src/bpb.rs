//! Bishop-Phelps-Bollobás corrections.
//!
//! The central routine takes an operator `T` of norm one from an `l_1`-sum of
//! spaces into a Hilbert space together with a unit vector `z0` at which `T`
//! almost attains its norm, and produces an operator `R` and a unit vector
//! `x0` close to them with `||R x0|| = ||R|| = 1`. Per-summand corrections come
//! from a pluggable [`ComponentOracle`]; the summands are then glued together
//! with aligning isometries of the codomain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alignment::align_isometry;
use crate::certificate::{CertificateLog, Relation};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, right_singular, Matrix};
use crate::moduli::hilbert_modulus;
use crate::real::{lit, Hp, Real};
use crate::spaces::{operator_norm, NormedSpace};
use crate::TOL_SPHERE;

/// Nonnegative weights paired with a payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexSeries<R, P> {
    pub weights: Vec<R>,
    pub payload: Vec<P>,
}

impl<R: Real, P> ConvexSeries<R, P> {
    pub fn new(weights: Vec<R>, payload: Vec<P>) -> Result<Self> {
        check_dim(weights.len(), payload.len())?;
        let series = ConvexSeries { weights, payload };
        series.check(true)?;
        Ok(series)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> R {
        self.weights.iter().fold(R::zero(), |a, w| a + w.clone())
    }

    /// Weights in `[0, 1]` with total `<= 1`, or `== 1` when `sub` is false,
    /// up to `1e-12`.
    pub fn check(&self, sub: bool) -> Result<()> {
        if self.weights.iter().any(|w| *w < R::zero() || *w > R::one()) {
            return Err(Error::Hypothesis("weights must lie in [0, 1]".into()));
        }
        let total = self.total().to_f64();
        let ok = if sub { total <= 1.0 + 1e-12 } else { (total - 1.0).abs() <= 1e-12 };
        if !ok {
            return Err(Error::Hypothesis(format!("weights sum to {total}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredSet<R> {
    pub indices: Vec<usize>,
    pub mass: R,
    /// `1 - eta / (1 - r)`.
    pub guaranteed: R,
}

/// Indices whose value exceeds `r`. Carries the mass bound
/// `sum_A alpha > 1 - eta / (1 - r)`.
pub fn filter_large_real_part<R: Real>(weights: &[R], values: &[R], eta: &R, r: &R) -> Result<FilteredSet<R>> {
    check_dim(weights.len(), values.len())?;
    if !(*r > R::zero() && *r < R::one()) {
        return Err(Error::Range("threshold must lie in (0, 1)".into()));
    }
    let slack = R::one() + lit(1e-12);
    if values.iter().any(|c| c.abs() > slack) {
        return Err(Error::Hypothesis("values must have modulus at most 1".into()));
    }
    if weights.iter().any(|w| *w < R::zero()) {
        return Err(Error::Hypothesis("weights must be nonnegative".into()));
    }
    let total = weights.iter().fold(R::zero(), |a, w| a + w.clone());
    if total > slack {
        return Err(Error::Hypothesis("weights must sum to at most 1".into()));
    }
    let avg = weights
        .iter()
        .zip(values)
        .fold(R::zero(), |a, (w, c)| a + w.clone() * c.clone());
    if avg <= R::one() - eta.clone() {
        return Err(Error::Hypothesis(format!(
            "average {} does not exceed 1 - eta",
            avg.to_f64()
        )));
    }
    let indices: Vec<usize> = (0..values.len()).filter(|&i| values[i] > *r).collect();
    let mass = indices.iter().fold(R::zero(), |a, &i| a + weights[i].clone());
    let guaranteed = R::one() - eta.clone() / (R::one() - r.clone());
    Ok(FilteredSet {
        indices,
        mass,
        guaranteed,
    })
}

/// Slack parameters of the `l_1`-sum correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterCascade {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

/// Each parameter is `0.9` times its binding bound:
/// `r < eps/4`, `s < min(eps/4, d(r)/3)`, `t < min(eps/4, eta(s), d(r)/3)`
/// with `d` the modulus of convexity of the Hilbert codomain.
pub fn cascade_l1sum(epsilon: f64, eta: impl Fn(f64) -> f64, h: &NormedSpace) -> Result<ParameterCascade> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Range(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if !h.is_euclidean() {
        return Err(Error::Unsupported("codomain must be a Hilbert space".into()));
    }
    let r = 0.9 * epsilon / 4.0;
    let dr = hilbert_modulus(r);
    let s = 0.9 * f64::min(epsilon / 4.0, dr / 3.0);
    let es = eta(s);
    if !(es > 0.0) {
        return Err(Error::InvalidModulus(format!("eta({s}) = {es}")));
    }
    let t = 0.9 * (epsilon / 4.0).min(es).min(dr / 3.0);
    Ok(ParameterCascade { r, s, t })
}

/// Solves the BPB problem for one summand.
///
/// Given `a` with `||a|| = 1` and a unit `z` with `||a z|| > 1 - eta(s)`,
/// returns `(S, x)` with `||S|| = ||S x|| = ||x|| = 1`, `||S - a|| < s` and
/// `||x - z|| < s`.
pub trait ComponentOracle<R: Real>: Sync {
    /// BPB modulus valid for every summand this oracle accepts.
    fn eta(&self, s: f64) -> f64;
    fn correct(&self, space: &NormedSpace, a: &Matrix<R>, z: &[R], s: f64) -> Result<(Matrix<R>, Vec<R>)>;
}

/// Oracle for one-dimensional and euclidean summands with a Hilbert
/// codomain.
///
/// One-dimensional summands are solved exactly. On euclidean summands the
/// singular values above `1 - 0.9 s` are raised to 1 and `z` is projected onto
/// the span of the matching right singular vectors, which moves it by at most
/// `2 sqrt(eta / (0.9 s))`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HilbertOracle;

impl<R: Real> ComponentOracle<R> for HilbertOracle {
    fn eta(&self, s: f64) -> f64 {
        0.2 * s * s * s
    }

    fn correct(&self, space: &NormedSpace, a: &Matrix<R>, z: &[R], s: f64) -> Result<(Matrix<R>, Vec<R>)> {
        check_dim(space.dim(), z.len())?;
        check_dim(space.dim(), a.cols())?;
        if space.dim() == 1 {
            return Ok((a.clone(), z.to_vec()));
        }
        if !space.is_euclidean() {
            return Err(Error::Unsupported("summand is neither euclidean nor one-dimensional".into()));
        }
        let gamma: R = lit(0.9 * s);
        let svd = right_singular(a);
        let n = a.cols();
        let mut lift = Matrix::<R>::identity(n);
        let mut proj = vec![R::zero(); n];
        for (sigma, v) in svd.values.iter().zip(&svd.vectors) {
            if *sigma < R::one() - gamma.clone() || sigma.is_zero() {
                continue;
            }
            let boost = R::one() / sigma.clone() - R::one();
            for i in 0..n {
                for j in 0..n {
                    let cur = lift.get(i, j).clone();
                    lift.set(i, j, cur + boost.clone() * v[i].clone() * v[j].clone());
                }
            }
            let c = linalg::dot(v, z);
            for (p, vi) in proj.iter_mut().zip(v) {
                *p += c.clone() * vi.clone();
            }
        }
        let pn = linalg::norm2(&proj);
        if pn.is_zero() {
            return Err(Error::Hypothesis("vector is orthogonal to the top singular space".into()));
        }
        let x = linalg::scale(&proj, &(R::one() / pn));
        Ok((a.mul(&lift)?, x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpbInstance<R> {
    pub operator: Matrix<R>,
    pub x: Vec<R>,
    pub epsilon: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpbCorrection<R> {
    pub operator: Matrix<R>,
    pub u: Vec<R>,
    pub dist_op: R,
    pub dist_vec: R,
}

/// Output of [`correct_operator_l1sum`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1SumCorrection<R> {
    pub correction: BpbCorrection<R>,
    pub cascade: ParameterCascade,
    /// Summands on which `T` nearly attains its norm along `z0`.
    pub selected: Vec<usize>,
    /// Summand whose corrected value all others are rotated onto.
    pub anchor: usize,
    pub certificates: CertificateLog,
}

fn summands(domain: &NormedSpace) -> Result<Vec<NormedSpace>> {
    match domain.components() {
        Some((c, e)) if e.is_l1() => Ok(c.to_vec()),
        Some(_) => Err(Error::Unsupported("domain must be an l1-sum".into())),
        None => Ok(vec![domain.clone()]),
    }
}

fn check_sphere<R: Real>(what: &str, value: &R) -> Result<()> {
    if (value.clone() - R::one()).abs() > lit(TOL_SPHERE) {
        return Err(Error::Hypothesis(format!("{what} has norm {}", value.to_f64())));
    }
    Ok(())
}

pub fn correct_operator_l1sum<R: Real>(
    domain: &NormedSpace,
    h: &NormedSpace,
    t: &Matrix<R>,
    z0: &[R],
    epsilon: f64,
    oracle: &dyn ComponentOracle<R>,
) -> Result<L1SumCorrection<R>> {
    let parts = summands(domain)?;
    let ranges = domain.ranges();
    let cascade = cascade_l1sum(epsilon, |s| oracle.eta(s), h)?;
    check_dim(h.dim(), t.rows())?;
    check_dim(domain.dim(), t.cols())?;
    check_dim(domain.dim(), z0.len())?;
    check_sphere("operator", &operator_norm(domain, h, t)?.value)?;
    check_sphere("z0", &domain.norm(z0)?)?;
    let (r, s, tt): (R, R, R) = (lit(cascade.r), lit(cascade.s), lit(cascade.t));
    let tz = t.mul_vec(z0)?;
    let tz_norm = h.norm(&tz)?;
    // Compared as a deficit so that doubles do not round 1 - t^2 up to 1.
    if R::one() - tz_norm.clone() >= tt.square() {
        return Err(Error::Hypothesis(format!(
            "||T z0|| = 1 - {:e} is not above 1 - t^2 = 1 - {:e}",
            (R::one() - tz_norm).to_f64(),
            cascade.t * cascade.t
        )));
    }
    let y_star = linalg::scale(&tz, &(R::one() / tz_norm));
    let mut log = CertificateLog::new();

    let blocks: Vec<Matrix<R>> = ranges.iter().map(|rg| t.column_block(rg.start, rg.len())).collect();
    let pieces: Vec<Vec<R>> = ranges.iter().map(|rg| z0[rg.clone()].to_vec()).collect();
    let piece_norms: Vec<R> = parts.iter().zip(&pieces).map(|(c, p)| c.norm_unchecked(p)).collect();
    let selected: Vec<usize> = (0..parts.len())
        .filter(|&i| {
            let v = linalg::dot(&y_star, &blocks[i].mul_vec(&pieces[i]).expect("shapes agree"));
            v > (R::one() - tt.clone()) * piece_norms[i].clone()
        })
        .collect();
    if selected.is_empty() {
        return Err(Error::InternalInvariant("no summand carries the norm of T z0".into()));
    }
    let outside = (0..parts.len())
        .filter(|i| !selected.contains(i))
        .fold(R::zero(), |a, i| a + piece_norms[i].clone());
    log.check("sum-outside-selected", &outside, Relation::Le, &tt);

    let corrected: Vec<(usize, Matrix<R>, Vec<R>)> = selected
        .par_iter()
        .map(|&i| {
            let violation = |detail: String| Error::OracleViolation { component: i, detail };
            let ti_norm = operator_norm(&parts[i], h, &blocks[i])?.value;
            let a = blocks[i].scaled(&(R::one() / ti_norm));
            let zi = linalg::scale(&pieces[i], &(R::one() / piece_norms[i].clone()));
            let (si, xi) = oracle.correct(&parts[i], &a, &zi, cascade.s)?;
            let op_gap = operator_norm(&parts[i], h, &si.sub(&a))?.value;
            if op_gap >= s {
                return Err(violation(format!("||S - T/||T|||| = {:e}", op_gap.to_f64())));
            }
            let vec_gap = parts[i].norm(&linalg::sub(&xi, &zi))?;
            if vec_gap >= s {
                return Err(violation(format!("||x - z/||z|||| = {:e}", vec_gap.to_f64())));
            }
            let attained = h.norm(&si.mul_vec(&xi)?)?;
            let sn = operator_norm(&parts[i], h, &si)?.value;
            let xn = parts[i].norm(&xi)?;
            for (what, v) in [("||S x||", attained), ("||S||", sn), ("||x||", xn)] {
                if (v.clone() - R::one()).abs() > lit(TOL_SPHERE) {
                    return Err(violation(format!("{what} = {}", v.to_f64())));
                }
            }
            Ok((i, si, xi))
        })
        .collect::<Result<_>>()?;

    let anchor = selected[0];
    let y0 = corrected[0].1.mul_vec(&corrected[0].2)?;
    let mut out = t.clone();
    let b_mass = selected.iter().fold(R::zero(), |a, &i| a + piece_norms[i].clone());
    let mut x0 = vec![R::zero(); domain.dim()];
    let mut max_rotation = R::zero();
    for (i, si, xi) in &corrected {
        let yi = si.mul_vec(xi)?;
        let phi = align_isometry(&yi, &y0)?;
        max_rotation = max_rotation.max_of(phi.defect.clone());
        let phi = Matrix::from_rows(&phi.matrix)?;
        out.set_column_block(ranges[*i].start, &phi.mul(si)?);
        let w = piece_norms[*i].clone() / b_mass.clone();
        for (k, v) in ranges[*i].clone().zip(xi) {
            x0[k] = w.clone() * v.clone();
        }
    }
    log.check("rotation-defect", &max_rotation, Relation::Le, &r);

    let dist_op = operator_norm(domain, h, &out.sub(t))?.value;
    let dist_vec = domain.norm(&linalg::sub(&x0, z0))?;
    let chain = r.clone() + s.clone() + tt.clone();
    let eps: R = lit(epsilon);
    log.check("operator-distance", &dist_op, Relation::Le, &chain);
    log.check("operator-chain", &chain, Relation::Lt, &eps);
    let vec_chain = lit::<R>(2.0) * tt.clone() + s.clone();
    log.check("vector-distance", &dist_vec, Relation::Le, &vec_chain);
    log.check("vector-chain", &vec_chain, Relation::Lt, &eps);
    log.check_approx("attained-norm", &h.norm(&out.mul_vec(&x0)?)?, &R::one(), TOL_SPHERE);
    log.check_approx("operator-norm", &operator_norm(domain, h, &out)?.value, &R::one(), TOL_SPHERE);
    log.check_approx("unit-vector", &domain.norm(&x0)?, &R::one(), TOL_SPHERE);
    if let Some(bad) = log.failures().next() {
        return Err(Error::InternalInvariant(format!("certificate {} failed", bad.label)));
    }
    Ok(L1SumCorrection {
        correction: BpbCorrection {
            operator: out,
            u: x0,
            dist_op,
            dist_vec,
        },
        cascade,
        selected,
        anchor,
        certificates: log,
    })
}

/// Recomputes every property of a claimed correction.
pub fn verify_bpb_correction<R: Real>(
    domain: &NormedSpace,
    codomain: &NormedSpace,
    instance: &BpbInstance<R>,
    correction: &BpbCorrection<R>,
) -> Result<CertificateLog> {
    let mut log = CertificateLog::new();
    let one = R::one();
    let eps: R = lit(instance.epsilon);
    let s = &correction.operator;
    let u = &correction.u;
    log.check_approx("unit-vector", &domain.norm(u)?, &one, TOL_SPHERE);
    log.check_approx("attained-norm", &codomain.norm(&s.mul_vec(u)?)?, &one, TOL_SPHERE);
    log.check_approx("operator-norm", &operator_norm(domain, codomain, s)?.value, &one, TOL_SPHERE);
    let dist_op = operator_norm(domain, codomain, &s.sub(&instance.operator))?.value;
    let dist_vec = domain.norm(&linalg::sub(u, &instance.x))?;
    log.check("operator-distance", &dist_op, Relation::Lt, &eps);
    log.check("vector-distance", &dist_vec, Relation::Lt, &eps);
    log.check_approx("reported-operator-distance", &correction.dist_op, &dist_op, 1e-9);
    log.check_approx("reported-vector-distance", &correction.dist_vec, &dist_vec, 1e-9);
    Ok(log)
}

/// A random instance of the `l_1`-sum correction problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1SumInstance {
    pub domain: NormedSpace,
    pub codomain: NormedSpace,
    pub operator: Matrix<Hp>,
    pub z0: Vec<Hp>,
    pub epsilon: f64,
}

/// Builds an operator of norm one that attains its norm at a combination of
/// top singular vectors of a random subset of euclidean summands, then moves
/// the attaining point by `l_1` mass `0.4 t^2` so that the hypothesis
/// `||T z0|| > 1 - t^2` still holds.
pub fn random_l1sum_instance(seed: u64, dims: &[usize], h_dim: usize, epsilon: f64) -> Result<L1SumInstance> {
    if dims.is_empty() || dims.contains(&0) || h_dim == 0 {
        return Err(Error::Config("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = NormedSpace::euclidean(h_dim)?;
    let parts: Vec<NormedSpace> = dims.iter().map(|&d| NormedSpace::euclidean(d)).collect::<Result<_>>()?;
    let domain = NormedSpace::l1_sum(parts)?;
    let cascade = cascade_l1sum(epsilon, |s| <HilbertOracle as ComponentOracle<Hp>>::eta(&HilbertOracle, s), &h)?;
    let gauss = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Hp> { (0..n).map(|_| Hp::new(rng.sample(StandardNormal))).collect() };
    let unit = |v: Vec<Hp>| {
        let n = linalg::norm2(&v);
        linalg::scale(&v, &(<Hp as Real>::one() / n))
    };
    let y0 = unit(gauss(&mut rng, h_dim));
    let mut chosen: Vec<bool> = dims.iter().map(|_| rng.random_bool(0.5)).collect();
    if !chosen.iter().any(|&c| c) {
        let k = rng.random_range(0..dims.len());
        chosen[k] = true;
    }
    let mut t = Matrix::<Hp>::zeros(h_dim, domain.dim());
    let mut z0 = vec![<Hp as Real>::zero(); domain.dim()];
    let weights: Vec<f64> = chosen.iter().map(|&c| if c { rng.random_range(0.2..1.0) } else { 0.0 }).collect();
    let wsum: f64 = weights.iter().sum();
    for (k, (rg, &d)) in domain.ranges().into_iter().zip(dims).enumerate() {
        let g = Matrix::from_row_major(h_dim, d, gauss(&mut rng, h_dim * d))?;
        let svd = right_singular(&g);
        let sigma = svd.values[0].clone();
        let block = if chosen[k] {
            let v = svd.vectors[0].clone();
            let top = linalg::scale(&g.mul_vec(&v)?, &(<Hp as Real>::one() / sigma.clone()));
            let phi = align_isometry(&top, &y0)?;
            let rotated = Matrix::from_rows(&phi.matrix)?.mul(&g)?;
            let w = Hp::new(weights[k] / wsum);
            for (i, vi) in rg.clone().zip(&v) {
                z0[i] = w.clone() * vi.clone();
            }
            rotated.scaled(&(<Hp as Real>::one() / sigma))
        } else {
            g.scaled(&(Hp::new(rng.random_range(0.3..0.95)) / sigma))
        };
        t.set_column_block(rg.start, &block);
    }
    let mass = Hp::new(0.4 * cascade.t * cascade.t);
    let noise = gauss(&mut rng, domain.dim());
    let noise_l1 = noise.iter().fold(<Hp as Real>::zero(), |a, v| a + v.abs());
    let perturbed: Vec<Hp> = z0
        .iter()
        .zip(&noise)
        .map(|(z, e)| z.clone() + e.clone() * mass.clone() / noise_l1.clone())
        .collect();
    let pn = domain.norm(&perturbed)?;
    let z0 = linalg::scale(&perturbed, &(<Hp as Real>::one() / pn));
    // Normalize away the residual of the singular value computation.
    let tn = operator_norm(&domain, &h, &t)?.value;
    let t = t.scaled(&(<Hp as Real>::one() / tn));
    Ok(L1SumInstance {
        domain,
        codomain: h,
        operator: t,
        z0,
        epsilon,
    })
}

impl L1SumInstance {
    pub fn correct(&self) -> Result<L1SumCorrection<Hp>> {
        correct_operator_l1sum(&self.domain, &self.codomain, &self.operator, &self.z0, self.epsilon, &HilbertOracle)
    }

    pub fn as_bpb(&self, eta: f64) -> BpbInstance<Hp> {
        BpbInstance {
            operator: self.operator.clone(),
            x: self.z0.clone(),
            epsilon: self.epsilon,
            eta,
        }
    }
}
