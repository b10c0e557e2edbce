//! Finite-dimensional normed spaces and the norm, dual-norm, norming and
//! operator-norm oracles built on them.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::absolute::{AbsoluteNorm2, Exponent};
use crate::error::{check_dim, Error, Result};
use crate::lattice::FiniteLattice;
use crate::linalg::{self, Matrix};
use crate::lp::{self, dual_exponent, is_inf, lp_norm};
use crate::real::{cmp_real, lit, Real};

#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    Euclidean,
    Lp(f64),
    Absolute2(AbsoluteNorm2),
    Lattice(FiniteLattice),
    /// Components combined through a lattice norm on their norms.
    DirectSum {
        components: Vec<NormedSpace>,
        combining: FiniteLattice,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDoc", into = "SpaceDoc")]
pub struct NormedSpace {
    dim: usize,
    kind: NormKind,
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    kind: String,
    dim: usize,
    #[serde(default, skip_serializing_if = "Params::is_empty")]
    params: Params,
}

#[derive(Serialize, Deserialize, Default)]
struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<Exponent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generator: Option<AbsoluteNorm2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lattice: Option<FiniteLattice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    components: Option<Vec<NormedSpace>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    combining: Option<FiniteLattice>,
}

impl Params {
    fn is_empty(&self) -> bool {
        self.p.is_none()
            && self.generator.is_none()
            && self.lattice.is_none()
            && self.components.is_none()
            && self.combining.is_none()
    }
}

fn missing(what: &str) -> Error {
    Error::Config(format!("missing parameter {what:?}"))
}

impl TryFrom<SpaceDoc> for NormedSpace {
    type Error = Error;
    fn try_from(doc: SpaceDoc) -> Result<Self> {
        let params = doc.params;
        let space = match doc.kind.as_str() {
            "euclidean" => NormedSpace::euclidean(doc.dim)?,
            "lp" => NormedSpace::lp(doc.dim, params.p.ok_or_else(|| missing("p"))?.to_p()?)?,
            "absolute2" => NormedSpace::absolute2(params.generator.ok_or_else(|| missing("generator"))?),
            "lattice" => NormedSpace::lattice(params.lattice.ok_or_else(|| missing("lattice"))?),
            "direct_sum" => NormedSpace::direct_sum(
                params.components.ok_or_else(|| missing("components"))?,
                params.combining.ok_or_else(|| missing("combining"))?,
            )?,
            other => return Err(Error::Config(format!("unknown space kind {other:?}"))),
        };
        if space.dim != doc.dim {
            return Err(Error::Dimension {
                expected: space.dim,
                found: doc.dim,
            });
        }
        Ok(space)
    }
}

impl From<NormedSpace> for SpaceDoc {
    fn from(s: NormedSpace) -> Self {
        let mut params = Params::default();
        let kind = match s.kind {
            NormKind::Euclidean => "euclidean",
            NormKind::Lp(p) => {
                params.p = Some(Exponent::from_p(p));
                "lp"
            }
            NormKind::Absolute2(g) => {
                params.generator = Some(g);
                "absolute2"
            }
            NormKind::Lattice(e) => {
                params.lattice = Some(e);
                "lattice"
            }
            NormKind::DirectSum {
                components,
                combining,
            } => {
                params.components = Some(components);
                params.combining = Some(combining);
                "direct_sum"
            }
        };
        SpaceDoc {
            kind: kind.into(),
            dim: s.dim,
            params,
        }
    }
}

/// Operator norm with a flag telling whether it was computed exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorNorm<R> {
    pub value: R,
    pub exact: bool,
    /// Unit vector attaining `value` when the norm is only a lower bound.
    pub witness: Option<Vec<R>>,
}

impl NormedSpace {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::positive(dim)?;
        Ok(Self {
            dim,
            kind: NormKind::Euclidean,
        })
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        Self::positive(dim)?;
        if !(p >= 1.0) {
            return Err(Error::Config(format!("exponent must be >= 1, got {p}")));
        }
        Ok(Self {
            dim,
            kind: NormKind::Lp(p),
        })
    }

    pub fn absolute2(generator: AbsoluteNorm2) -> Self {
        Self {
            dim: 2,
            kind: NormKind::Absolute2(generator),
        }
    }

    pub fn lattice(e: FiniteLattice) -> Self {
        Self {
            dim: e.dim(),
            kind: NormKind::Lattice(e),
        }
    }

    pub fn direct_sum(components: Vec<NormedSpace>, combining: FiniteLattice) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("a direct sum needs at least one component".into()));
        }
        check_dim(combining.dim(), components.len())?;
        let dim = components.iter().map(|c| c.dim).sum();
        Ok(Self {
            dim,
            kind: NormKind::DirectSum {
                components,
                combining,
            },
        })
    }

    /// `M (+)_f N` for an absolute normalized norm on the plane.
    pub fn absolute_sum(m: NormedSpace, n: NormedSpace, f: AbsoluteNorm2) -> Self {
        Self::direct_sum(vec![m, n], FiniteLattice::Absolute(f)).expect("two components")
    }

    pub fn l1_sum(components: Vec<NormedSpace>) -> Result<Self> {
        let k = components.len();
        Self::direct_sum(components, FiniteLattice::lp(1.0, k.max(1))?)
    }

    fn positive(dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::Config("dimension must be positive".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn components(&self) -> Option<(&[NormedSpace], &FiniteLattice)> {
        match &self.kind {
            NormKind::DirectSum {
                components,
                combining,
            } => Some((components, combining)),
            _ => None,
        }
    }

    /// Coordinate ranges of the summands; a single range for other kinds.
    pub fn ranges(&self) -> Vec<Range<usize>> {
        match &self.kind {
            NormKind::DirectSum { components, .. } => {
                let mut start = 0;
                components
                    .iter()
                    .map(|c| {
                        let r = start..start + c.dim;
                        start += c.dim;
                        r
                    })
                    .collect()
            }
            _ => vec![0..self.dim],
        }
    }

    pub fn is_euclidean(&self) -> bool {
        match &self.kind {
            NormKind::Euclidean => true,
            NormKind::Lp(p) => *p == 2.0,
            _ => false,
        }
    }

    /// Exponent `p` for euclidean and `l_p` kinds.
    pub fn lp_exponent(&self) -> Option<f64> {
        match &self.kind {
            NormKind::Euclidean => Some(2.0),
            NormKind::Lp(p) => Some(*p),
            NormKind::Lattice(FiniteLattice::Lp { p, .. }) => Some(*p),
            _ => None,
        }
    }

    pub fn is_uniformly_convex(&self) -> bool {
        matches!(self.lp_exponent(), Some(p) if p > 1.0 && !is_inf(p)) || self.dim == 1
    }

    pub fn norm<R: Real>(&self, x: &[R]) -> Result<R> {
        check_dim(self.dim, x.len())?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked<R: Real>(&self, x: &[R]) -> R {
        match &self.kind {
            NormKind::Euclidean => linalg::norm2(x),
            NormKind::Lp(p) => lp_norm(x, *p),
            NormKind::Absolute2(g) => g.norm(x),
            NormKind::Lattice(e) => e.norm(x),
            NormKind::DirectSum { combining, .. } => combining.norm(&self.component_norms(x)),
        }
    }

    /// Norms of the summands of `x` (a single entry for other kinds).
    pub fn component_norms<R: Real>(&self, x: &[R]) -> Vec<R> {
        match &self.kind {
            NormKind::DirectSum { components, .. } => components
                .iter()
                .zip(self.ranges())
                .map(|(c, r)| c.norm_unchecked(&x[r]))
                .collect(),
            _ => vec![self.norm_unchecked(x)],
        }
    }

    pub fn dual_norm<R: Real>(&self, f: &[R]) -> Result<R> {
        check_dim(self.dim, f.len())?;
        Ok(self.dual_norm_unchecked(f))
    }

    fn dual_norm_unchecked<R: Real>(&self, f: &[R]) -> R {
        match &self.kind {
            NormKind::Euclidean => linalg::norm2(f),
            NormKind::Lp(p) => lp_norm(f, dual_exponent(*p)),
            NormKind::Absolute2(g) => g.dual_norm(f),
            NormKind::Lattice(e) => e.kothe_dual_norm(f),
            NormKind::DirectSum {
                components,
                combining,
            } => {
                let duals: Vec<R> = components
                    .iter()
                    .zip(self.ranges())
                    .map(|(c, r)| c.dual_norm_unchecked(&f[r]))
                    .collect();
                combining.kothe_dual_norm(&duals)
            }
        }
    }

    /// Norm-one functional `f` with `f(x) = ||x||`.
    pub fn norming<R: Real>(&self, x: &[R]) -> Result<Vec<R>> {
        check_dim(self.dim, x.len())?;
        match &self.kind {
            NormKind::Euclidean => {
                let n = linalg::norm2(x);
                if n.is_zero() {
                    return Err(Error::DegenerateInput("norming functional of the zero vector".into()));
                }
                Ok(linalg::scale(x, &(R::one() / n)))
            }
            NormKind::Lp(p) => lp::lp_norming(x, *p),
            NormKind::Absolute2(g) => g.norming(x),
            NormKind::Lattice(e) => e.norming(x),
            NormKind::DirectSum {
                components,
                combining,
            } => {
                let norms = self.component_norms(x);
                let e_star = combining.norming(&norms)?;
                let mut f = Vec::with_capacity(self.dim);
                for ((c, r), weight) in components.iter().zip(self.ranges()).zip(e_star) {
                    let block = &x[r];
                    let g = if c.norm_unchecked(block).is_zero() {
                        c.norming(&c.canonical_unit::<R>())?
                    } else {
                        c.norming(block)?
                    };
                    f.extend(g.into_iter().map(|v| v * weight.clone()));
                }
                Ok(f)
            }
        }
    }

    /// First basis direction scaled to norm one.
    pub fn canonical_unit<R: Real>(&self) -> Vec<R> {
        let mut e = vec![R::zero(); self.dim];
        e[0] = R::one();
        let n = self.norm_unchecked(&e);
        e[0] = R::one() / n;
        e
    }

    /// A point of the face `{z : ||z|| = 1, f(z) = 1}` of a norm-one
    /// functional `f` close to `x`. For every kind except direct sums this is
    /// the nearest point of the face; on direct sums the lattice-level face
    /// point is combined with the nearest component face points.
    pub fn face_point<R: Real>(&self, f: &[R], x: &[R]) -> Result<Vec<R>> {
        check_dim(self.dim, f.len())?;
        check_dim(self.dim, x.len())?;
        match &self.kind {
            NormKind::Euclidean => Ok(linalg::scale(f, &(R::one() / linalg::norm2(f)))),
            NormKind::Lp(p) => lp::lp_face_project(f, x, *p),
            NormKind::Absolute2(g) => g.face_project(f, x),
            NormKind::Lattice(e) => e.face_project(f, x),
            NormKind::DirectSum {
                components,
                combining,
            } => {
                let ranges = self.ranges();
                let duals: Vec<R> = components
                    .iter()
                    .zip(&ranges)
                    .map(|(c, r)| c.dual_norm_unchecked(&f[r.clone()]))
                    .collect();
                let norms = self.component_norms(x);
                let t: Vec<R> = combining.face_project(&duals, &norms)?;
                let mut z = Vec::with_capacity(self.dim);
                for (k, (c, r)) in components.iter().zip(&ranges).enumerate() {
                    let block = &x[r.clone()];
                    let dir = if duals[k].is_zero() {
                        if norms[k].is_zero() {
                            c.canonical_unit()
                        } else {
                            linalg::scale(block, &(R::one() / norms[k].clone()))
                        }
                    } else {
                        let fk = linalg::scale(&f[r.clone()], &(R::one() / duals[k].clone()));
                        let xk = if norms[k].is_zero() {
                            c.canonical_unit()
                        } else {
                            linalg::scale(block, &(R::one() / norms[k].clone()))
                        };
                        c.face_point(&fk, &xk)?
                    };
                    // Face points of a positive dual element have a
                    // nonnegative norm profile; signs carry no information.
                    z.extend(dir.into_iter().map(|v| v * t[k].abs()));
                }
                Ok(z)
            }
        }
    }

    /// Embeds a vector of summand `k` into the sum.
    pub fn embed<R: Real>(&self, k: usize, v: &[R]) -> Result<Vec<R>> {
        let ranges = self.ranges();
        let r = ranges.get(k).ok_or_else(|| Error::Range(format!("no component {k}")))?;
        check_dim(r.len(), v.len())?;
        let mut x = vec![R::zero(); self.dim];
        for (i, val) in r.clone().zip(v) {
            x[i] = val.clone();
        }
        Ok(x)
    }

    pub fn is_unit<R: Real>(&self, x: &[R]) -> Result<bool> {
        Ok((self.norm(x)? - R::one()).abs() <= lit(crate::TOL_SPHERE))
    }
}

/// Norm of `T : domain -> codomain`.
///
/// Exact when the domain is an `l_1` space or an `l_1`-sum with exactly
/// computable blocks, when both spaces are euclidean, or when the codomain is
/// `l_inf`; otherwise a lower bound from dual power iterations started at the
/// basis vectors.
pub fn operator_norm<R: Real>(
    domain: &NormedSpace,
    codomain: &NormedSpace,
    t: &Matrix<R>,
) -> Result<OperatorNorm<R>> {
    check_dim(codomain.dim(), t.rows())?;
    check_dim(domain.dim(), t.cols())?;
    let exact = |value: R| {
        Ok(OperatorNorm {
            value,
            exact: true,
            witness: None,
        })
    };
    if domain.lp_exponent() == Some(1.0) || domain.dim() == 1 {
        let scale = domain.norm_unchecked(&{
            let mut e = vec![R::zero(); domain.dim()];
            e[0] = R::one();
            e
        });
        let m = (0..t.cols())
            .map(|j| codomain.norm_unchecked(&t.column(j)))
            .fold(R::zero(), R::max_of);
        return exact(m / scale);
    }
    if let Some((components, combining)) = domain.components() {
        if combining.is_l1() {
            let mut best = R::zero();
            let mut all_exact = true;
            for (c, r) in components.iter().zip(domain.ranges()) {
                let block = t.column_block(r.start, r.len());
                let b = operator_norm(c, codomain, &block)?;
                all_exact &= b.exact;
                best = best.max_of(b.value);
            }
            if all_exact {
                return exact(best);
            }
        }
    }
    if domain.is_euclidean() && codomain.is_euclidean() {
        return exact(linalg::spectral_norm(t));
    }
    if codomain.lp_exponent().is_some_and(is_inf) {
        let m = t
            .to_rows()
            .iter()
            .map(|row| domain.dual_norm_unchecked(row))
            .fold(R::zero(), R::max_of);
        return exact(m);
    }
    power_iteration_bound(domain, codomain, t)
}

fn power_iteration_bound<R: Real>(
    domain: &NormedSpace,
    codomain: &NormedSpace,
    t: &Matrix<R>,
) -> Result<OperatorNorm<R>> {
    let tt = t.transpose();
    let mut best: Option<(R, Vec<R>)> = None;
    let n = domain.dim();
    let starts: Vec<Vec<R>> = (0..n)
        .map(|j| {
            let mut e = vec![R::zero(); n];
            e[j] = R::one();
            e
        })
        .chain(std::iter::once(vec![R::one(); n]))
        .collect();
    for start in starts {
        let mut x = linalg::scale(&start, &(R::one() / domain.norm_unchecked(&start)));
        let mut value = codomain.norm_unchecked(&t.mul_vec(&x)?);
        for _ in 0..200 {
            let y = t.mul_vec(&x)?;
            if codomain.norm_unchecked(&y).is_zero() {
                break;
            }
            let g = codomain.norming(&y)?;
            let h = tt.mul_vec(&g)?;
            let hn = domain.dual_norm_unchecked(&h);
            if hn.is_zero() {
                break;
            }
            let h1 = linalg::scale(&h, &(R::one() / hn));
            let next = domain.face_point(&h1, &x)?;
            let next_value = codomain.norm_unchecked(&t.mul_vec(&next)?);
            if next_value <= value.clone() {
                break;
            }
            value = next_value;
            x = next;
        }
        if best.as_ref().is_none_or(|(b, _)| cmp_real(&value, b).is_gt()) {
            best = Some((value, x));
        }
    }
    let (value, x) = best.expect("at least one start");
    Ok(OperatorNorm {
        value,
        exact: false,
        witness: Some(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plane() -> NormedSpace {
        NormedSpace::euclidean(2).unwrap()
    }

    #[test]
    fn norm_examples() {
        assert_eq!(NormedSpace::lp(2, 2.0).unwrap().norm(&[3.0, 4.0]).unwrap(), 5.0);
        let line = NormedSpace::lp(1, 1.0).unwrap();
        let s = NormedSpace::l1_sum(vec![line.clone(), line]).unwrap();
        assert_eq!(s.norm(&[1.0, 2.0]).unwrap(), 3.0);
        let linf = NormedSpace::absolute2(AbsoluteNorm2::lp(f64::INFINITY));
        assert_eq!(linf.norm(&[0.5, 1.0]).unwrap(), 1.0);
        assert!(matches!(plane().norm(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn dual_norm_examples() {
        let l1 = NormedSpace::lp(3, 1.0).unwrap();
        assert_eq!(l1.dual_norm(&[1.0, -2.0, 3.0]).unwrap(), 3.0);
        assert_eq!(NormedSpace::lp(2, 2.0).unwrap().dual_norm(&[3.0, 4.0]).unwrap(), 5.0);
        let a = NormedSpace::absolute2(AbsoluteNorm2::lp(1.0));
        assert_eq!(a.dual_norm(&[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn norming_examples() {
        let f = plane().norming(&[0.6, 0.8]).unwrap();
        assert!((f[0] - 0.6).abs() < 1e-15 && (f[1] - 0.8).abs() < 1e-15);
        assert_eq!(NormedSpace::lp(2, 1.0).unwrap().norming(&[-2.0, 1.0]).unwrap(), vec![-1.0, 1.0]);
        let l3 = NormedSpace::lp(2, 3.0).unwrap();
        let f = l3.norming(&[1.0, 1.0]).unwrap();
        assert!((f[0] * 1.0 + f[1] * 1.0 - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!((l3.dual_norm(&f).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(plane().norming(&[0.0, 0.0]), Err(Error::DegenerateInput(_))));
    }

    fn sample_spaces() -> Vec<NormedSpace> {
        vec![
            NormedSpace::lp(3, 1.0).unwrap(),
            NormedSpace::lp(3, 4.0).unwrap(),
            NormedSpace::lp(3, f64::INFINITY).unwrap(),
            NormedSpace::absolute_sum(plane(), NormedSpace::lp(2, 3.0).unwrap(), AbsoluteNorm2::lp(1.0)),
            NormedSpace::direct_sum(
                vec![plane(), NormedSpace::euclidean(1).unwrap(), plane()],
                FiniteLattice::lp(3.0, 3).unwrap(),
            )
            .unwrap(),
            NormedSpace::lattice(FiniteLattice::weighted_lp(2.0, vec![1.0, 2.0]).unwrap()),
        ]
    }

    #[test]
    fn norming_functionals_attain_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for s in sample_spaces() {
            for _ in 0..500 {
                let x: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let f = s.norming(&x).unwrap();
                let fx = linalg::dot(&f, &x);
                let n = s.norm(&x).unwrap();
                assert!((fx - n).abs() <= 1e-9 * n.max(1.0));
                assert!((s.dual_norm(&f).unwrap() - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn norm_axioms_on_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in sample_spaces() {
            for _ in 0..500 {
                let x: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let y: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
                let lam: f64 = rng.random_range(-3.0..3.0);
                let nx = s.norm(&x).unwrap();
                assert!(nx > 0.0);
                let scaled = s.norm(&linalg::scale(&x, &lam)).unwrap();
                assert!((scaled - lam.abs() * nx).abs() <= 1e-12 * nx.max(1.0) * 4.0);
                let sum = s.norm(&linalg::add(&x, &y)).unwrap();
                assert!(sum <= nx + s.norm(&y).unwrap() + 1e-12);
            }
        }
    }

    #[test]
    fn face_points_lie_on_face() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in sample_spaces() {
            for _ in 0..200 {
                let x: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                let f = s.norming(&x).unwrap();
                let z = s.face_point(&f, &x).unwrap();
                assert!((s.norm(&z).unwrap() - 1.0).abs() < 1e-12);
                assert!((linalg::dot(&f, &z) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_norm_examples() {
        let dom = NormedSpace::lp(3, 1.0).unwrap();
        let cod = NormedSpace::lp(1, 2.0).unwrap();
        let t = Matrix::from_rows(&[vec![0.5, -2.0, 1.0]]).unwrap();
        let n = operator_norm(&dom, &cod, &t).unwrap();
        assert!(n.exact && n.value == 2.0);
        let d = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let n = operator_norm(&plane(), &plane(), &d).unwrap();
        assert!(n.exact && (n.value - 3.0).abs() < 1e-14);
    }

    /// Brute force over the extreme points of an l_1-sum of planes: unit
    /// vectors supported on one block, sampled densely on each circle.
    #[test]
    fn l1_sum_of_planes_uses_block_spectral_norms() {
        let dom = NormedSpace::l1_sum(vec![plane(), plane()]).unwrap();
        let t = Matrix::from_rows(&[vec![1.0, 1.0, 0.2, 0.0], vec![0.0, 1.0, 0.0, 0.9]]).unwrap();
        let n = operator_norm(&dom, &plane(), &t).unwrap();
        assert!(n.exact);
        let mut brute: f64 = 0.0;
        for block in 0..2 {
            for k in 0..100_000 {
                let th = k as f64 * std::f64::consts::TAU / 100_000.0;
                let mut x = vec![0.0; 4];
                x[2 * block] = th.cos();
                x[2 * block + 1] = th.sin();
                brute = brute.max(linalg::norm2(&t.mul_vec(&x).unwrap()));
            }
        }
        assert!((n.value - brute).abs() < 1e-8, "{} {}", n.value, brute);
        let columns = (0..4).map(|j| linalg::norm2(&t.column(j))).fold(0.0, f64::max);
        assert!(n.value > columns + 0.1);
    }

    #[test]
    fn l1_domain_matches_signed_basis_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dom = NormedSpace::lp(4, 1.0).unwrap();
        let cod = NormedSpace::lp(3, 3.0).unwrap();
        for _ in 0..100 {
            let rows: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let t = Matrix::from_rows(&rows).unwrap();
            let n = operator_norm(&dom, &cod, &t).unwrap();
            let mut brute: f64 = 0.0;
            for j in 0..4 {
                for sign in [-1.0, 1.0] {
                    let mut e = vec![0.0; 4];
                    e[j] = sign;
                    brute = brute.max(cod.norm(&t.mul_vec(&e).unwrap()).unwrap());
                }
            }
            assert!((n.value - brute).abs() <= 1e-12);
        }
    }

    #[test]
    fn nonexact_bound_is_certified_lower_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let dom = NormedSpace::lp(3, 3.0).unwrap();
        let cod = NormedSpace::lp(2, 1.5).unwrap();
        let rows: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let t = Matrix::from_rows(&rows).unwrap();
        let n = operator_norm(&dom, &cod, &t).unwrap();
        assert!(!n.exact);
        let w = n.witness.clone().unwrap();
        assert!((dom.norm(&w).unwrap() - 1.0).abs() < 1e-12);
        assert!((cod.norm(&t.mul_vec(&w).unwrap()).unwrap() - n.value).abs() < 1e-12);
        for _ in 0..20_000 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = cod.norm(&t.mul_vec(&x).unwrap()).unwrap() / dom.norm(&x).unwrap();
            assert!(r <= n.value + 1e-6, "ascent missed a larger ratio {r} > {}", n.value);
        }
    }

    #[test]
    fn json_round_trip() {
        for s in sample_spaces() {
            let text = serde_json::to_string(&s).unwrap();
            let back: NormedSpace = serde_json::from_str(&text).unwrap();
            assert_eq!(back, s);
            assert_eq!(serde_json::to_string(&back).unwrap(), text);
        }
        let s: NormedSpace = serde_json::from_str(r#"{"kind":"lp","dim":3,"params":{"p":2.0}}"#).unwrap();
        assert_eq!(s, NormedSpace::lp(3, 2.0).unwrap());
        assert!(serde_json::from_str::<NormedSpace>(r#"{"kind":"lp","dim":3}"#).is_err());
    }
}
