//! Absolute normalized norms on the plane.
//!
//! A norm is described by its generator `f(a, b)` on the closed positive
//! quadrant; the norm of `(r, s)` is `f(|r|, |s|)`. Two kinds of generators are
//! supported: closed-form `l_p` (`1 <= p <= inf`) and tables of samples
//! `(a, b, f(a, b))` interpolated piecewise linearly along the simplex
//! `a + b = 1`. Table generators and `p in {1, inf}` have polygonal unit balls
//! and are handled exactly through their vertices and edge normals.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, dual_exponent, is_inf, lp_norm};
use crate::real::{lit, Real};
use crate::TOL_SPHERE;

#[derive(Debug, Clone, PartialEq)]
pub enum Generator {
    Lp(f64),
    /// Raw `[a, b, f(a, b)]` samples.
    Table(Vec<[f64; 3]>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
pub(crate) enum Exponent {
    Num(f64),
    Named(String),
}

impl Exponent {
    pub(crate) fn from_p(p: f64) -> Self {
        if is_inf(p) {
            Exponent::Named("inf".into())
        } else {
            Exponent::Num(p)
        }
    }

    pub(crate) fn to_p(&self) -> Result<f64> {
        let p = match self {
            Exponent::Num(p) => *p,
            Exponent::Named(s) if matches!(s.as_str(), "inf" | "infinity") => f64::INFINITY,
            Exponent::Named(s) => return Err(Error::Config(format!("bad exponent {s:?}"))),
        };
        if !(p >= 1.0) {
            return Err(Error::Config(format!("exponent must be >= 1, got {p}")));
        }
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum GeneratorDoc {
    Lp { p: Exponent },
    Table { samples: Vec<[f64; 3]> },
}

/// Absolute normalized norm on `R^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorDoc", into = "GeneratorDoc")]
pub struct AbsoluteNorm2 {
    generator: Generator,
    /// Knots `(t, g(t))` of `g(t) = f(t, 1 - t)`, sorted by `t`, for polygonal
    /// generators.
    knots: Option<Vec<(f64, f64)>>,
}

impl TryFrom<GeneratorDoc> for AbsoluteNorm2 {
    type Error = Error;
    fn try_from(doc: GeneratorDoc) -> Result<Self> {
        match doc {
            GeneratorDoc::Lp { p } => Ok(AbsoluteNorm2::lp(p.to_p()?)),
            GeneratorDoc::Table { samples } => AbsoluteNorm2::table(samples),
        }
    }
}

impl From<AbsoluteNorm2> for GeneratorDoc {
    fn from(n: AbsoluteNorm2) -> Self {
        match n.generator {
            Generator::Lp(p) => GeneratorDoc::Lp {
                p: Exponent::from_p(p),
            },
            Generator::Table(samples) => GeneratorDoc::Table { samples },
        }
    }
}

/// Outcome of [`AbsoluteNorm2::validate`] when a property fails.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub property: &'static str,
    pub points: Vec<[f64; 2]>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormCertificate {
    pub grid_resolution: usize,
    pub checks: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    /// Complete `(r, s)` to a sphere point of the form `(t, 1)`.
    SecondCoord,
    /// Complete `(r, s)` to a sphere point of the form `(1, t)`.
    FirstCoord,
}

impl AbsoluteNorm2 {
    pub fn lp(p: f64) -> Self {
        let knots = if p == 1.0 {
            Some(vec![(0.0, 1.0), (1.0, 1.0)])
        } else if is_inf(p) {
            Some(vec![(0.0, 1.0), (0.5, 0.5), (1.0, 1.0)])
        } else {
            None
        };
        Self {
            generator: Generator::Lp(p),
            knots,
        }
    }

    /// Generator given by samples `[a, b, f(a, b)]`; samples are projected
    /// onto the simplex by homogeneity and must cover both axes.
    pub fn table(samples: Vec<[f64; 3]>) -> Result<Self> {
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
        for &[a, b, f] in &samples {
            if a < 0.0 || b < 0.0 || a + b <= 0.0 || !f.is_finite() {
                return Err(Error::NotANorm(format!(
                    "table sample ({a}, {b}, {f}) outside the open positive quadrant"
                )));
            }
            let s = a + b;
            knots.push((a / s, f / s));
        }
        knots.sort_by(|x, y| x.0.total_cmp(&y.0));
        knots.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-15);
        if knots.len() < 2 || knots[0].0 != 0.0 || knots[knots.len() - 1].0 != 1.0 {
            return Err(Error::NotANorm(
                "table generator must contain samples on both axes".into(),
            ));
        }
        Ok(Self {
            generator: Generator::Table(samples),
            knots: Some(knots),
        })
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn is_polygonal(&self) -> bool {
        self.knots.is_some()
    }

    /// `p` when the generator is a closed-form `l_p` norm.
    pub fn exponent(&self) -> Option<f64> {
        match self.generator {
            Generator::Lp(p) => Some(p),
            Generator::Table(_) => None,
        }
    }

    /// Generator `f(a, b)` for `a, b >= 0`.
    pub fn eval<R: Real>(&self, a: &R, b: &R) -> R {
        match (&self.generator, &self.knots) {
            (Generator::Lp(p), None) => lp_norm(&[a.clone(), b.clone()], *p),
            (_, Some(knots)) => {
                let s = a.clone() + b.clone();
                if s.is_zero() {
                    return R::zero();
                }
                let tau = a.clone() / s.clone();
                s * interp(knots, &tau)
            }
            (Generator::Table(_), None) => unreachable!("tables always carry knots"),
        }
    }

    /// Norm of an arbitrary point of the plane.
    pub fn norm<R: Real>(&self, x: &[R]) -> R {
        self.eval(&x[0].abs(), &x[1].abs())
    }

    pub fn dual_norm<R: Real>(&self, f: &[R]) -> R {
        let (a, b) = (f[0].abs(), f[1].abs());
        match &self.knots {
            None => lp_norm(&[a, b], dual_exponent(self.exponent().expect("smooth is lp"))),
            Some(knots) => knots
                .iter()
                .map(|&(t, g)| (a.clone() * lit(t) + b.clone() * lit(1.0 - t)) / lit(g))
                .fold(R::zero(), R::max_of),
        }
    }

    /// Norm-one functional attaining its norm at `x`; ties between extreme
    /// points of the dual face go to the lexicographically largest one.
    pub fn norming<R: Real>(&self, x: &[R]) -> Result<Vec<R>> {
        let Some(knots) = &self.knots else {
            return lp::lp_norming(x, self.exponent().expect("smooth is lp"));
        };
        let (a, b) = (x[0].abs(), x[1].abs());
        let s = a.clone() + b.clone();
        if s.is_zero() {
            return Err(Error::DegenerateInput("norming functional of the zero vector".into()));
        }
        let tau = a / s;
        let grads = edge_normals::<R>(knots);
        let tol = lp::tie_tol::<R>() * lit(1024.0);
        let mut candidates: Vec<[R; 2]> = Vec::new();
        for (i, &(t, _)) in knots.iter().enumerate() {
            if (tau.clone() - lit(t)).abs() <= tol {
                if i > 0 {
                    candidates.push(grads[i - 1].clone());
                }
                if i + 1 < knots.len() {
                    candidates.push(grads[i].clone());
                }
                // Mirror images across the axes meet the quadrant's own
                // normals at the axis vertices.
                if i == 0 {
                    let [c1, c0] = grads[0].clone();
                    candidates.push([-c1, c0]);
                }
                if i + 1 == knots.len() {
                    let [c1, c0] = grads[i - 1].clone();
                    candidates.push([c1, -c0]);
                }
            }
        }
        if candidates.is_empty() {
            let seg = (0..knots.len() - 1)
                .find(|&i| tau <= lit(knots[i + 1].0))
                .unwrap_or(knots.len() - 2);
            candidates.push(grads[seg].clone());
        }
        let sx = x[0].signum_or_one();
        let sy = x[1].signum_or_one();
        let signed = candidates
            .into_iter()
            .map(|[c1, c0]| [sx.clone() * c1, sy.clone() * c0]);
        Ok(signed
            .max_by(|u, v| {
                crate::real::cmp_real(&u[0], &v[0]).then(crate::real::cmp_real(&u[1], &v[1]))
            })
            .expect("nonempty")
            .to_vec())
    }

    /// Nearest point to `x` (in this norm) on the face of the unit sphere where
    /// the norm-one functional `f` equals 1.
    pub fn face_project<R: Real>(&self, f: &[R], x: &[R]) -> Result<Vec<R>> {
        let Some(knots) = &self.knots else {
            return lp::lp_face_project(f, x, self.exponent().expect("smooth is lp"));
        };
        let verts = full_vertices::<R>(knots);
        let n = verts.len();
        let vals: Vec<R> = verts
            .iter()
            .map(|v| f[0].clone() * v[0].clone() + f[1].clone() * v[1].clone())
            .collect();
        let best = vals.iter().cloned().fold(R::zero(), R::max_of);
        let tol = lp::tie_tol::<R>() * lit(1024.0);
        let on: Vec<bool> = vals.iter().map(|v| *v >= best.clone() - tol.clone()).collect();
        let start = (0..n)
            .find(|&i| on[i] && !on[(i + n - 1) % n])
            .ok_or_else(|| Error::DegenerateInput("functional is flat on the whole ball".into()))?;
        let mut end = start;
        while on[(end + 1) % n] && (end + 1) % n != start {
            end = (end + 1) % n;
        }
        let a = verts[start].clone();
        let b = verts[end].clone();
        if start == end {
            return Ok(a.to_vec());
        }
        // Minimize the piecewise linear convex map lambda -> ||x - a - lambda (b - a)||.
        let normals = all_edge_normals::<R>(knots);
        let d0 = [x[0].clone() - a[0].clone(), x[1].clone() - a[1].clone()];
        let e = [b[0].clone() - a[0].clone(), b[1].clone() - a[1].clone()];
        let lines: Vec<(R, R)> = normals
            .iter()
            .map(|g| {
                (
                    g[0].clone() * d0[0].clone() + g[1].clone() * d0[1].clone(),
                    g[0].clone() * e[0].clone() + g[1].clone() * e[1].clone(),
                )
            })
            .collect();
        let h = |lam: &R| {
            lines
                .iter()
                .map(|(c, d)| c.clone() - lam.clone() * d.clone())
                .fold(R::zero(), R::max_of)
        };
        let mut cands = vec![R::zero(), R::one()];
        for i in 0..lines.len() {
            for j in (i + 1)..lines.len() {
                let dd = lines[i].1.clone() - lines[j].1.clone();
                if dd.is_zero() {
                    continue;
                }
                let lam = (lines[i].0.clone() - lines[j].0.clone()) / dd;
                if lam > R::zero() && lam < R::one() {
                    cands.push(lam);
                }
            }
        }
        let mut best_lam = R::zero();
        let mut best_val = h(&best_lam);
        for lam in cands {
            let v = h(&lam);
            if v < best_val || (v == best_val && lam < best_lam) {
                best_val = v;
                best_lam = lam;
            }
        }
        Ok(vec![
            a[0].clone() + best_lam.clone() * e[0].clone(),
            a[1].clone() + best_lam * e[1].clone(),
        ])
    }

    /// Checks normalization, monotonicity, the bounds `max(a,b) <= f <= a + b`
    /// and the triangle inequality on grids of the given resolution.
    pub fn validate(&self, grid_resolution: usize) -> Result<std::result::Result<NormCertificate, Violation>> {
        let n = grid_resolution.max(2);
        let f = |a: f64, b: f64| self.eval(&a, &b);
        let tol = 1e-12;
        let mut checks = 0usize;
        for i in 0..=n {
            for j in 0..=n {
                let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                if f(a, b) < 0.0 || !f(a, b).is_finite() {
                    return Err(Error::NotANorm(format!("generator negative at ({a}, {b})")));
                }
            }
        }
        for (pt, v) in [([1.0, 0.0], f(1.0, 0.0)), ([0.0, 1.0], f(0.0, 1.0))] {
            checks += 1;
            if (v - 1.0).abs() > tol {
                return Ok(Err(Violation {
                    property: "normalization",
                    points: vec![pt],
                    detail: format!("f({}, {}) = {v}", pt[0], pt[1]),
                }));
            }
        }
        for i in 0..=n {
            for j in 0..=n {
                let (a, b) = (i as f64 / n as f64, j as f64 / n as f64);
                let v = f(a, b);
                checks += 1;
                if v < a.max(b) - tol || v > a + b + tol {
                    return Ok(Err(Violation {
                        property: "bounds",
                        points: vec![[a, b]],
                        detail: format!("f = {v} outside [max(a,b), a+b]"),
                    }));
                }
                for (a2, b2) in [((i + 1) as f64 / n as f64, b), (a, (j + 1) as f64 / n as f64)] {
                    if a2 > 1.0 || b2 > 1.0 {
                        continue;
                    }
                    checks += 1;
                    if f(a2, b2) < v - tol {
                        return Ok(Err(Violation {
                            property: "monotonicity",
                            points: vec![[a, b], [a2, b2]],
                            detail: format!("f decreases from {v} to {}", f(a2, b2)),
                        }));
                    }
                }
            }
        }
        let dirs: Vec<[f64; 2]> = (0..4 * n)
            .map(|k| {
                let th = k as f64 * 4.0 * FRAC_PI_2 / (4 * n) as f64;
                [th.cos(), th.sin()]
            })
            .collect();
        let norm = |x: [f64; 2]| f(x[0].abs(), x[1].abs());
        for u in &dirs {
            for v in &dirs {
                checks += 1;
                let w = [u[0] + v[0], u[1] + v[1]];
                if norm(w) > norm(*u) + norm(*v) + tol {
                    return Ok(Err(Violation {
                        property: "triangle",
                        points: vec![*u, *v],
                        detail: format!("|u+v| = {} > |u| + |v| = {}", norm(w), norm(*u) + norm(*v)),
                    }));
                }
            }
        }
        Ok(Ok(NormCertificate {
            grid_resolution: n,
            checks,
        }))
    }

    /// Largest `T >= 0` with `f(T, 1) = 1` (or `f(1, T) = 1`).
    ///
    /// The set of valid completions is `[-T, T]` by monotonicity.
    pub fn completion_bound<R: Real>(&self, which: Coordinate) -> R {
        match (&self.knots, which) {
            (None, _) => R::zero(),
            (Some(knots), Coordinate::SecondCoord) => {
                // f(t, 1) = 1 exactly while g(tau) sits on the line 1 - tau.
                let mut tau = 0.0;
                for &(t, g) in knots {
                    if (g - (1.0 - t)).abs() <= 1e-12 && t < 1.0 {
                        tau = t;
                    } else {
                        break;
                    }
                }
                lit::<R>(tau) / lit(1.0 - tau)
            }
            (Some(knots), Coordinate::FirstCoord) => {
                let mut tau = 1.0;
                for &(t, g) in knots.iter().rev() {
                    if (g - t).abs() <= 1e-12 && t > 0.0 {
                        tau = t;
                    } else {
                        break;
                    }
                }
                lit::<R>(1.0 - tau) / lit(tau)
            }
        }
    }

    /// Maximal `t` with `|(t, 1)| = 1` (resp. `|(1, t)| = 1`) carrying the
    /// sign of `r` (resp. `s`), for a sphere point `(r, s)`.
    pub fn boundary_completion<R: Real>(&self, r: &R, s: &R, which: Coordinate) -> Result<R> {
        self.require_sphere(r, s)?;
        let bound = self.completion_bound::<R>(which);
        let sign = match which {
            Coordinate::SecondCoord => r.signum_or_one(),
            Coordinate::FirstCoord => s.signum_or_one(),
        };
        Ok(sign * bound)
    }

    /// The valid completion closest to the current coordinate: the nearest
    /// point of `[-T, T]` to `r` (resp. `s`).
    pub fn nearest_completion<R: Real>(&self, r: &R, s: &R, which: Coordinate) -> Result<R> {
        self.require_sphere(r, s)?;
        let bound = self.completion_bound::<R>(which);
        let c = match which {
            Coordinate::SecondCoord => r,
            Coordinate::FirstCoord => s,
        };
        Ok(c.signum_or_one() * c.abs().min_of(bound))
    }

    fn require_sphere<R: Real>(&self, r: &R, s: &R) -> Result<()> {
        let n = self.norm(&[r.clone(), s.clone()]);
        if (n.clone() - R::one()).abs() > lit(TOL_SPHERE) {
            return Err(Error::NotOnSphere { norm: n.to_f64() });
        }
        Ok(())
    }

    /// Dual pair `(alpha, beta)` of norm one with `alpha r + beta s = 1` for a
    /// sphere point in the positive quadrant.
    pub fn dual_pair<R: Real>(&self, r: &R, s: &R) -> Result<(R, R)> {
        self.require_sphere(r, s)?;
        if *r < R::zero() || *s < R::zero() {
            return Err(Error::Range("dual pair expects a point in the positive quadrant".into()));
        }
        let f = self.norming(&[r.clone(), s.clone()])?;
        Ok((f[0].clone(), f[1].clone()))
    }

    /// Largest `delta` such that every sphere point with `s > 1 - delta` lies
    /// within `epsilon` of a point `(t, 1)` on the sphere, and symmetrically
    /// for `r > 1 - delta`. Computed on `resolution` samples of the quarter
    /// sphere with the violating boundary refined by bisection.
    pub fn lemma_fact_delta(&self, epsilon: f64, resolution: usize) -> Result<f64> {
        if !(epsilon > 0.0) {
            return Err(Error::Range(format!("epsilon must be positive, got {epsilon}")));
        }
        let d2 = self.one_sided_delta(epsilon, resolution, Coordinate::SecondCoord);
        let d1 = self.one_sided_delta(epsilon, resolution, Coordinate::FirstCoord);
        Ok(d1.min(d2))
    }

    fn sphere_point(&self, theta: f64) -> (f64, f64) {
        let (c, s) = (theta.cos().max(0.0), theta.sin().max(0.0));
        let n = self.eval(&c, &s);
        (c / n, s / n)
    }

    fn one_sided_delta(&self, epsilon: f64, resolution: usize, which: Coordinate) -> f64 {
        let bound: f64 = self.completion_bound(which);
        // Orient so that `lead` is the coordinate approaching 1 and `free` the
        // one that must stay near a valid completion.
        let split = |theta: f64| {
            let (r, s) = self.sphere_point(theta);
            match which {
                Coordinate::SecondCoord => (s, r),
                Coordinate::FirstCoord => (r, s),
            }
        };
        let bad = |theta: f64| split(theta).1 >= bound + epsilon;
        let n = resolution.max(16);
        let thetas: Vec<f64> = (0..=n).map(|j| FRAC_PI_2 * j as f64 / n as f64).collect();
        let mut worst_lead: f64 = f64::NEG_INFINITY;
        for (j, &th) in thetas.iter().enumerate() {
            if !bad(th) {
                continue;
            }
            worst_lead = worst_lead.max(split(th).0);
            for nb in [j.wrapping_sub(1), j + 1] {
                let Some(&th2) = thetas.get(nb) else { continue };
                if bad(th2) {
                    continue;
                }
                let (mut lo, mut hi) = (th, th2);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if bad(mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                worst_lead = worst_lead.max(split(hi).0);
            }
        }
        if worst_lead == f64::NEG_INFINITY {
            1.0 - TOL_SPHERE
        } else {
            (1.0 - worst_lead - 1e-12).clamp(0.0, 1.0 - TOL_SPHERE)
        }
    }

    /// Re-checks a `delta` against a fresh sampling of the sphere.
    pub fn certify_lemma_delta(&self, epsilon: f64, delta: f64, resolution: usize) -> bool {
        let t2: f64 = self.completion_bound(Coordinate::SecondCoord);
        let t1: f64 = self.completion_bound(Coordinate::FirstCoord);
        (0..=resolution).all(|j| {
            let (r, s) = self.sphere_point(FRAC_PI_2 * j as f64 / resolution as f64);
            (s <= 1.0 - delta || r < t2 + epsilon) && (r <= 1.0 - delta || s < t1 + epsilon)
        })
    }

    /// Slab geometry of a polygonal unit ball.
    ///
    /// `gap` is the smallest drop `1 - g(v)` of an edge normal `g` over the
    /// vertices off its edge. `constant` is a `K` such that every point of the
    /// ball with `g(x) > 1 - gamma`, `gamma < gap`, lies within `K gamma` of the
    /// edge; in that range the slab is a trapezoid, so `K` is read off at one
    /// small level. `None` for norms that are not polygonal.
    pub fn facet_slab(&self) -> Option<FacetSlab> {
        let knots = self.knots.as_ref()?;
        let all = full_vertices::<f64>(knots);
        let m = all.len();
        // Collinear knots are not extreme points.
        let verts: Vec<[f64; 2]> = (0..m)
            .filter(|&i| {
                let (p, v, q) = (all[(i + m - 1) % m], all[i], all[(i + 1) % m]);
                let cross = (v[0] - p[0]) * (q[1] - v[1]) - (v[1] - p[1]) * (q[0] - v[0]);
                cross.abs() > 1e-12
            })
            .map(|i| all[i])
            .collect();
        let n = verts.len();
        let mut gap = f64::INFINITY;
        let mut worst: f64 = 1.0;
        for i in 0..n {
            let a = verts[i];
            let b = verts[(i + 1) % n];
            let g = self.norming(&[0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]).ok()?;
            let value = |v: [f64; 2]| g[0] * v[0] + g[1] * v[1];
            let off = (0..n)
                .map(|j| value(verts[j]))
                .filter(|&v| v < 1.0 - 1e-12)
                .fold(f64::NEG_INFINITY, f64::max);
            let gap_i = 1.0 - off;
            gap = gap.min(gap_i);
            let gamma = gap_i.min(1e-3) / 2.0;
            let level = 1.0 - gamma;
            for j in 0..n {
                let p = verts[j];
                let q = verts[(j + 1) % n];
                let (gp, gq) = (value(p), value(q));
                if (gp - level) * (gq - level) > 0.0 || gp == gq {
                    continue;
                }
                let lam = (level - gp) / (gq - gp);
                let y = [p[0] + lam * (q[0] - p[0]), p[1] + lam * (q[1] - p[1])];
                let z = self.face_project(&g, &y).ok()?;
                let d = self.norm(&[y[0] - z[0], y[1] - z[1]]);
                worst = worst.max(d / gamma);
            }
        }
        Some(FacetSlab {
            gap,
            constant: worst * 1.05,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetSlab {
    pub gap: f64,
    pub constant: f64,
}

fn interp<R: Real>(knots: &[(f64, f64)], tau: &R) -> R {
    let last = knots.len() - 1;
    let i = (0..last).find(|&i| *tau <= lit(knots[i + 1].0)).unwrap_or(last - 1);
    let (t0, g0) = knots[i];
    let (t1, g1) = knots[i + 1];
    let w = (tau.clone() - lit(t0)) / lit(t1 - t0);
    lit::<R>(g0) + w * lit(g1 - g0)
}

/// Gradients `(d/da, d/db)` of `f` on each knot cone of the positive quadrant.
fn edge_normals<R: Real>(knots: &[(f64, f64)]) -> Vec<[R; 2]> {
    knots
        .windows(2)
        .map(|w| {
            let (t0, g0) = w[0];
            let (t1, g1) = w[1];
            let m = lit::<R>(g1 - g0) / lit(t1 - t0);
            let at0 = lit::<R>(g0) - m.clone() * lit(t0);
            let at1 = at0.clone() + m;
            [at1, at0]
        })
        .collect()
}

fn all_edge_normals<R: Real>(knots: &[(f64, f64)]) -> Vec<[R; 2]> {
    let mut out = Vec::new();
    for [c1, c0] in edge_normals::<R>(knots) {
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)] {
            out.push([c1.clone() * lit(sx), c0.clone() * lit(sy)]);
        }
    }
    out
}

/// Unit sphere vertices in counter-clockwise order starting on the positive
/// first axis.
fn full_vertices<R: Real>(knots: &[(f64, f64)]) -> Vec<[R; 2]> {
    // Positive quadrant from angle 0 (tau = 1) to angle pi/2 (tau = 0).
    let q1: Vec<[R; 2]> = knots
        .iter()
        .rev()
        .map(|&(t, g)| [lit::<R>(t) / lit(g), lit::<R>(1.0 - t) / lit(g)])
        .collect();
    let mut out: Vec<[R; 2]> = Vec::with_capacity(4 * q1.len());
    out.extend(q1.iter().cloned());
    out.extend(q1.iter().rev().skip(1).map(|[x, y]| [-x.clone(), y.clone()]));
    out.extend(q1.iter().skip(1).map(|[x, y]| [-x.clone(), -y.clone()]));
    out.extend(
        q1.iter()
            .rev()
            .skip(1)
            .take(q1.len() - 2)
            .map(|[x, y]| [x.clone(), -y.clone()]),
    );
    out
}
