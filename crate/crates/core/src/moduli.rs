//! Modulus of convexity and modulus of uniform monotonicity.
//!
//! Closed forms are evaluated without cancellation so that they stay accurate
//! for arguments far below the double spacing near 1; the brute-force
//! estimators sample unit spheres on low-discrepancy point sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::FiniteLattice;
use crate::lp::is_inf;
use crate::real::{Hp, Real};
use crate::spaces::NormedSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModulusKind {
    Convexity,
    Monotonicity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Method {
    ClosedForm,
    BruteForce { resolution: usize },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::ClosedForm => "closed_form",
            Method::BruteForce { .. } => "brute_force",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusCurve {
    pub kind: ModulusKind,
    pub space: String,
    pub method: Method,
    pub samples: Vec<(f64, f64)>,
}

impl ModulusCurve {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["epsilon", "value"]).map_err(csv_err)?;
        for (e, v) in &self.samples {
            w.write_record([e.to_string(), v.to_string()]).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    /// Values in `[0, 1]` and nondecreasing in epsilon.
    pub fn is_admissible(&self) -> bool {
        self.samples.iter().all(|(_, v)| (0.0..=1.0).contains(v))
            && self.samples.windows(2).all(|w| w[0].0 > w[1].0 || w[1].1 >= w[0].1 - 1e-12)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// `1 - (1 - t)^(1/p)` for `0 <= t <= 1`.
fn one_minus_root(t: f64, p: f64) -> f64 {
    -(f64::ln_1p(-t) / p).exp_m1()
}

/// Modulus of convexity of a Hilbert space.
pub fn hilbert_modulus(epsilon: f64) -> f64 {
    let q = epsilon * epsilon / 4.0;
    q / (1.0 + (1.0 - q).sqrt())
}

/// Modulus of convexity of `L_p` (Hanner's formulas), `1 < p < inf`.
pub fn lp_convexity_modulus(p: f64, epsilon: f64) -> f64 {
    if p == 2.0 {
        return hilbert_modulus(epsilon);
    }
    if p > 2.0 {
        return one_minus_root((epsilon / 2.0).powf(p), p);
    }
    // (1 - d + e/2)^p + |1 - d - e/2|^p = 2, solved in extended precision.
    let half = Hp::new(epsilon / 2.0);
    let pr = Hp::new(p);
    let two = Hp::new(2.0);
    let g = |d: &Hp| {
        let a = Hp::one() - d.clone() + half.clone();
        let b = (Hp::one() - d.clone() - half.clone()).abs();
        a.powf(&pr) + b.powf(&pr) - two.clone()
    };
    let (mut lo, mut hi) = (Hp::zero(), Hp::one());
    for _ in 0..400 {
        let mid = (lo.clone() + hi.clone()) / two.clone();
        if g(&mid) > Hp::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo.to_f64()
}

fn check_epsilon(epsilon: f64, upper: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= upper) {
        return Err(Error::Range(format!("epsilon {epsilon} outside (0, {upper}]")));
    }
    Ok(())
}

pub fn convexity_modulus(space: &NormedSpace, epsilon: f64, method: Method) -> Result<f64> {
    check_epsilon(epsilon, 2.0)?;
    match method {
        Method::ClosedForm => match space.lp_exponent() {
            Some(p) if p > 1.0 && !is_inf(p) => Ok(lp_convexity_modulus(p, epsilon)),
            _ if space.dim() == 1 => Ok(1.0),
            _ => Err(Error::NotUniformlyConvex),
        },
        Method::BruteForce { resolution } => brute_convexity(space, epsilon, resolution),
    }
}

/// Halton point `i` in `[0, 1)^dim`.
fn halton(i: usize, dim: usize) -> Vec<f64> {
    const PRIMES: [usize; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    PRIMES[..dim]
        .iter()
        .map(|&b| {
            let (mut f, mut r, mut n) = (1.0, 0.0, i + 1);
            while n > 0 {
                f /= b as f64;
                r += f * (n % b) as f64;
                n /= b;
            }
            r
        })
        .collect()
}

fn unit(space: &NormedSpace, v: &[f64]) -> Option<Vec<f64>> {
    let n = space.norm(v).ok()?;
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

/// `1 - ||(x + y)/2||` for the sphere point `y` on the arc from `x` towards
/// `d` with `||x - y|| = epsilon`, or `None` if the arc stays closer.
fn arc_gap(space: &NormedSpace, x: &[f64], d: &[f64], epsilon: f64) -> Option<f64> {
    let y_at = |phi: f64| {
        let v: Vec<f64> = x.iter().zip(d).map(|(a, b)| phi.cos() * a + phi.sin() * b).collect();
        unit(space, &v)
    };
    let dist = |y: &[f64]| {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        space.norm(&diff).unwrap_or(0.0)
    };
    let far = y_at(std::f64::consts::PI)?;
    if dist(&far) < epsilon {
        return None;
    }
    let (mut lo, mut hi) = (0.0, std::f64::consts::PI);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dist(&y_at(mid)?) < epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let y = y_at(hi)?;
    let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
    Some(1.0 - space.norm(&mid).ok()?)
}

fn brute_convexity(space: &NormedSpace, epsilon: f64, resolution: usize) -> Result<f64> {
    let n = space.dim();
    if n > 12 {
        return Err(Error::Unsupported("brute-force moduli need dimension <= 12".into()));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let resolution = resolution.max(8);
    let directions = if n == 2 { 1 } else { 24 };
    let mut candidates: Vec<(f64, Vec<f64>, Vec<f64>)> = Vec::new();
    for i in 0..resolution {
        let x = if n == 2 {
            let th = std::f64::consts::TAU * i as f64 / resolution as f64;
            vec![th.cos(), th.sin()]
        } else {
            halton(i, n).iter().map(|v| 2.0 * v - 1.0).collect()
        };
        let Some(x) = unit(space, &x) else { continue };
        for j in 0..directions {
            let raw: Vec<f64> = if n == 2 {
                vec![-x[1], x[0]]
            } else {
                halton(resolution + i * directions + j, n).iter().map(|v| 2.0 * v - 1.0).collect()
            };
            // Remove the component along x so the arc is not degenerate.
            let xx: f64 = x.iter().map(|v| v * v).sum();
            let c: f64 = x.iter().zip(&raw).map(|(a, b)| a * b).sum::<f64>() / xx;
            let d: Vec<f64> = raw.iter().zip(&x).map(|(r, a)| r - c * a).collect();
            let dn = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if dn < 1e-12 {
                continue;
            }
            let d: Vec<f64> = d.iter().map(|v| v / dn * xx.sqrt()).collect();
            for dir in [d.clone(), d.iter().map(|v| -v).collect()] {
                if let Some(g) = arc_gap(space, &x, &dir, epsilon) {
                    candidates.push((g, x.clone(), dir));
                }
            }
        }
    }
    if candidates.is_empty() {
        return Ok(1.0);
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = candidates[0].0;
    // Local descent from the best few pairs: deterministic coordinate moves
    // on x and the arc direction with a shrinking step.
    for (g0, x0, d0) in candidates.into_iter().take(4) {
        let (mut g, mut x, mut d) = (g0, x0, d0);
        let mut step = 0.05;
        while step > 1e-7 {
            let mut improved = false;
            for k in 0..2 * n {
                for sign in [-1.0, 1.0] {
                    let (mut x1, mut d1) = (x.clone(), d.clone());
                    if k < n {
                        x1[k] += sign * step;
                    } else {
                        d1[k - n] += sign * step;
                    }
                    let Some(x1) = unit(space, &x1) else { continue };
                    if let Some(g1) = arc_gap(space, &x1, &d1, epsilon) {
                        if g1 < g - 1e-15 {
                            (g, x, d) = (g1, x1, d1);
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.min(g);
    }
    Ok(best.max(0.0))
}

pub fn monotonicity_modulus(e: &FiniteLattice, epsilon: f64, method: Method) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Range(format!("epsilon {epsilon} outside (0, 1)")));
    }
    let alpha = match (method, e) {
        (Method::ClosedForm, FiniteLattice::Lp { p, .. } | FiniteLattice::WeightedLp { p, .. }) => {
            if is_inf(*p) {
                0.0
            } else {
                one_minus_root(epsilon.powf(*p), *p)
            }
        }
        (Method::ClosedForm, FiniteLattice::Absolute(_)) => brute_monotonicity(e, epsilon, 2048)?,
        (Method::BruteForce { resolution }, _) => brute_monotonicity(e, epsilon, resolution)?,
    };
    if alpha < 1e-9 {
        return Err(Error::NotUniformlyMonotone { epsilon });
    }
    Ok(alpha)
}

/// Nonnegative unit directions supported on `support`.
fn positive_shapes(e: &FiniteLattice, support: &[usize], count: usize) -> Vec<Vec<f64>> {
    let n = e.dim();
    let mut out = Vec::new();
    for &k in support {
        let mut v = vec![0.0; n];
        v[k] = 1.0;
        out.push(v);
    }
    if support.len() > 1 {
        out.push({
            let mut v = vec![0.0; n];
            support.iter().for_each(|&k| v[k] = 1.0);
            v
        });
        for i in 0..count {
            let h = halton(i, support.len());
            let mut v = vec![0.0; n];
            for (&k, hv) in support.iter().zip(h) {
                v[k] = hv;
            }
            out.push(v);
        }
    }
    out.into_iter()
        .filter_map(|v| {
            let nv = e.norm(&v);
            (nv > 0.0).then(|| v.iter().map(|x| x / nv).collect())
        })
        .collect()
}

/// `1 - sup ||e chi_{A^c}||` over positive unit `e` with `||e chi_A|| = epsilon`,
/// by enumeration of all proper subsets `A`.
fn brute_monotonicity(e: &FiniteLattice, epsilon: f64, resolution: usize) -> Result<f64> {
    let n = e.dim();
    if n > 12 {
        return Err(Error::Unsupported("subset enumeration needs dimension <= 12".into()));
    }
    if n == 1 {
        return Ok(1.0);
    }
    let per_side = (resolution as f64).sqrt().ceil() as usize;
    let mut sup_mu: f64 = 0.0;
    for mask in 1..(1usize << n) - 1 {
        let a: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 1).collect();
        let b: Vec<usize> = (0..n).filter(|k| mask >> k & 1 == 0).collect();
        let a_shapes = positive_shapes(e, &a, per_side);
        let b_shapes = positive_shapes(e, &b, per_side);
        for ah in &a_shapes {
            for bh in &b_shapes {
                let norm_at = |mu: f64| {
                    let v: Vec<f64> = ah.iter().zip(bh).map(|(x, y)| epsilon * x + mu * y).collect();
                    e.norm(&v)
                };
                let (mut lo, mut hi) = (0.0, 1.0);
                if norm_at(1.0) <= 1.0 {
                    sup_mu = 1.0;
                    continue;
                }
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if norm_at(mid) < 1.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                sup_mu = sup_mu.max(hi);
            }
        }
    }
    Ok((1.0 - sup_mu).max(0.0))
}

pub fn convexity_curve(space: &NormedSpace, label: &str, grid: &[f64], method: Method) -> Result<ModulusCurve> {
    let samples = grid
        .iter()
        .map(|&eps| Ok((eps, convexity_modulus(space, eps, method)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModulusCurve {
        kind: ModulusKind::Convexity,
        space: label.into(),
        method,
        samples,
    })
}

pub fn monotonicity_curve(e: &FiniteLattice, label: &str, grid: &[f64], method: Method) -> Result<ModulusCurve> {
    let samples = grid
        .iter()
        .map(|&eps| Ok((eps, monotonicity_modulus(e, eps, method)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ModulusCurve {
        kind: ModulusKind::Monotonicity,
        space: label.into(),
        method,
        samples,
    })
}
