//! Surjective isometries of a Hilbert space that move one unit vector onto
//! another while staying as close to the identity as possible.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm, Matrix};
use crate::real::{lit, Real};
use crate::TOL_SPHERE;

/// Scalars of a real or complex Hilbert space.
pub trait Field:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    type Re: Real;
    fn conj(&self) -> Self;
    fn re(&self) -> Self::Re;
    fn from_re(x: Self::Re) -> Self;
    fn abs_sq(&self) -> Self::Re;
    fn scale(&self, s: &Self::Re) -> Self;
    fn spectral_norm(rows: &[Vec<Self>]) -> Self::Re;

    fn zero_scalar() -> Self {
        Self::from_re(Self::Re::zero())
    }
    fn one_scalar() -> Self {
        Self::from_re(Self::Re::one())
    }
    fn modulus(&self) -> Self::Re {
        self.abs_sq().sqrt()
    }
}

impl<R: Real> Field for R {
    type Re = R;
    fn conj(&self) -> Self {
        self.clone()
    }
    fn re(&self) -> R {
        self.clone()
    }
    fn from_re(x: R) -> Self {
        x
    }
    fn abs_sq(&self) -> R {
        self.square()
    }
    fn scale(&self, s: &R) -> Self {
        self.clone() * s.clone()
    }
    fn spectral_norm(rows: &[Vec<Self>]) -> R {
        Matrix::from_rows(rows).map_or(R::zero(), |m| spectral_norm(&m))
    }
}

impl Field for Complex64 {
    type Re = f64;
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn from_re(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn abs_sq(&self) -> f64 {
        self.norm_sqr()
    }
    fn scale(&self, s: &f64) -> Self {
        self * s
    }
    fn spectral_norm(rows: &[Vec<Self>]) -> f64 {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if n == 0 || m == 0 {
            return 0.0;
        }
        let flat: Vec<Complex64> = rows.concat();
        nalgebra::DMatrix::from_row_slice(n, m, &flat).singular_values().max()
    }
}

/// `<a, b> = sum a_i conj(b_i)`.
pub fn inner<F: Field>(a: &[F], b: &[F]) -> F {
    a.iter()
        .zip(b)
        .fold(F::zero_scalar(), |acc, (x, y)| acc + x.clone() * y.conj())
}

pub fn hnorm<F: Field>(a: &[F]) -> F::Re {
    inner(a, a).re().max_of(F::Re::zero()).sqrt()
}

fn axpy<F: Field>(a: &F, x: &[F], y: &[F]) -> Vec<F> {
    x.iter().zip(y).map(|(xi, yi)| a.clone() * xi.clone() + yi.clone()).collect()
}

#[derive(Debug, Clone)]
pub struct AligningIsometry<F: Field> {
    /// Row-major square matrix.
    pub matrix: Vec<Vec<F>>,
    pub u: Vec<F>,
    pub v: Vec<F>,
    /// Orthonormal partners spanning the moved plane; empty in dimension 1.
    pub u_perp: Vec<F>,
    pub v_perp: Vec<F>,
    /// `||Phi - I||`.
    pub defect: F::Re,
}

impl<F: Field> AligningIsometry<F> {
    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn apply(&self, x: &[F]) -> Vec<F> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(x).fold(F::zero_scalar(), |acc, (a, b)| acc + a.clone() * b.clone()))
            .collect()
    }
}

fn check_unit<F: Field>(x: &[F]) -> Result<()> {
    let n = hnorm(x);
    if (n.clone() - F::Re::one()).abs() > lit(TOL_SPHERE) {
        return Err(Error::NotOnSphere { norm: n.to_f64() });
    }
    Ok(())
}

pub fn align_isometry<F: Field>(u: &[F], v: &[F]) -> Result<AligningIsometry<F>> {
    let n = u.len();
    if n == 0 {
        return Err(Error::DegenerateInput("zero-dimensional Hilbert space".into()));
    }
    crate::error::check_dim(n, v.len())?;
    check_unit(u)?;
    check_unit(v)?;
    if n == 1 {
        // u is unimodular, so v/u = v conj(u) / |u|^2.
        let lambda = (v[0].clone() * u[0].conj()).scale(&(F::Re::one() / u[0].abs_sq()));
        let defect = (lambda.clone() - F::one_scalar()).modulus();
        return Ok(AligningIsometry {
            matrix: vec![vec![lambda]],
            u: u.to_vec(),
            v: v.to_vec(),
            u_perp: Vec::new(),
            v_perp: Vec::new(),
            defect,
        });
    }
    let uv = inner(u, v);
    let w = axpy(&(-uv.clone()), v, u);
    let wn = hnorm(&w);
    let v_perp: Vec<F> = if wn > lit(1e-8) {
        w.iter().map(|x| x.scale(&(F::Re::one() / wn.clone()))).collect()
    } else {
        // u and v are parallel: first basis vector far enough from v.
        let j = (0..n)
            .find(|&j| v[j].abs_sq() <= lit(0.5))
            .expect("a unit vector has a coordinate of modulus at most 1/sqrt(2)");
        let mut e = vec![F::zero_scalar(); n];
        e[j] = F::one_scalar();
        let c = v[j].conj();
        let r = axpy(&(-c), v, &e);
        let rn = hnorm(&r);
        r.iter().map(|x| x.scale(&(F::Re::one() / rn.clone()))).collect()
    };
    let u1 = uv;
    let u2 = inner(u, &v_perp);
    let u_perp: Vec<F> = v
        .iter()
        .zip(&v_perp)
        .map(|(a, b)| -(u2.conj() * a.clone()) + u1.conj() * b.clone())
        .collect();
    let a: Vec<F> = v.iter().zip(u).map(|(x, y)| x.clone() - y.clone()).collect();
    let b: Vec<F> = v_perp.iter().zip(&u_perp).map(|(x, y)| x.clone() - y.clone()).collect();
    let matrix: Vec<Vec<F>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { F::one_scalar() } else { F::zero_scalar() };
                    id + a[i].clone() * u[j].conj() + b[i].clone() * u_perp[j].conj()
                })
                .collect()
        })
        .collect();
    Ok(AligningIsometry {
        matrix,
        u: u.to_vec(),
        v: v.to_vec(),
        u_perp,
        v_perp,
        defect: two_column_norm(&a, &b),
    })
}

/// Spectral norm of `a u^* + b w^*` for orthonormal `u, w`: the square root of
/// the top eigenvalue of the 2x2 Gram matrix of `(a, b)`.
fn two_column_norm<F: Field>(a: &[F], b: &[F]) -> F::Re {
    let g11 = inner(a, a).re();
    let g22 = inner(b, b).re();
    let g12 = inner(a, b).abs_sq();
    let half: F::Re = lit(0.5);
    let mean = (g11.clone() + g22.clone()) * half.clone();
    let diff = (g11 - g22) * half;
    let top = mean + (diff.square() + g12).sqrt();
    top.max_of(F::Re::zero()).sqrt()
}

#[derive(Debug, Clone)]
pub struct IsometryReport {
    /// `max |(Phi^* Phi - I)_{ij}|`.
    pub unitarity: f64,
    /// `||Phi u - v||`.
    pub alignment: f64,
    /// `| ||Phi - I|| - ||u - v|| |` with the operator norm recomputed densely.
    pub defect: f64,
    /// `|<v - u, v_perp - u_perp>|`, zero in dimension 1.
    pub orthogonality: f64,
}

impl IsometryReport {
    pub fn passes(&self) -> bool {
        self.unitarity <= 1e-10 && self.alignment <= 1e-10 && self.defect <= 1e-8 && self.orthogonality <= 1e-10
    }
}

pub fn verify_isometry<F: Field>(phi: &AligningIsometry<F>) -> IsometryReport {
    let n = phi.matrix.len();
    let col = |j: usize| -> Vec<F> { phi.matrix.iter().map(|r| r[j].clone()).collect() };
    let cols: Vec<Vec<F>> = (0..n).map(col).collect();
    let mut unitarity: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let g = inner(&cols[j], &cols[i]);
            let target = if i == j { F::one_scalar() } else { F::zero_scalar() };
            unitarity = unitarity.max((g - target).modulus().to_f64());
        }
    }
    let pu = phi.apply(&phi.u);
    let diff: Vec<F> = pu.iter().zip(&phi.v).map(|(a, b)| a.clone() - b.clone()).collect();
    let alignment = hnorm(&diff).to_f64();
    let shifted: Vec<Vec<F>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { F::one_scalar() } else { F::zero_scalar() };
                    phi.matrix[i][j].clone() - id
                })
                .collect()
        })
        .collect();
    let op = F::spectral_norm(&shifted);
    let uv: Vec<F> = phi.u.iter().zip(&phi.v).map(|(a, b)| a.clone() - b.clone()).collect();
    let defect = (op - hnorm(&uv)).abs().to_f64();
    let orthogonality = if phi.u_perp.len() == n && n > 1 {
        let b: Vec<F> = phi.v_perp.iter().zip(&phi.u_perp).map(|(x, y)| x.clone() - y.clone()).collect();
        let a: Vec<F> = phi.v.iter().zip(&phi.u).map(|(x, y)| x.clone() - y.clone()).collect();
        inner(&a, &b).modulus().to_f64()
    } else {
        0.0
    };
    IsometryReport {
        unitarity,
        alignment,
        defect,
        orthogonality,
    }
}
