//! Small dense linear algebra over any [`Real`].
//!
//! Dimensions in this crate stay in the tens, so everything here is the
//! textbook algorithm: row-major storage, cyclic Jacobi for symmetric
//! eigenproblems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{lit, Real};

pub fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    a.iter()
        .zip(b)
        .fold(R::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn norm2<R: Real>(a: &[R]) -> R {
    let scale = a.iter().fold(R::zero(), |m, x| m.max_of(x.abs()));
    if scale.is_zero() {
        return R::zero();
    }
    let s = a.iter().fold(R::zero(), |acc, x| {
        let y = x.clone() / scale.clone();
        acc + y.square()
    });
    scale * s.sqrt()
}

pub fn sub<R: Real>(a: &[R], b: &[R]) -> Vec<R> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add<R: Real>(a: &[R], b: &[R]) -> Vec<R> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn scale<R: Real>(a: &[R], s: &R) -> Vec<R> {
    a.iter().map(|x| x.clone() * s.clone()).collect()
}

pub fn lift<R: Real>(a: &[f64]) -> Vec<R> {
    a.iter().map(|&x| R::from_f64(x)).collect()
}

pub fn lower<R: Real>(a: &[R]) -> Vec<f64> {
    a.iter().map(Real::to_f64).collect()
}

/// Convex combination `sum_k w_k x_k`.
pub fn weighted_sum<R: Real>(weights: &[R], xs: &[Vec<R>]) -> Vec<R> {
    let dim = xs.first().map_or(0, Vec::len);
    let mut out = vec![R::zero(); dim];
    for (w, x) in weights.iter().zip(xs) {
        for (o, xi) in out.iter_mut().zip(x) {
            *o += w.clone() * xi.clone();
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![R::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, R::one());
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<R>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<R>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::Dimension {
                    expected: c,
                    found: row.len(),
                });
            }
            data.extend(row.iter().cloned());
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<R>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            if col.len() != r {
                return Err(Error::Dimension {
                    expected: r,
                    found: col.len(),
                });
            }
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: R) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row_major(&self) -> &[R] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<R>> {
        self.data.chunks(self.cols.max(1)).map(<[R]>::to_vec).collect()
    }

    pub fn column(&self, j: usize) -> Vec<R> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Columns `start..start + len` as a new matrix.
    pub fn column_block(&self, start: usize, len: usize) -> Matrix<R> {
        let mut m = Self::zeros(self.rows, len);
        for i in 0..self.rows {
            for j in 0..len {
                m.set(i, j, self.get(i, start + j).clone());
            }
        }
        m
    }

    pub fn set_column_block(&mut self, start: usize, block: &Matrix<R>) {
        for i in 0..self.rows {
            for j in 0..block.cols {
                self.set(i, start + j, block.get(i, j).clone());
            }
        }
    }

    pub fn mul_vec(&self, x: &[R]) -> Result<Vec<R>> {
        if x.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], x))
            .collect())
    }

    pub fn mul(&self, other: &Matrix<R>) -> Result<Matrix<R>> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = R::zero();
                for k in 0..self.cols {
                    acc += self.get(i, k).clone() * other.get(k, j).clone();
                }
                m.set(i, j, acc);
            }
        }
        Ok(m)
    }

    pub fn transpose(&self) -> Matrix<R> {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    pub fn sub(&self, other: &Matrix<R>) -> Matrix<R> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: sub(&self.data, &other.data),
        }
    }

    pub fn scaled(&self, s: &R) -> Matrix<R> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: scale(&self.data, s),
        }
    }

    pub fn max_abs(&self) -> R {
        self.data.iter().fold(R::zero(), |m, x| m.max_of(x.abs()))
    }

    pub fn map<S: Real>(&self, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn lower(&self) -> Matrix<f64> {
        self.map(Real::to_f64)
    }
}

impl Matrix<f64> {
    pub fn lift<R: Real>(&self) -> Matrix<R> {
        self.map(|&x| R::from_f64(x))
    }
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with the matching eigenvectors.
pub fn symmetric_eigen<R: Real>(a: &Matrix<R>) -> (Vec<R>, Vec<Vec<R>>) {
    let n = a.rows();
    let mut m = a.clone();
    let mut v = Matrix::<R>::identity(n);
    let tol = R::epsilon() * lit(4.0);
    for _sweep in 0..200 {
        let mut off = R::zero();
        let mut diag = R::zero();
        for i in 0..n {
            diag += m.get(i, i).square();
            for j in 0..n {
                if i != j {
                    off += m.get(i, j).square();
                }
            }
        }
        if off <= tol.square() * diag.clone().max_of(R::epsilon()) || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q).clone();
                if apq.is_zero() {
                    continue;
                }
                let app = m.get(p, p).clone();
                let aqq = m.get(q, q).clone();
                let theta = (aqq - app) / (lit::<R>(2.0) * apq.clone());
                let t = theta.signum_or_one()
                    / (theta.abs() + (theta.square() + R::one()).sqrt());
                let c = R::one() / (t.square() + R::one()).sqrt();
                let s = t.clone() * c.clone();
                for k in 0..n {
                    let mkp = m.get(k, p).clone();
                    let mkq = m.get(k, q).clone();
                    m.set(k, p, c.clone() * mkp.clone() - s.clone() * mkq.clone());
                    m.set(k, q, s.clone() * mkp + c.clone() * mkq);
                }
                for k in 0..n {
                    let mpk = m.get(p, k).clone();
                    let mqk = m.get(q, k).clone();
                    m.set(p, k, c.clone() * mpk.clone() - s.clone() * mqk.clone());
                    m.set(q, k, s.clone() * mpk + c.clone() * mqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p).clone();
                    let vkq = v.get(k, q).clone();
                    v.set(k, p, c.clone() * vkp.clone() - s.clone() * vkq.clone());
                    v.set(k, q, s.clone() * vkp + c.clone() * vkq);
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| crate::real::cmp_real(m.get(j, j), m.get(i, i)));
    let values = order.iter().map(|&i| m.get(i, i).clone()).collect();
    let vectors = order.iter().map(|&i| v.column(i)).collect();
    (values, vectors)
}

/// Thin singular value decomposition data: singular values (descending) and
/// the matching right singular vectors.
pub struct RightSingular<R> {
    pub values: Vec<R>,
    pub vectors: Vec<Vec<R>>,
}

pub fn right_singular<R: Real>(a: &Matrix<R>) -> RightSingular<R> {
    let ata = a.transpose().mul(a).expect("shapes agree");
    let (vals, vecs) = symmetric_eigen(&ata);
    RightSingular {
        values: vals.into_iter().map(|l| l.max_of(R::zero()).sqrt()).collect(),
        vectors: vecs,
    }
}

/// Largest singular value.
pub fn spectral_norm<R: Real>(a: &Matrix<R>) -> R {
    if a.rows() == 0 || a.cols() == 0 {
        return R::zero();
    }
    // A^T A or A A^T, whichever is smaller.
    let g = if a.cols() <= a.rows() {
        a.transpose().mul(a).expect("shapes agree")
    } else {
        a.mul(&a.transpose()).expect("shapes agree")
    };
    let (vals, _) = symmetric_eigen(&g);
    vals.into_iter()
        .next()
        .map_or(R::zero(), |l| l.max_of(R::zero()).sqrt())
}
