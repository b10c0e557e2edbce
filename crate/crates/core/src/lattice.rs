//! Finite-dimensional Banach sequence lattices and their Köthe duals.

use serde::{Deserialize, Serialize};

use crate::absolute::{AbsoluteNorm2, Exponent};
use crate::error::{check_dim, Error, Result};
use crate::lp::{self, dual_exponent, is_inf, lp_norm};
use crate::real::{lit, Real};

/// Solid norm on `R^n` used to combine component norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LatticeDoc", into = "LatticeDoc")]
pub enum FiniteLattice {
    Lp { p: f64, dim: usize },
    /// `||x|| = ||(w_i x_i)||_p` with positive weights.
    WeightedLp { p: f64, weights: Vec<f64> },
    Absolute(AbsoluteNorm2),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum LatticeDoc {
    Lp { p: Exponent, dim: usize },
    WeightedLp { p: Exponent, weights: Vec<f64> },
    Absolute { generator: AbsoluteNorm2 },
}

impl TryFrom<LatticeDoc> for FiniteLattice {
    type Error = Error;
    fn try_from(doc: LatticeDoc) -> Result<Self> {
        match doc {
            LatticeDoc::Lp { p, dim } => FiniteLattice::lp(p.to_p()?, dim),
            LatticeDoc::WeightedLp { p, weights } => FiniteLattice::weighted_lp(p.to_p()?, weights),
            LatticeDoc::Absolute { generator } => Ok(FiniteLattice::Absolute(generator)),
        }
    }
}

impl From<FiniteLattice> for LatticeDoc {
    fn from(e: FiniteLattice) -> Self {
        match e {
            FiniteLattice::Lp { p, dim } => LatticeDoc::Lp {
                p: Exponent::from_p(p),
                dim,
            },
            FiniteLattice::WeightedLp { p, weights } => LatticeDoc::WeightedLp {
                p: Exponent::from_p(p),
                weights,
            },
            FiniteLattice::Absolute(generator) => LatticeDoc::Absolute { generator },
        }
    }
}

impl FiniteLattice {
    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("lattice dimension must be positive".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::Config(format!("exponent must be >= 1, got {p}")));
        }
        Ok(FiniteLattice::Lp { p, dim })
    }

    pub fn weighted_lp(p: f64, weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::Config("weights must be positive and finite".into()));
        }
        if !(p >= 1.0) {
            return Err(Error::Config(format!("exponent must be >= 1, got {p}")));
        }
        Ok(FiniteLattice::WeightedLp { p, weights })
    }

    pub fn dim(&self) -> usize {
        match self {
            FiniteLattice::Lp { dim, .. } => *dim,
            FiniteLattice::WeightedLp { weights, .. } => weights.len(),
            FiniteLattice::Absolute(_) => 2,
        }
    }

    /// Exponent of an (optionally weighted) `l_p` lattice.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            FiniteLattice::Lp { p, .. } | FiniteLattice::WeightedLp { p, .. } => Some(*p),
            FiniteLattice::Absolute(n) => n.exponent(),
        }
    }

    pub fn is_l1(&self) -> bool {
        matches!(self, FiniteLattice::Lp { p, .. } if *p == 1.0)
    }

    fn weights<R: Real>(&self) -> Option<Vec<R>> {
        match self {
            FiniteLattice::WeightedLp { weights, .. } => Some(weights.iter().map(|&w| lit(w)).collect()),
            _ => None,
        }
    }

    pub fn norm<R: Real>(&self, x: &[R]) -> R {
        match self {
            FiniteLattice::Lp { p, .. } => lp_norm(x, *p),
            FiniteLattice::WeightedLp { p, .. } => {
                let w = self.weights::<R>().expect("weighted");
                let y: Vec<R> = x.iter().zip(&w).map(|(a, b)| a.clone() * b.clone()).collect();
                lp_norm(&y, *p)
            }
            FiniteLattice::Absolute(n) => n.norm(x),
        }
    }

    pub fn checked_norm<R: Real>(&self, x: &[R]) -> Result<R> {
        check_dim(self.dim(), x.len())?;
        Ok(self.norm(x))
    }

    /// `sup { sum |x_k y_k| : ||y|| <= 1 }`, in closed form.
    pub fn kothe_dual_norm<R: Real>(&self, x: &[R]) -> R {
        match self {
            FiniteLattice::Lp { p, .. } => lp_norm(x, dual_exponent(*p)),
            FiniteLattice::WeightedLp { p, .. } => {
                let w = self.weights::<R>().expect("weighted");
                let y: Vec<R> = x.iter().zip(&w).map(|(a, b)| a.clone() / b.clone()).collect();
                lp_norm(&y, dual_exponent(*p))
            }
            FiniteLattice::Absolute(n) => n.dual_norm(x),
        }
    }

    /// Norm-one element of the Köthe dual attaining the norm at `x`.
    pub fn norming<R: Real>(&self, x: &[R]) -> Result<Vec<R>> {
        match self {
            FiniteLattice::Lp { p, .. } => lp::lp_norming(x, *p),
            FiniteLattice::WeightedLp { p, .. } => {
                let w = self.weights::<R>().expect("weighted");
                let y: Vec<R> = x.iter().zip(&w).map(|(a, b)| a.clone() * b.clone()).collect();
                let g = lp::lp_norming(&y, *p)?;
                Ok(g.into_iter().zip(w).map(|(a, b)| a * b).collect())
            }
            FiniteLattice::Absolute(n) => n.norming(x),
        }
    }

    /// Nearest point to `x` on the face of the unit sphere exposed by the
    /// norm-one dual element `f`.
    pub fn face_project<R: Real>(&self, f: &[R], x: &[R]) -> Result<Vec<R>> {
        match self {
            FiniteLattice::Lp { p, .. } => lp::lp_face_project(f, x, *p),
            FiniteLattice::WeightedLp { p, .. } => {
                let w = self.weights::<R>().expect("weighted");
                let fy: Vec<R> = f.iter().zip(&w).map(|(a, b)| a.clone() / b.clone()).collect();
                let y: Vec<R> = x.iter().zip(&w).map(|(a, b)| a.clone() * b.clone()).collect();
                let z = lp::lp_face_project(&fy, &y, *p)?;
                Ok(z.into_iter().zip(w).map(|(a, b)| a / b).collect())
            }
            FiniteLattice::Absolute(n) => n.face_project(f, x),
        }
    }

    /// `||e_k||` for the k-th unit vector.
    pub fn unit_norm<R: Real>(&self, k: usize) -> R {
        let mut e = vec![R::zero(); self.dim()];
        e[k] = R::one();
        self.norm(&e)
    }

    pub fn is_polyhedral(&self) -> bool {
        match self {
            FiniteLattice::Lp { p, .. } | FiniteLattice::WeightedLp { p, .. } => *p == 1.0 || is_inf(*p),
            FiniteLattice::Absolute(n) => n.is_polygonal(),
        }
    }
}
