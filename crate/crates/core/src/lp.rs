//! Closed forms for `l_p` norms on coordinate vectors.
//!
//! Norming functionals of polyhedral norms (`p = 1`, `p = inf`) are not unique;
//! ties are broken towards the lexicographically largest extreme point of the
//! dual face. With that rule a nonnegative vector always gets a nonnegative
//! norming functional.

use crate::error::{Error, Result};
use crate::real::{lit, Real};

pub fn is_inf(p: f64) -> bool {
    p.is_infinite()
}

pub fn dual_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if is_inf(p) {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// Relative tolerance used to decide ties between floating point values.
pub(crate) fn tie_tol<R: Real>() -> R {
    R::epsilon() * lit(1024.0)
}

fn max_abs<R: Real>(x: &[R]) -> R {
    x.iter().fold(R::zero(), |m, v| m.max_of(v.abs()))
}

pub fn lp_norm<R: Real>(x: &[R], p: f64) -> R {
    if p == 1.0 {
        return x.iter().fold(R::zero(), |acc, v| acc + v.abs());
    }
    if is_inf(p) {
        return max_abs(x);
    }
    if p == 2.0 {
        return crate::linalg::norm2(x);
    }
    let m = max_abs(x);
    if m.is_zero() {
        return R::zero();
    }
    let pr: R = lit(p);
    let s = x.iter().fold(R::zero(), |acc, v| {
        acc + (v.abs() / m.clone()).powf(&pr)
    });
    m * s.powf(&(R::one() / pr))
}

/// Norm-one functional `f` with `f(x) = ||x||_p`.
pub fn lp_norming<R: Real>(x: &[R], p: f64) -> Result<Vec<R>> {
    let m = max_abs(x);
    if m.is_zero() {
        return Err(Error::DegenerateInput("norming functional of the zero vector".into()));
    }
    if p == 1.0 {
        return Ok(x.iter().map(Real::signum_or_one).collect());
    }
    if is_inf(p) {
        let cutoff = m.clone() - m * tie_tol::<R>();
        let ties: Vec<usize> = (0..x.len()).filter(|&i| x[i].abs() >= cutoff).collect();
        let pick = ties
            .iter()
            .copied()
            .find(|&i| x[i] > R::zero())
            .map(|i| (i, R::one()))
            .unwrap_or_else(|| (*ties.last().expect("max is attained"), -R::one()));
        let mut f = vec![R::zero(); x.len()];
        f[pick.0] = pick.1;
        return Ok(f);
    }
    let pm1: R = lit(p - 1.0);
    let scaled: Vec<R> = x.iter().map(|v| v.clone() / m.clone()).collect();
    let norm = lp_norm(&scaled, p);
    let denom = norm.powf(&pm1);
    Ok(scaled
        .iter()
        .map(|v| {
            if v.is_zero() {
                R::zero()
            } else {
                v.signum_or_one() * v.abs().powf(&pm1) / denom.clone()
            }
        })
        .collect())
}

/// Nearest point to `x` (in the `l_p` distance) on the face
/// `{z : ||z||_p = 1, f(z) = 1}` of a functional with `||f||_q = 1`.
pub fn lp_face_project<R: Real>(f: &[R], x: &[R], p: f64) -> Result<Vec<R>> {
    let n = f.len();
    if p == 1.0 {
        let cutoff = R::one() - tie_tol::<R>() * lit(1024.0);
        let support: Vec<usize> = (0..n).filter(|&i| f[i].abs() >= cutoff).collect();
        if support.is_empty() {
            return Err(Error::DegenerateInput("functional does not attain its norm".into()));
        }
        let pos: Vec<R> = support
            .iter()
            .map(|&i| (f[i].signum_or_one() * x[i].clone()).max_of(R::zero()))
            .collect();
        let mass = pos.iter().fold(R::zero(), |a, v| a + v.clone());
        let mut z = vec![R::zero(); n];
        if mass >= R::one() {
            for (k, &i) in support.iter().enumerate() {
                z[i] = f[i].signum_or_one() * pos[k].clone() / mass.clone();
            }
        } else {
            let fill = (R::one() - mass) / R::from_usize(support.len());
            for (k, &i) in support.iter().enumerate() {
                z[i] = f[i].signum_or_one() * (pos[k].clone() + fill.clone());
            }
        }
        return Ok(z);
    }
    if is_inf(p) {
        let tol = tie_tol::<R>();
        return Ok((0..n)
            .map(|i| {
                if f[i].abs() > tol {
                    f[i].signum_or_one()
                } else {
                    x[i].clone().max_of(-R::one()).min_of(R::one())
                }
            })
            .collect());
    }
    let q = dual_exponent(p);
    let qm1: R = lit(q - 1.0);
    let z: Vec<R> = f
        .iter()
        .map(|v| {
            if v.is_zero() {
                R::zero()
            } else {
                v.signum_or_one() * v.abs().powf(&qm1)
            }
        })
        .collect();
    let nz = lp_norm(&z, p);
    if nz.is_zero() {
        return Err(Error::DegenerateInput("zero functional has no face".into()));
    }
    Ok(z.into_iter().map(|v| v / nz.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dot;
    use crate::real::Hp;

    #[test]
    fn norms_of_small_vectors() {
        assert_eq!(lp_norm(&[3.0, 4.0], 2.0), 5.0);
        assert_eq!(lp_norm(&[1.0, -2.0, 3.0], f64::INFINITY), 3.0);
        assert_eq!(lp_norm(&[1.0, -2.0, 3.0], 1.0), 6.0);
        assert!((lp_norm(&[1.0, 1.0], 3.0) - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn l1_norming_is_sign_vector() {
        assert_eq!(lp_norming(&[-2.0, 1.0], 1.0).unwrap(), vec![-1.0, 1.0]);
        // zero coordinate: lexicographically largest extreme point
        assert_eq!(lp_norming(&[0.0, 1.0], 1.0).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn linf_norming_tie_break() {
        assert_eq!(lp_norming(&[1.0, 0.5], f64::INFINITY).unwrap(), vec![1.0, 0.0]);
        assert_eq!(lp_norming(&[-1.0, 1.0], f64::INFINITY).unwrap(), vec![0.0, 1.0]);
        assert_eq!(lp_norming(&[-1.0, -1.0], f64::INFINITY).unwrap(), vec![0.0, -1.0]);
        assert_eq!(lp_norming(&[1.0, 1.0], f64::INFINITY).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn l3_norming_of_ones() {
        let f = lp_norming(&[1.0, 1.0], 3.0).unwrap();
        assert!((dot(&f, &[1.0, 1.0]) - 2f64.powf(1.0 / 3.0)).abs() < 1e-14);
        assert!((lp_norm(&f, 1.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_vector_is_degenerate() {
        assert!(matches!(
            lp_norming(&[0.0, 0.0], 2.0),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn face_projection_l1_snaps_onto_facet() {
        let f = vec![1.0, 1.0, 1.0];
        let z = lp_face_project(&f, &[0.5, -0.1, 0.2], 1.0).unwrap();
        assert!((dot(&f, &z) - 1.0).abs() < 1e-15);
        assert!((lp_norm(&z, 1.0) - 1.0).abs() < 1e-15);
        assert!(z.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn face_projection_high_precision() {
        let x: Vec<Hp> = [0.3, -0.4, 0.5].iter().map(|&v| Hp::new(v)).collect();
        let f = lp_norming(&x, 3.0).unwrap();
        let z = lp_face_project(&f, &x, 3.0).unwrap();
        let nx = lp_norm(&x, 3.0);
        for (zi, xi) in z.iter().zip(&x) {
            let d = (zi.clone() - xi.clone() / nx.clone()).abs();
            assert!(d.to_f64() < 1e-100);
        }
    }
}
