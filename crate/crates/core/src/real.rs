//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! Most oracles run happily in `f64`. The correction and witness pipelines do
//! not: their parameter cascades push the admissible slack far below the
//! spacing of doubles near 1, so those paths are instantiated with [`Hp`], a
//! fixed 512-bit binary float backed by MPFR.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::ops::Pow;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use rug::Float;

/// Working precision of [`Hp`] in bits.
pub const HP_PRECISION: u32 = 512;

pub trait Real:
    Clone
    + fmt::Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    fn from_f64(x: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn abs(&self) -> Self;
    /// `self^e` for `self >= 0`.
    fn powf(&self, e: &Self) -> Self;
    /// Unit roundoff of the representation.
    fn epsilon() -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn signum_or_one(&self) -> Self {
        if *self < Self::zero() {
            -Self::one()
        } else {
            Self::one()
        }
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

/// Shorthand for lifting an `f64` constant into any [`Real`].
#[inline]
pub fn lit<R: Real>(x: f64) -> R {
    R::from_f64(x)
}

/// Total order helper for `max_by`/`sort_by` on reals that are never NaN.
pub fn cmp_real<R: Real>(a: &R, b: &R) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn powf(&self, e: &Self) -> Self {
        f64::powf(*self, *e)
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// 512-bit binary floating point number.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Hp(Float);

impl Hp {
    pub fn new(x: f64) -> Self {
        Hp(Float::with_val(HP_PRECISION, x))
    }

    pub fn inner(&self) -> &Float {
        &self.0
    }
}

impl Hp {
    /// Decimal representation that round-trips through [`Hp::parse`].
    pub fn to_decimal(&self) -> String {
        format!("{:.160e}", self.0)
    }

    pub fn parse(s: &str) -> Option<Hp> {
        let parsed = Float::parse(s.trim()).ok()?;
        Some(Hp(Float::with_val(HP_PRECISION, parsed)))
    }
}

impl Serialize for Hp {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_decimal())
    }
}

impl<'de> Deserialize<'de> for Hp {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(de)? {
            Repr::Num(x) => Ok(Hp::new(x)),
            Repr::Text(t) => Hp::parse(&t).ok_or_else(|| D::Error::custom(format!("not a number: {t}"))),
        }
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.40}", self.0)
    }
}

impl fmt::Display for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

macro_rules! hp_binop {
    ($tr:ident, $m:ident, $tra:ident, $ma:ident, $op:tt) => {
        impl $tr for Hp {
            type Output = Hp;
            #[inline]
            fn $m(self, rhs: Hp) -> Hp {
                Hp(self.0 $op rhs.0)
            }
        }
        impl $tra for Hp {
            #[inline]
            fn $ma(&mut self, rhs: Hp) {
                self.0 = Float::with_val(HP_PRECISION, &self.0 $op &rhs.0);
            }
        }
    };
}

hp_binop!(Add, add, AddAssign, add_assign, +);
hp_binop!(Sub, sub, SubAssign, sub_assign, -);
hp_binop!(Mul, mul, MulAssign, mul_assign, *);
hp_binop!(Div, div, DivAssign, div_assign, /);

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(-self.0)
    }
}

impl Real for Hp {
    fn from_f64(x: f64) -> Self {
        Hp::new(x)
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn sqrt(&self) -> Self {
        Hp(self.0.clone().sqrt())
    }
    fn abs(&self) -> Self {
        Hp(self.0.clone().abs())
    }
    fn powf(&self, e: &Self) -> Self {
        Hp(self.0.clone().pow(&e.0))
    }
    fn epsilon() -> Self {
        Hp(Float::with_val(HP_PRECISION, 1) >> (HP_PRECISION - 1))
    }
    fn zero() -> Self {
        Hp(Float::new(HP_PRECISION))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}
