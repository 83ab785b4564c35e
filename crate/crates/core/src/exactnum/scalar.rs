//! Scalar traits shared by the exact and high-precision code paths.
//!
//! Generic algorithms (divided differences, LDL*, trace sums, polynomial
//! coefficients) are written once against these traits and run either over
//! rationals, where every result is exact, or over [`HpReal`]/[`HpComplex`].
//! Constants are produced "like" an existing value so the float types can
//! inherit the caller's working precision.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::hp::{HpComplex, HpReal};
use super::rational::{ExactRational, GaussianRational};
use crate::error::{Error, Result};

/// A field element with owned arithmetic.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn int_like(&self, v: i64) -> Self;

    /// Rational constant, rounded to the precision of `self` when inexact.
    fn rational_like(&self, q: &ExactRational) -> Self;

    fn is_zero(&self) -> bool;

    fn zero_like(&self) -> Self {
        self.int_like(0)
    }

    fn one_like(&self) -> Self {
        self.int_like(1)
    }

    /// True when arithmetic on this type is exact.
    fn is_exact() -> bool;

    /// Working precision in bits, `None` for exact types.
    fn precision(&self) -> Option<usize>;
}

/// Ordered real scalars that pair with a complex type.
pub trait RealScalar: Scalar + PartialOrd {
    type Complex: ComplexScalar<Real = Self>;

    /// -1, 0 or 1.
    fn signum_i8(&self) -> i8;

    fn abs_val(&self) -> Self;

    /// `e^x`. Exact types only succeed at `x = 0`.
    fn try_exp(&self) -> Result<Self>;

    fn to_hp(&self, prec: usize) -> HpReal;

    /// Converts back from a float; exact types take the float's exact value.
    fn from_hp(x: &HpReal) -> Self;
}

/// Complex scalars built over a [`RealScalar`].
pub trait ComplexScalar: Scalar {
    type Real: RealScalar<Complex = Self>;

    fn from_parts(re: Self::Real, im: Self::Real) -> Self;

    fn from_real(re: Self::Real) -> Self {
        let im = re.zero_like();
        Self::from_parts(re, im)
    }

    fn re(&self) -> Self::Real;

    fn im(&self) -> Self::Real;

    fn conj(&self) -> Self;

    fn to_hp(&self, prec: usize) -> HpComplex;

    fn norm_sqr(&self) -> Self::Real {
        let (a, b) = (self.re(), self.im());
        a.clone() * a + b.clone() * b
    }
}

impl Scalar for BigRational {
    fn int_like(&self, v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn rational_like(&self, q: &ExactRational) -> Self {
        q.clone()
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_exact() -> bool {
        true
    }

    fn precision(&self) -> Option<usize> {
        None
    }
}

impl RealScalar for BigRational {
    type Complex = GaussianRational;

    fn signum_i8(&self) -> i8 {
        if Zero::is_zero(self) {
            0
        } else if self.is_negative() {
            -1
        } else {
            1
        }
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn try_exp(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            Ok(self.int_like(1))
        } else {
            Err(Error::Inexact(format!("exp({self}) is irrational")))
        }
    }

    fn to_hp(&self, prec: usize) -> HpReal {
        HpReal::from_rational(self, prec)
    }

    fn from_hp(x: &HpReal) -> Self {
        x.to_rational()
    }
}

impl Scalar for GaussianRational {
    fn int_like(&self, v: i64) -> Self {
        GaussianRational::from_int(v)
    }

    fn rational_like(&self, q: &ExactRational) -> Self {
        GaussianRational::real(q.clone())
    }

    fn is_zero(&self) -> bool {
        GaussianRational::is_zero(self)
    }

    fn is_exact() -> bool {
        true
    }

    fn precision(&self) -> Option<usize> {
        None
    }
}

impl ComplexScalar for GaussianRational {
    type Real = BigRational;

    fn from_parts(re: BigRational, im: BigRational) -> Self {
        GaussianRational::new(re, im)
    }

    fn re(&self) -> BigRational {
        self.re.clone()
    }

    fn im(&self) -> BigRational {
        self.im.clone()
    }

    fn conj(&self) -> Self {
        GaussianRational::conj(self)
    }

    fn to_hp(&self, prec: usize) -> HpComplex {
        HpComplex::from_gaussian(self, prec)
    }
}

impl Scalar for HpReal {
    fn int_like(&self, v: i64) -> Self {
        HpReal::from_i64(v, self.precision())
    }

    fn rational_like(&self, q: &ExactRational) -> Self {
        HpReal::from_rational(q, self.precision())
    }

    fn is_zero(&self) -> bool {
        HpReal::is_zero(self)
    }

    fn is_exact() -> bool {
        false
    }

    fn precision(&self) -> Option<usize> {
        Some(HpReal::precision(self))
    }
}

impl RealScalar for HpReal {
    type Complex = HpComplex;

    fn signum_i8(&self) -> i8 {
        HpReal::signum_i8(self)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn try_exp(&self) -> Result<Self> {
        self.exp()
    }

    fn to_hp(&self, prec: usize) -> HpReal {
        self.with_precision(prec)
    }

    fn from_hp(x: &HpReal) -> Self {
        x.clone()
    }
}

impl Scalar for HpComplex {
    fn int_like(&self, v: i64) -> Self {
        HpComplex::from_i64(v, self.precision())
    }

    fn rational_like(&self, q: &ExactRational) -> Self {
        HpComplex::real(HpReal::from_rational(q, self.precision()))
    }

    fn is_zero(&self) -> bool {
        HpComplex::is_zero(self)
    }

    fn is_exact() -> bool {
        false
    }

    fn precision(&self) -> Option<usize> {
        Some(HpComplex::precision(self))
    }
}

impl ComplexScalar for HpComplex {
    type Real = HpReal;

    fn from_parts(re: HpReal, im: HpReal) -> Self {
        HpComplex::new(re, im)
    }

    fn re(&self) -> HpReal {
        self.re.clone()
    }

    fn im(&self) -> HpReal {
        self.im.clone()
    }

    fn conj(&self) -> Self {
        HpComplex::conj(self)
    }

    fn to_hp(&self, prec: usize) -> HpComplex {
        self.with_precision(prec)
    }
}
