//! High-precision binary floating point backed by `astro-float`.
//!
//! Every value carries its working precision in bits. Binary operations run
//! at the larger precision of the two operands, so low-precision integer
//! constants (built with [`HpReal::from_i64`] at [`MIN_PRECISION`]) combine
//! with full-precision values without degrading them.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::Zero;

use super::rational::ExactRational;
use crate::error::{Error, Result};

/// Smallest supported working precision in bits.
pub const MIN_PRECISION: usize = 64;

/// Default working precision in bits.
pub const DEFAULT_PRECISION: usize = 256;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("astro-float constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

fn clamp_prec(p: usize) -> usize {
    p.max(MIN_PRECISION)
}

/// A real number at a configurable binary precision.
#[derive(Clone)]
pub struct HpReal {
    v: BigFloat,
    prec: usize,
}

impl HpReal {
    fn wrap(v: BigFloat, prec: usize) -> Self {
        Self { v, prec }
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    /// The same value re-rounded to `prec` bits.
    pub fn with_precision(&self, prec: usize) -> Self {
        let prec = clamp_prec(prec);
        let mut v = self.v.clone();
        // Widening never fails; narrowing rounds.
        let _ = v.set_precision(prec, RM);
        Self::wrap(v, prec)
    }

    pub fn zero(prec: usize) -> Self {
        Self::from_i64(0, prec)
    }

    pub fn one(prec: usize) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(n: i64, prec: usize) -> Self {
        let prec = clamp_prec(prec);
        Self::wrap(BigFloat::from_i64(n, prec), prec)
    }

    pub fn from_f64(x: f64, prec: usize) -> Self {
        let prec = clamp_prec(prec);
        Self::wrap(BigFloat::from_f64(x, prec), prec)
    }

    pub fn from_bigint(n: &BigInt, prec: usize) -> Self {
        let prec = clamp_prec(prec);
        if let Ok(small) = i64::try_from(n) {
            return Self::from_i64(small, prec);
        }
        let s = n.to_string();
        let v = with_consts(|cc| BigFloat::parse(&s, Radix::Dec, prec, RM, cc));
        Self::wrap(v, prec)
    }

    /// Nearest representable value to `q` at `prec` bits.
    pub fn from_rational(q: &ExactRational, prec: usize) -> Self {
        let prec = clamp_prec(prec);
        let guard = prec + 64;
        let n = Self::from_bigint(q.numer(), guard);
        if q.denom() == &BigInt::from(1) {
            return n.with_precision(prec);
        }
        let d = Self::from_bigint(q.denom(), guard);
        Self::wrap(n.v.div(&d.v, prec, RM), prec)
    }

    /// Parses a decimal (`"1.5e-3"`) or a rational (`"3/7"`).
    pub fn parse(s: &str, prec: usize) -> Result<Self> {
        let s = s.trim();
        if s.contains('/') {
            let q = super::rational::parse_rational(s)?;
            return Ok(Self::from_rational(&q, prec));
        }
        let prec = clamp_prec(prec);
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, prec, RM, cc));
        if v.is_nan() || v.is_inf() {
            return Err(Error::parse(format!("not a number: {s:?}")));
        }
        Ok(Self::wrap(v, prec))
    }

    pub fn pi(prec: usize) -> Self {
        let prec = clamp_prec(prec);
        Self::wrap(with_consts(|cc| cc.pi(prec, RM)), prec)
    }

    pub fn ln2(prec: usize) -> Self {
        let prec = clamp_prec(prec);
        Self::wrap(with_consts(|cc| cc.ln_2(prec, RM)), prec)
    }

    fn p2(&self, o: &Self) -> usize {
        self.prec.max(o.prec)
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !(self.v.is_nan() || self.v.is_inf())
    }

    pub fn is_negative(&self) -> bool {
        !self.v.is_zero() && self.v.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        !self.v.is_zero() && self.v.is_positive()
    }

    /// -1, 0 or 1.
    pub fn signum_i8(&self) -> i8 {
        if self.v.is_zero() {
            0
        } else if self.v.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn abs(&self) -> Self {
        Self::wrap(self.v.abs(), self.prec)
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::domain("square root of a negative number"));
        }
        Ok(Self::wrap(self.v.sqrt(self.prec, RM), self.prec))
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.v.reciprocal(self.prec, RM), self.prec)
    }

    /// `e^x`; overflow of the exponent range is a range error.
    pub fn exp(&self) -> Result<Self> {
        let r = with_consts(|cc| self.v.exp(self.prec, RM, cc));
        if r.is_inf() || r.is_nan() {
            return Err(Error::Range(format!("exp overflow for argument {}", self.to_sci(20))));
        }
        Ok(Self::wrap(r, self.prec))
    }

    pub fn ln(&self) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::domain("logarithm of a non-positive number"));
        }
        Ok(Self::wrap(with_consts(|cc| self.v.ln(self.prec, RM, cc)), self.prec))
    }

    pub fn sin(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.sin(self.prec, RM, cc)), self.prec)
    }

    pub fn cos(&self) -> Self {
        Self::wrap(with_consts(|cc| self.v.cos(self.prec, RM, cc)), self.prec)
    }

    pub fn powi(&self, n: u32) -> Self {
        Self::wrap(self.v.powi(n as usize, self.prec, RM), self.prec)
    }

    /// Multiplies by `2^k` exactly.
    pub fn mul_pow2(&self, k: i32) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = self.v.clone();
        let e = v.exponent().unwrap_or(0);
        v.set_exponent(e + k);
        Self::wrap(v, self.prec)
    }

    /// Binary exponent `e` with `2^(e-1) <= |x| < 2^e`; `None` for zero.
    pub fn exponent(&self) -> Option<i32> {
        if self.is_zero() {
            None
        } else {
            self.v.exponent()
        }
    }

    pub fn max(&self, o: &Self) -> Self {
        if self >= o {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn min(&self, o: &Self) -> Self {
        if self <= o {
            self.clone()
        } else {
            o.clone()
        }
    }

    /// Approximate `f64` value.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // Route through a short decimal string; exact enough for reporting.
        self.to_sci(20).parse().unwrap_or(f64::NAN)
    }

    /// Exact rational value of the binary float.
    pub fn to_rational(&self) -> ExactRational {
        if self.is_zero() {
            return ExactRational::zero();
        }
        let (words, _, sign, exp, _) = self.v.as_raw_parts().expect("finite value");
        let mut mant = BigInt::zero();
        for w in words.iter().rev() {
            mant = (mant << 64) + BigInt::from(*w);
        }
        let bits = (words.len() * 64) as i64;
        let shift = exp as i64 - bits;
        if sign == Sign::Neg {
            mant = -mant;
        }
        let one = BigInt::from(1);
        if shift >= 0 {
            ExactRational::from_integer(mant << shift as usize)
        } else {
            ExactRational::new(mant, one << (-shift) as usize)
        }
    }

    /// Scientific notation with `digits` significant decimal digits.
    pub fn to_sci(&self, digits: usize) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let full = self.v.to_string();
        shorten_sci(&full, digits.max(1))
    }
}

/// Rounds a `d.ddddde+x` string to `digits` significant digits.
fn shorten_sci(full: &str, digits: usize) -> String {
    let (mant, exp) = match full.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => (full, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant),
    };
    let mut ds: Vec<u8> = mant.bytes().filter(|b| b.is_ascii_digit()).map(|b| b - b'0').collect();
    let mut exp = exp;
    if ds.len() > digits {
        let round_up = ds[digits] >= 5;
        ds.truncate(digits);
        if round_up {
            let mut i = digits;
            loop {
                if i == 0 {
                    ds.insert(0, 1);
                    ds.truncate(digits);
                    exp += 1;
                    break;
                }
                i -= 1;
                if ds[i] == 9 {
                    ds[i] = 0;
                } else {
                    ds[i] += 1;
                    break;
                }
            }
        }
    }
    while ds.len() > 1 && *ds.last().unwrap() == 0 {
        ds.pop();
    }
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push((b'0' + ds[0]) as char);
    if ds.len() > 1 {
        out.push('.');
        out.extend(ds[1..].iter().map(|d| (b'0' + d) as char));
    }
    if exp != 0 {
        out.push_str(&format!("e{exp}"));
    }
    out
}

impl fmt::Debug for HpReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HpReal({}, {}b)", self.to_sci(24), self.prec)
    }
}

impl fmt::Display for HpReal {
    /// Prints every decimal digit the precision supports.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = (self.prec as f64 * std::f64::consts::LOG10_2).floor() as usize;
        write!(f, "{}", self.to_sci(digits))
    }
}

impl PartialEq for HpReal {
    fn eq(&self, o: &Self) -> bool {
        self.v.cmp(&o.v) == Some(0)
    }
}

impl PartialOrd for HpReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.v.cmp(&o.v).map(|c| c.cmp(&0))
    }
}

impl Add for HpReal {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let p = self.p2(&o);
        Self::wrap(self.v.add(&o.v, p, RM), p)
    }
}

impl Sub for HpReal {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let p = self.p2(&o);
        Self::wrap(self.v.sub(&o.v, p, RM), p)
    }
}

impl Mul for HpReal {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let p = self.p2(&o);
        Self::wrap(self.v.mul(&o.v, p, RM), p)
    }
}

impl Div for HpReal {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let p = self.p2(&o);
        Self::wrap(self.v.div(&o.v, p, RM), p)
    }
}

impl Neg for HpReal {
    type Output = Self;
    fn neg(self) -> Self {
        Self::wrap(self.v.neg(), self.prec)
    }
}

impl<'a> Add<&'a HpReal> for &'a HpReal {
    type Output = HpReal;
    fn add(self, o: &HpReal) -> HpReal {
        let p = self.p2(o);
        HpReal::wrap(self.v.add(&o.v, p, RM), p)
    }
}

impl<'a> Sub<&'a HpReal> for &'a HpReal {
    type Output = HpReal;
    fn sub(self, o: &HpReal) -> HpReal {
        let p = self.p2(o);
        HpReal::wrap(self.v.sub(&o.v, p, RM), p)
    }
}

impl<'a> Mul<&'a HpReal> for &'a HpReal {
    type Output = HpReal;
    fn mul(self, o: &HpReal) -> HpReal {
        let p = self.p2(o);
        HpReal::wrap(self.v.mul(&o.v, p, RM), p)
    }
}

impl<'a> Div<&'a HpReal> for &'a HpReal {
    type Output = HpReal;
    fn div(self, o: &HpReal) -> HpReal {
        let p = self.p2(o);
        HpReal::wrap(self.v.div(&o.v, p, RM), p)
    }
}

/// A complex number with [`HpReal`] parts.
#[derive(Clone, Debug, PartialEq)]
pub struct HpComplex {
    pub re: HpReal,
    pub im: HpReal,
}

impl HpComplex {
    pub fn new(re: HpReal, im: HpReal) -> Self {
        Self { re, im }
    }

    pub fn real(re: HpReal) -> Self {
        let im = HpReal::zero(re.precision());
        Self { re, im }
    }

    pub fn zero(prec: usize) -> Self {
        Self::real(HpReal::zero(prec))
    }

    pub fn one(prec: usize) -> Self {
        Self::real(HpReal::one(prec))
    }

    pub fn from_i64(n: i64, prec: usize) -> Self {
        Self::real(HpReal::from_i64(n, prec))
    }

    pub fn from_gaussian(z: &super::GaussianRational, prec: usize) -> Self {
        Self::new(HpReal::from_rational(&z.re, prec), HpReal::from_rational(&z.im, prec))
    }

    pub fn precision(&self) -> usize {
        self.re.precision().max(self.im.precision())
    }

    pub fn with_precision(&self, prec: usize) -> Self {
        Self::new(self.re.with_precision(prec), self.im.with_precision(prec))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    pub fn norm_sqr(&self) -> HpReal {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn abs(&self) -> HpReal {
        if self.im.is_zero() {
            return self.re.abs();
        }
        if self.re.is_zero() {
            return self.im.abs();
        }
        self.norm_sqr().sqrt().expect("non-negative")
    }

    /// Larger of `|re|`, `|im|`; a cheap norm for convergence tests.
    pub fn abs_max(&self) -> HpReal {
        self.re.abs().max(&self.im.abs())
    }

    pub fn scale(&self, s: &HpReal) -> Self {
        Self::new(&self.re * s, &self.im * s)
    }

    pub fn exp(&self) -> Result<Self> {
        let m = self.re.exp()?;
        if self.im.is_zero() {
            let im = HpReal::zero(m.precision());
            return Ok(Self::new(m, im));
        }
        Ok(Self::new(&m * &self.im.cos(), &m * &self.im.sin()))
    }
}

impl fmt::Display for HpComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{} + {}i", self.re, self.im)
        }
    }
}

impl Add for HpComplex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for HpComplex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for HpComplex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            let re = self.re * o.re;
            let im = HpReal::zero(re.precision());
            return Self::new(re, im);
        }
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        Self::new(re, im)
    }
}

impl Div for HpComplex {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        if o.im.is_zero() {
            return Self::new(&self.re / &o.re, &self.im / &o.re);
        }
        let d = o.norm_sqr();
        let num = self * o.conj();
        Self::new(&num.re / &d, &num.im / &d)
    }
}

impl Neg for HpComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}
