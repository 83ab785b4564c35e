//! Exact integers, rationals and Gaussian rationals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision integer.
pub type ExactInt = BigInt;

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
pub type ExactRational = BigRational;

/// Shorthand for an integer-valued rational.
pub fn rat(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Shorthand for `n / d`. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"`, `"p"`, or an exact decimal such as `"-0.125"` or `"1e-30"`.
pub fn parse_rational(s: &str) -> Result<ExactRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse("empty rational"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| Error::parse(format!("bad numerator in {s:?}")))?;
        let d = BigInt::from_str(d.trim()).map_err(|_| Error::parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(BigRational::from_integer(n));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<ExactRational> {
    let bad = || Error::parse(format!("not a rational or decimal: {s:?}"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n = BigInt::from_str(&digits).map_err(|_| bad())?;
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Formats as `"p/q"`, or `"p"` for integers.
pub fn format_rational(q: &ExactRational) -> String {
    q.to_string()
}

/// `2^e` for an integer exponent of either sign.
pub fn pow2_exact(e: &BigInt) -> Result<ExactRational> {
    let mag: u64 = e.abs().try_into().map_err(|_| Error::Range(format!("exponent {e} too large for exact 2^e")))?;
    if mag > (1 << 26) {
        return Err(Error::Range(format!("exponent {e} too large for exact 2^e")));
    }
    let p = BigInt::one() << mag;
    Ok(if e.is_negative() { BigRational::new(BigInt::one(), p) } else { BigRational::from_integer(p) })
}

/// Serde adapter storing an [`ExactRational`] as its `"p/q"` string.
pub mod serde_rational {
    use super::{format_rational, parse_rational, ExactRational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &ExactRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExactRational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }
}

/// A complex number with rational real and imaginary parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussianRational {
    pub re: ExactRational,
    pub im: ExactRational,
}

impl GaussianRational {
    pub fn new(re: ExactRational, im: ExactRational) -> Self {
        Self { re, im }
    }

    pub fn real(re: ExactRational) -> Self {
        Self { re, im: BigRational::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::real(rat(n))
    }

    pub fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `|z|^2`, exact.
    pub fn norm_sqr(&self) -> ExactRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn recip(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        Ok(Self { re: &self.re / &n, im: -(&self.im / &n) })
    }

    /// Parses a real value in any format accepted by [`parse_rational`].
    pub fn parse_real(s: &str) -> Result<Self> {
        parse_rational(s).map(Self::real)
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -self.im.clone())
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(self.re * o.re);
        }
        Self { re: &self.re * &o.re - &self.im * &o.im, im: &self.re * &o.im + &self.im * &o.re }
    }
}

impl Div for GaussianRational {
    type Output = Self;
    /// Panics on division by zero, like the underlying rationals.
    fn div(self, o: Self) -> Self {
        if o.im.is_zero() {
            return Self { re: self.re / &o.re, im: self.im / o.re };
        }
        self * o.recip().expect("division by zero Gaussian rational")
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        Self { re: -self.re, im: -self.im }
    }
}

#[derive(Serialize, Deserialize)]
struct GaussianRepr {
    re: String,
    #[serde(default = "zero_string")]
    im: String,
}

fn zero_string() -> String {
    "0".into()
}

impl Serialize for GaussianRational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GaussianRepr { re: format_rational(&self.re), im: format_rational(&self.im) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for GaussianRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GaussianRepr::deserialize(d)?;
        let re = parse_rational(&r.re).map_err(serde::de::Error::custom)?;
        let im = parse_rational(&r.im).map_err(serde::de::Error::custom)?;
        Ok(Self { re, im })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("-7").unwrap(), rat(-7));
        assert_eq!(parse_rational("-0.125").unwrap(), ratio(-1, 8));
        assert_eq!(parse_rational("2.5e2").unwrap(), rat(250));
        let tiny = parse_rational("1e-30").unwrap();
        assert_eq!(tiny.denom(), &num_traits::pow(BigInt::from(10), 30));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn rationals_are_normalized() {
        let q = parse_rational("6/-4").unwrap();
        assert_eq!(q.numer(), &BigInt::from(-3));
        assert_eq!(q.denom(), &BigInt::from(2));
        assert_eq!(format_rational(&q), "-3/2");
        assert_eq!(format_rational(&rat(5)), "5");
    }

    #[test]
    fn exact_powers_of_two() {
        assert_eq!(pow2_exact(&BigInt::from(45)).unwrap(), rat(35184372088832));
        assert_eq!(pow2_exact(&BigInt::from(0)).unwrap(), rat(1));
        assert_eq!(pow2_exact(&BigInt::from(-3)).unwrap(), ratio(1, 8));
    }

    #[test]
    fn gaussian_field_ops() {
        let a = GaussianRational::new(ratio(1, 2), rat(2));
        let b = GaussianRational::new(rat(-3), ratio(1, 3));
        let q = a.clone() / b.clone();
        assert_eq!(q * b.clone(), a);
        assert_eq!(a.conj().conj(), a);
        assert_eq!((a.clone() * a.conj()).im, rat(0));
        assert_eq!((a.clone() * a.conj()).re, a.norm_sqr());
        assert!(GaussianRational::zero().recip().is_err());
    }

    #[test]
    fn gaussian_json_shape() {
        let z = GaussianRational::new(ratio(-1, 3), rat(2));
        let s = serde_json::to_string(&z).unwrap();
        assert_eq!(s, r#"{"re":"-1/3","im":"2"}"#);
        let back: GaussianRational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
        let real_only: GaussianRational = serde_json::from_str(r#"{"re":"0.5"}"#).unwrap();
        assert_eq!(real_only, GaussianRational::real(ratio(1, 2)));
    }
}
