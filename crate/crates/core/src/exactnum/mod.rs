//! Exact scalars (integers, rationals, Gaussian rationals), high-precision
//! floats, and exact powers of two.

mod hp;
mod rational;
mod scalar;

use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use hp::{HpComplex, HpReal, DEFAULT_PRECISION, MIN_PRECISION};
pub use rational::{format_rational, parse_rational, pow2_exact, rat, ratio, serde_rational, ExactInt, ExactRational, GaussianRational};
pub use scalar::{ComplexScalar, RealScalar, Scalar};

use crate::error::Result;

/// A real result that is either exact or a float approximation, tagged by
/// which path produced it.
#[derive(Clone, Debug, PartialEq)]
pub enum RealValue {
    Exact(ExactRational),
    Float(HpReal),
}

impl RealValue {
    pub fn is_exact(&self) -> bool {
        matches!(self, RealValue::Exact(_))
    }

    pub fn to_hp(&self, prec: usize) -> HpReal {
        match self {
            RealValue::Exact(q) => HpReal::from_rational(q, prec),
            RealValue::Float(x) => x.with_precision(prec),
        }
    }

    /// "exact" or "float".
    pub fn mode(&self) -> &'static str {
        if self.is_exact() {
            "exact"
        } else {
            "float"
        }
    }

    pub fn signum_i8(&self) -> i8 {
        match self {
            RealValue::Exact(q) => q.signum_i8(),
            RealValue::Float(x) => x.signum_i8(),
        }
    }

    /// Text form: `p/q` when exact, scientific notation with `digits`
    /// significant digits otherwise.
    pub fn to_text(&self, digits: usize) -> String {
        match self {
            RealValue::Exact(q) => format_rational(q),
            RealValue::Float(x) => x.to_sci(digits),
        }
    }
}

impl fmt::Display for RealValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealValue::Exact(q) => write!(f, "{q}"),
            RealValue::Float(x) => write!(f, "{x}"),
        }
    }
}

/// `2^e`: exact when `e` is an integer, otherwise `exp(e ln 2)` at `prec` bits.
pub fn exp_pow2(e: &ExactRational, prec: usize) -> Result<RealValue> {
    if e.is_integer() {
        return pow2_exact(e.numer()).map(RealValue::Exact);
    }
    let guard = prec + 32;
    let x = HpReal::from_rational(e, guard) * HpReal::ln2(guard);
    Ok(RealValue::Float(x.exp()?.with_precision(prec)))
}

/// `e^x` for a real argument.
pub fn hp_exp(x: &HpReal) -> Result<HpReal> {
    x.exp()
}

/// `e^z` for a complex argument.
pub fn hp_exp_complex(z: &HpComplex) -> Result<HpComplex> {
    z.exp()
}

/// A real number `q * ln 2` stored through its rational coefficient `q`, so
/// that `exp` of it is the exact power `2^q` whenever `q` is an integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Log2Multiple {
    pub coeff: ExactRational,
}

impl Log2Multiple {
    pub fn new(coeff: ExactRational) -> Self {
        Self { coeff }
    }

    pub fn from_int(k: i64) -> Self {
        Self { coeff: rat(k) }
    }

    pub fn zero() -> Self {
        Self { coeff: ExactRational::zero() }
    }

    pub fn exp(&self, prec: usize) -> Result<RealValue> {
        exp_pow2(&self.coeff, prec)
    }

    /// The real value `q ln 2`.
    pub fn value(&self, prec: usize) -> HpReal {
        HpReal::from_rational(&self.coeff, prec + 16) * HpReal::ln2(prec + 16)
    }
}

#[derive(Serialize, Deserialize)]
struct Log2Repr {
    log2_coeff: String,
}

impl Serialize for Log2Multiple {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Log2Repr { log2_coeff: format_rational(&self.coeff) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Log2Multiple {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = Log2Repr::deserialize(d)?;
        parse_rational(&r.log2_coeff).map(Log2Multiple::new).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // ln 2 from the series ln 2 = sum_{k>=1} 1/(k 2^k), summed in exact
    // rationals; independent of the float library's constant.
    fn ln2_series(prec: usize) -> HpReal {
        let mut sum = ExactRational::zero();
        for k in 1..(prec as i64 + 20) {
            sum += ExactRational::new(1.into(), ExactInt::from(k) * (ExactInt::from(1) << k as usize));
        }
        HpReal::from_rational(&sum, prec)
    }

    // pi by Machin's formula, again in exact rationals.
    fn pi_machin(prec: usize) -> HpReal {
        fn atan_inv(x: i64, terms: usize) -> ExactRational {
            let mut s = ExactRational::zero();
            let x2 = ExactInt::from(x * x);
            let mut pow = ExactInt::from(x);
            for k in 0..terms {
                let term = ExactRational::new(1.into(), pow.clone() * ExactInt::from(2 * k as i64 + 1));
                if k % 2 == 0 {
                    s += term;
                } else {
                    s -= term;
                }
                pow *= &x2;
            }
            s
        }
        let terms = prec / 4 + 10;
        let pi = rat(16) * atan_inv(5, terms) - rat(4) * atan_inv(239, terms);
        HpReal::from_rational(&pi, prec)
    }

    fn tol(bits: i32, prec: usize) -> HpReal {
        HpReal::one(prec).mul_pow2(-bits)
    }

    #[test]
    fn exp_pow2_integer_is_exact() {
        assert_eq!(exp_pow2(&rat(45), 256).unwrap(), RealValue::Exact(rat(35184372088832)));
        assert_eq!(exp_pow2(&rat(0), 256).unwrap(), RealValue::Exact(rat(1)));
        assert_eq!(exp_pow2(&rat(-2), 256).unwrap(), RealValue::Exact(ratio(1, 4)));
    }

    #[test]
    fn exp_pow2_half_is_sqrt2() {
        let v = exp_pow2(&ratio(1, 2), 128).unwrap();
        assert!(!v.is_exact());
        let sqrt2 = HpReal::from_i64(2, 192).sqrt().unwrap();
        let err = (v.to_hp(192) - sqrt2).abs();
        assert!(err < tol(124, 192), "err = {err:?}");
    }

    #[test]
    fn hp_exp_examples() {
        assert_eq!(hp_exp(&HpReal::zero(256)).unwrap(), HpReal::one(256));
        let two = hp_exp(&ln2_series(256)).unwrap();
        assert!((two - HpReal::from_i64(2, 256)).abs() < tol(250, 256));
        let ipi = HpComplex::new(HpReal::zero(256), pi_machin(256));
        let m1 = hp_exp_complex(&ipi).unwrap();
        assert!((m1.re.clone() + HpReal::one(256)).abs() < tol(250, 256));
        assert!(m1.im.abs() < tol(250, 256));
    }

    #[test]
    fn library_constants_match_series() {
        assert!((HpReal::ln2(256) - ln2_series(256)).abs() < tol(254, 256));
        assert!((HpReal::pi(256) - pi_machin(256)).abs() < tol(252, 256));
    }

    #[test]
    fn higher_precision_refines() {
        let e = ratio(1, 3);
        let reference = exp_pow2(&e, 512).unwrap().to_hp(512);
        let mut last = None;
        for prec in [64, 128, 256] {
            let err = (exp_pow2(&e, prec).unwrap().to_hp(512) - reference.clone()).abs();
            if let Some(prev) = last {
                assert!(err <= prev);
            }
            last = Some(err);
        }
        // Exact results do not depend on precision.
        assert_eq!(exp_pow2(&rat(7), 64).unwrap(), exp_pow2(&rat(7), 1024).unwrap());
    }

    #[test]
    fn log2_multiple_json() {
        let m = Log2Multiple::new(ratio(69, 3));
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"log2_coeff":"23"}"#);
        let back: Log2Multiple = serde_json::from_str(r#"{"log2_coeff":"-5/2"}"#).unwrap();
        assert_eq!(back.coeff, ratio(-5, 2));
        assert_eq!(Log2Multiple::from_int(3).exp(128).unwrap(), RealValue::Exact(rat(8)));
    }

    fn small_rat() -> impl Strategy<Value = ExactRational> {
        (-1000i64..1000, 1i64..200).prop_map(|(n, d)| ratio(n, d))
    }

    proptest! {
        #[test]
        fn rational_distributivity(a in small_rat(), b in small_rat(), c in small_rat()) {
            prop_assert_eq!((&a + &b) * &c, &a * &c + &b * &c);
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn gaussian_distributivity(a in small_rat(), b in small_rat(), c in small_rat(), d in small_rat()) {
            let z = GaussianRational::new(a.clone(), b.clone());
            let w = GaussianRational::new(c.clone(), d.clone());
            let u = GaussianRational::new(b, c);
            prop_assert_eq!((z.clone() + w.clone()) * u.clone(), z.clone() * u.clone() + w.clone() * u);
            prop_assert_eq!(z.conj().conj(), z);
        }

        #[test]
        fn exp_pow2_is_multiplicative(a in -200i64..200, b in -200i64..200) {
            let lhs = exp_pow2(&rat(a + b), 64).unwrap();
            let (RealValue::Exact(x), RealValue::Exact(y)) =
                (exp_pow2(&rat(a), 64).unwrap(), exp_pow2(&rat(b), 64).unwrap()) else { unreachable!() };
            prop_assert_eq!(lhs, RealValue::Exact(x * y));
        }
    }
}
