use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{parse_rational, rat, serde_rational, ExactRational, HpReal, RealScalar};

/// One resolvent atom `w / (c + t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(with = "serde_rational")]
    pub c: ExactRational,
    #[serde(with = "serde_rational")]
    pub w: ExactRational,
}

/// The scalar function `f` whose divided differences and matrix traces are
/// computed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `e^{σ t}`.
    Exp {
        #[serde(with = "serde_rational")]
        scale: ExactRational,
    },
    /// `1 / (c + t)`.
    Resolvent {
        #[serde(with = "serde_rational")]
        c: ExactRational,
    },
    /// `β + Σ w_k / (c_k + t)`.
    MonotoneRep {
        #[serde(with = "serde_rational")]
        beta: ExactRational,
        atoms: Vec<Atom>,
    },
    /// `s ↦ f(t s)`.
    Scaled {
        base: Box<FunctionSpec>,
        #[serde(with = "serde_rational")]
        t: ExactRational,
    },
}

impl FunctionSpec {
    pub fn exp(scale: ExactRational) -> Self {
        FunctionSpec::Exp { scale }
    }

    pub fn resolvent(c: ExactRational) -> Self {
        FunctionSpec::Resolvent { c }
    }

    pub fn monotone(beta: ExactRational, atoms: Vec<(ExactRational, ExactRational)>) -> Self {
        FunctionSpec::MonotoneRep { beta, atoms: atoms.into_iter().map(|(c, w)| Atom { c, w }).collect() }
    }

    pub fn scaled(base: FunctionSpec, t: ExactRational) -> Self {
        FunctionSpec::Scaled { base: Box::new(base), t }
    }

    /// Checks parameter constraints: `c ≥ 0`, `β ≥ 0`, weights positive.
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::Exp { .. } => Ok(()),
            FunctionSpec::Resolvent { c } if c.is_negative() => Err(Error::invalid(format!("resolvent shift c = {c} must be >= 0"))),
            FunctionSpec::Resolvent { .. } => Ok(()),
            FunctionSpec::MonotoneRep { beta, atoms } => {
                if beta.is_negative() {
                    return Err(Error::invalid(format!("beta = {beta} must be >= 0")));
                }
                for a in atoms {
                    if a.c.is_negative() || !a.w.is_positive() {
                        return Err(Error::invalid(format!("atom (c = {}, w = {}) needs c >= 0, w > 0", a.c, a.w)));
                    }
                }
                Ok(())
            }
            FunctionSpec::Scaled { base, .. } => base.validate(),
        }
    }

    /// True for functions whose divided differences at rational nodes are
    /// rational.
    pub fn is_rational(&self) -> bool {
        match self {
            FunctionSpec::Exp { .. } => false,
            FunctionSpec::Resolvent { .. } | FunctionSpec::MonotoneRep { .. } => true,
            FunctionSpec::Scaled { base, .. } => base.is_rational(),
        }
    }

    /// For `Exp` (possibly scaled) returns the effective exponent scale.
    pub fn exp_scale(&self) -> Option<ExactRational> {
        match self {
            FunctionSpec::Exp { scale } => Some(scale.clone()),
            FunctionSpec::Scaled { base, t } => base.exp_scale().map(|s| s * t),
            _ => None,
        }
    }

    /// `f(x)`.
    pub fn eval<R: RealScalar>(&self, x: &R) -> Result<R> {
        self.taylor_coeff(x, 0)
    }

    /// `f(x)` at `prec` bits.
    pub fn eval_hp(&self, x: &HpReal) -> Result<HpReal> {
        self.taylor_coeff(x, 0)
    }

    /// Taylor coefficient `f^{(m)}(x) / m!`.
    pub fn taylor_coeff<R: RealScalar>(&self, x: &R, m: usize) -> Result<R> {
        match self {
            FunctionSpec::Exp { scale } => {
                let s = x.rational_like(scale);
                let e = (s.clone() * x.clone()).try_exp()?;
                let mut factor = x.one_like();
                for k in 1..=m {
                    factor = factor * s.clone() / x.int_like(k as i64);
                }
                Ok(factor * e)
            }
            FunctionSpec::Resolvent { c } => resolvent_coeff(c, x, m),
            FunctionSpec::MonotoneRep { beta, atoms } => {
                let mut acc = if m == 0 { x.rational_like(beta) } else { x.zero_like() };
                for a in atoms {
                    acc = acc + x.rational_like(&a.w) * resolvent_coeff(&a.c, x, m)?;
                }
                Ok(acc)
            }
            FunctionSpec::Scaled { base, t } => {
                let tt = x.rational_like(t);
                let mut pow = x.one_like();
                for _ in 0..m {
                    pow = pow * tt.clone();
                }
                Ok(pow * base.taylor_coeff(&(tt * x.clone()), m)?)
            }
        }
    }

    /// Fails with a domain (or pole) error when `x` is outside the domain.
    pub fn check_domain<R: RealScalar>(&self, x: &R) -> Result<()> {
        match self {
            FunctionSpec::Exp { .. } => Ok(()),
            FunctionSpec::Resolvent { c } => shifted(c, x).map(|_| ()),
            FunctionSpec::MonotoneRep { atoms, .. } => atoms.iter().try_for_each(|a| shifted(&a.c, x).map(|_| ())),
            FunctionSpec::Scaled { base, t } => base.check_domain(&(x.rational_like(t) * x.clone())),
        }
    }
}

/// `c + x`, required positive.
fn shifted<R: RealScalar>(c: &ExactRational, x: &R) -> Result<R> {
    let y = x.rational_like(c) + x.clone();
    match y.signum_i8() {
        1 => Ok(y),
        0 => Err(Error::Pole(format!("node {} hits the pole at {}", x.to_hp(64).to_sci(12), -c))),
        _ => Err(Error::domain(format!("node {} lies left of the pole at {}", x.to_hp(64).to_sci(12), -c))),
    }
}

/// `(-1)^m (c + x)^{-m-1}`.
fn resolvent_coeff<R: RealScalar>(c: &ExactRational, x: &R, m: usize) -> Result<R> {
    let y = shifted(c, x)?;
    let inv = x.one_like() / y;
    let mut v = inv.clone();
    for _ in 0..m {
        v = v * inv.clone();
    }
    Ok(if m % 2 == 1 { -v } else { v })
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Exp { scale } if scale.is_one() => write!(f, "exp"),
            FunctionSpec::Exp { scale } => write!(f, "exp:{scale}"),
            FunctionSpec::Resolvent { c } => write!(f, "resolvent:{c}"),
            FunctionSpec::MonotoneRep { beta, atoms } => {
                write!(f, "monotone:{beta}")?;
                for a in atoms {
                    write!(f, ";{},{}", a.c, a.w)?;
                }
                Ok(())
            }
            FunctionSpec::Scaled { base, t } => write!(f, "scaled:{t}:{base}"),
        }
    }
}

/// Parses `exp`, `exp:σ`, `resolvent:c`, `monotone:β;c1,w1;c2,w2` and
/// `scaled:t:<base>`.
impl FromStr for FunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        let spec = match head {
            "exp" if rest.is_empty() => FunctionSpec::exp(rat(1)),
            "exp" => FunctionSpec::exp(parse_rational(rest)?),
            "resolvent" if rest.is_empty() => FunctionSpec::resolvent(ExactRational::zero()),
            "resolvent" => FunctionSpec::resolvent(parse_rational(rest)?),
            "monotone" => {
                let mut parts = rest.split(';');
                let beta = parse_rational(parts.next().unwrap_or("0"))?;
                let atoms = parts
                    .map(|atom| {
                        let (c, w) = atom.split_once(',').ok_or_else(|| Error::parse(format!("atom {atom:?} should read c,w")))?;
                        Ok((parse_rational(c)?, parse_rational(w)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FunctionSpec::monotone(beta, atoms)
            }
            "scaled" => {
                let (t, base) = rest.split_once(':').ok_or_else(|| Error::parse("scaled needs the form scaled:t:<function>"))?;
                FunctionSpec::scaled(base.parse()?, parse_rational(t)?)
            }
            _ => return Err(Error::parse(format!("unknown function {s:?}"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::ratio;

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["exp", "exp:-1", "resolvent:1/2", "monotone:0;1,1;2,1/3", "scaled:1/3:exp"] {
            let f: FunctionSpec = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
        assert!("resolvent:-1".parse::<FunctionSpec>().is_err());
        assert!("monotone:0;1,0".parse::<FunctionSpec>().is_err());
        assert!("sin".parse::<FunctionSpec>().is_err());
    }

    #[test]
    fn resolvent_taylor_coefficients() {
        let f = FunctionSpec::resolvent(rat(0));
        assert_eq!(f.eval(&rat(2)).unwrap(), ratio(1, 2));
        // 1/t at t = 1: coefficients (-1)^m.
        for m in 0..6 {
            let want = if m % 2 == 0 { rat(1) } else { rat(-1) };
            assert_eq!(f.taylor_coeff(&rat(1), m).unwrap(), want);
        }
        assert!(matches!(f.eval(&rat(0)), Err(Error::Pole(_))));
        assert!(f.eval(&rat(-1)).unwrap_err().is_domain());
    }

    #[test]
    fn monotone_is_linear_in_atoms() {
        let f = FunctionSpec::monotone(rat(2), vec![(rat(1), rat(3)), (rat(0), ratio(1, 2))]);
        let x = ratio(3, 2);
        let direct = rat(2) + rat(3) / (rat(1) + x.clone()) + ratio(1, 2) / x.clone();
        assert_eq!(f.eval(&x).unwrap(), direct);
        let d1 = -rat(3) / ((rat(1) + x.clone()) * (rat(1) + x.clone())) - ratio(1, 2) / (x.clone() * x.clone());
        assert_eq!(f.taylor_coeff(&x, 1).unwrap(), d1);
    }

    #[test]
    fn scaled_chain_rule() {
        let f = FunctionSpec::scaled(FunctionSpec::resolvent(rat(1)), rat(2));
        // f(s) = 1/(1+2s), f'(s) = -2/(1+2s)^2.
        assert_eq!(f.eval(&rat(1)).unwrap(), ratio(1, 3));
        assert_eq!(f.taylor_coeff(&rat(1), 1).unwrap(), ratio(-2, 9));
        assert_eq!(f.exp_scale(), None);
        let g = FunctionSpec::scaled(FunctionSpec::exp(rat(-1)), ratio(1, 3));
        assert_eq!(g.exp_scale(), Some(ratio(-1, 3)));
    }

    #[test]
    fn exp_is_inexact_over_rationals() {
        let f = FunctionSpec::exp(rat(1));
        assert_eq!(f.eval(&rat(0)).unwrap(), rat(1));
        assert!(matches!(f.eval(&rat(1)), Err(Error::Inexact(_))));
        let x = HpReal::from_i64(1, 128);
        let e = f.taylor_coeff(&x, 2).unwrap();
        let half_e = HpReal::one(128).exp().unwrap() / HpReal::from_i64(2, 128);
        assert!((e - half_e).abs() < HpReal::one(128).mul_pow2(-120));
    }

    #[test]
    fn json_shape() {
        let f = FunctionSpec::monotone(rat(0), vec![(rat(1), ratio(1, 2))]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"kind":"monotone_rep","beta":"0","atoms":[{"c":"1","w":"1/2"}]}"#);
        assert_eq!(serde_json::from_str::<FunctionSpec>(&s).unwrap(), f);
    }
}
