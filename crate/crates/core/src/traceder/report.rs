use serde::Serialize;

use super::{shift_frame, trace_derivative};
use crate::divdiff::FunctionSpec;
use crate::error::{Error, Result};
use crate::exactnum::{format_rational, serde_rational, ExactRational, HpReal, RealValue};
use crate::linalg::{to_eigenframe, AnyFrame, HermitianMatrix};

/// Limits on derivative order and dimension; the loop sum visits `n^p`
/// index tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub max_order: usize,
    pub max_dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self { max_order: 8, max_dim: 8 }
    }
}

impl Caps {
    pub fn check(&self, n: usize, p: usize) -> Result<()> {
        if p > self.max_order {
            return Err(Error::Cap(format!("order {p} exceeds the cap {}", self.max_order)));
        }
        if n > self.max_dim {
            return Err(Error::Cap(format!("dimension {n} exceeds the cap {}", self.max_dim)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "-")]
    Negative,
    #[serde(rename = "0")]
    Zero,
}

/// `(-1)^p d^p/dt^p tr f(A + t B)` at one grid point.
#[derive(Clone, Debug, Serialize)]
pub struct ReportEntry {
    #[serde(with = "serde_rational")]
    pub t0: ExactRational,
    pub p: usize,
    pub value: String,
    pub sign: Sign,
    pub certified: bool,
    pub mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<String>,
    #[serde(skip)]
    pub raw: RealValue,
}

#[derive(Clone, Debug, Serialize)]
pub struct DerivativeReport {
    pub entries: Vec<ReportEntry>,
}

impl DerivativeReport {
    /// True when no entry is classified negative.
    pub fn alternates(&self) -> bool {
        self.entries.iter().all(|e| e.sign != Sign::Negative)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &ReportEntry> {
        self.entries.iter().filter(|e| e.sign == Sign::Negative)
    }
}

/// Decimal digits carried by `prec` bits.
pub fn digits_for(prec: usize) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).floor() as usize
}

/// Signs of `(-1)^p f^{(p)}` for `p = 1..=max_order` at every grid point.
///
/// Entries at `t0 = 0` over an exact frame with a resolvent-family `f` are
/// exact and certified. Everything else runs in float on the re-diagonalized
/// frame of `A + t0 B`, and values within `2^(-prec/3)` of zero are
/// classified as zero.
pub fn complete_monotonicity_report(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    f: &FunctionSpec,
    max_order: usize,
    grid: &[ExactRational],
    caps: &Caps,
    prec: usize,
) -> Result<DerivativeReport> {
    f.validate()?;
    caps.check(a.n(), max_order)?;
    let frame = to_eigenframe(a, b, prec)?;
    let tol = HpReal::one(prec).mul_pow2(-(prec as i32) / 3);
    let digits = digits_for(prec);
    let mut entries = Vec::new();
    for t0 in grid {
        if t0 < &ExactRational::from_integer(0.into()) {
            return Err(Error::domain(format!("grid point {t0} is negative")));
        }
        let exact = match &frame {
            AnyFrame::Exact(fr) if f.is_rational() && num_traits::Zero::is_zero(t0) => Some(fr),
            _ => None,
        };
        let shifted = match exact {
            Some(_) => None,
            None => Some(shift_frame(&frame.to_float(prec), t0, prec)?),
        };
        for p in 1..=max_order {
            let odd = p % 2 == 1;
            let entry = match (exact, &shifted) {
                (Some(fr), _) => {
                    let d = trace_derivative(fr, f, p)?;
                    let v = if odd { -d } else { d };
                    ReportEntry {
                        t0: t0.clone(),
                        p,
                        value: format_rational(&v),
                        sign: sign_of(RealValue::Exact(v.clone()).signum_i8()),
                        certified: true,
                        mode: "exact",
                        tolerance: None,
                        raw: RealValue::Exact(v),
                    }
                }
                (None, Some(fr)) => {
                    let d = trace_derivative(fr, f, p)?;
                    let v = if odd { -d } else { d };
                    let sign = if v.abs() <= tol { Sign::Zero } else { sign_of(v.signum_i8()) };
                    ReportEntry {
                        t0: t0.clone(),
                        p,
                        value: v.to_sci(digits),
                        sign,
                        certified: false,
                        mode: "float",
                        tolerance: Some(tol.to_sci(6)),
                        raw: RealValue::Float(v),
                    }
                }
                (None, None) => unreachable!("a frame is always available"),
            };
            entries.push(entry);
        }
    }
    Ok(DerivativeReport { entries })
}

fn sign_of(s: i8) -> Sign {
    match s {
        1 => Sign::Positive,
        -1 => Sign::Negative,
        _ => Sign::Zero,
    }
}
