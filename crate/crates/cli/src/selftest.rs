use serde_json::{json, Value};
use trace_laplace::divdiff::FunctionSpec;
use trace_laplace::exactnum::{format_rational, rat, GaussianRational, HpReal};
use trace_laplace::formulations::poly_coefficients;
use trace_laplace::linalg::{EigenFrame, HermitianMatrix, Mat};
use trace_laplace::loops::{bmv_example, canonical_loop, fan_family, Variant};
use trace_laplace::traceder::trace_derivative;

/// Reference values the self-test compares against.
#[derive(Clone, Debug)]
pub struct Expectations {
    pub example_original: String,
    pub example_modified: String,
    pub coefficients: [i64; 3],
    pub fan_loop: (i64, i64),
}

impl Default for Expectations {
    fn default() -> Self {
        Self {
            example_original: Variant::Original.expected().into(),
            example_modified: Variant::Modified.expected().into(),
            coefficients: [5, 6, 4],
            fan_loop: (-1, 8),
        }
    }
}

pub struct Check {
    pub name: &'static str,
    pub expected: String,
    pub got: String,
    pub pass: bool,
}

impl Check {
    pub fn to_json(&self) -> Value {
        json!({"name": self.name, "expected": self.expected, "got": self.got, "pass": self.pass})
    }
}

fn compare(name: &'static str, expected: String, got: String) -> Check {
    let pass = expected == got;
    Check { name, expected, got, pass }
}

fn failed(name: &'static str, expected: String, err: trace_laplace::Error) -> Check {
    Check { name, expected, got: format!("error: {err}"), pass: false }
}

pub fn run(want: &Expectations, prec: usize) -> Vec<Check> {
    let mut checks = Vec::new();

    for (name, variant, expected) in
        [("example-original", Variant::Original, &want.example_original), ("example-modified", Variant::Modified, &want.example_modified)]
    {
        checks.push(match bmv_example(variant) {
            Ok(v) => compare(name, expected.clone(), format_rational(&v)),
            Err(e) => failed(name, expected.clone(), e),
        });
    }

    let expected = format!("{:?}", want.coefficients);
    let a = HermitianMatrix::from_rational_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(2)]]);
    let b = HermitianMatrix::from_rational_rows(vec![vec![rat(1), rat(1)], vec![rat(1), rat(1)]]);
    checks.push(match a.and_then(|a| b.and_then(|b| poly_coefficients(&a, &b, 2))) {
        Ok(c) => compare("poly-coefficients", expected, format!("{:?}", c.coeffs.iter().map(|q| q.to_integer()).collect::<Vec<_>>())),
        Err(e) => failed("poly-coefficients", expected, e),
    });

    let (num, den) = want.fan_loop;
    let expected = format!("{num}/{den}");
    checks.push(match fan_family(3, prec).and_then(|f| canonical_loop(&f)) {
        Ok(v) => {
            let target = HpReal::from_i64(num, prec) / HpReal::from_i64(den, prec);
            let close = (v.re.clone() - target).abs() <= HpReal::one(prec).mul_pow2(16 - prec as i32);
            Check { name: "fan-loop", expected, got: v.re.to_sci(20), pass: close }
        }
        Err(e) => failed("fan-loop", expected, e),
    });

    // (-1)^p d^p/dt^p tr (x + t h)^{-1} >= 0 for p = 1..6.
    let h = Mat::from_rows(vec![
        vec![GaussianRational::from_int(2), GaussianRational::from_int(1)],
        vec![GaussianRational::from_int(1), GaussianRational::from_int(1)],
    ])
    .expect("square");
    let expected = "+ + + + + +".to_string();
    let signs = EigenFrame::new(vec![rat(1), rat(2)], h).and_then(|frame| {
        (1..=6)
            .map(|p| {
                let d = trace_derivative(&frame, &FunctionSpec::resolvent(rat(0)), p)?;
                let v = if p % 2 == 1 { -d } else { d };
                Ok(if v > rat(0) {
                    "+"
                } else if v < rat(0) {
                    "-"
                } else {
                    "0"
                })
            })
            .collect::<trace_laplace::Result<Vec<_>>>()
    });
    checks.push(match signs {
        Ok(s) => compare("resolvent-alternation", expected, s.join(" ")),
        Err(e) => failed("resolvent-alternation", expected, e),
    });
    checks
}
