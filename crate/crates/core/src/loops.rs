//! Loop products of vector families, the fan bound, and the third-derivative
//! integrand.
//!
//! A family `a_1..a_n` defines `h = [(a_i | a_j)]`. The canonical loop of
//! length `p` is `(a_1|a_2)(a_2|a_3)⋯(a_p|a_1)`; for unit vectors it is
//! bounded below by `-cos^p(π/p)`, attained by a planar fan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::divdiff::gauss_legendre;
use crate::error::{Error, Result};
use crate::exactnum::{
    exp_pow2, format_rational, parse_rational, serde_rational, ComplexScalar, ExactRational, GaussianRational, HpComplex, HpReal,
    Log2Multiple, RealValue,
};
use crate::linalg::{EigenFrame, GramRows};
use crate::traceder::trace_derivative_exp;

/// Vectors `a_1..a_n` of a common dimension.
pub type VectorFamily<C> = GramRows<C>;

/// `Π_k (a_{i_k} | a_{i_{k+1}})` with wraparound.
pub fn loop_value<C: ComplexScalar>(family: &VectorFamily<C>, indices: &[usize]) -> Result<C> {
    if indices.is_empty() {
        return Err(Error::invalid("empty loop"));
    }
    if let Some(bad) = indices.iter().find(|&&i| i >= family.len()) {
        return Err(Error::invalid(format!("loop index {bad} out of range for {} vectors", family.len())));
    }
    let p = indices.len();
    Ok((0..p).fold(family.rows[0][0].one_like(), |acc, k| acc * family.inner(indices[k], indices[(k + 1) % p])))
}

/// The loop `(1, 2, …, n)`.
pub fn canonical_loop<C: ComplexScalar>(family: &VectorFamily<C>) -> Result<C> {
    loop_value(family, &(0..family.len()).collect::<Vec<_>>())
}

/// `-cos^p(π/p)`.
pub fn loop_bound(p: usize, prec: usize) -> Result<HpReal> {
    if p < 2 {
        return Err(Error::invalid("loop bound needs p >= 2"));
    }
    let work = prec + 16;
    let c = (HpReal::pi(work) / HpReal::from_i64(p as i64, work)).cos();
    Ok((-c.powi(p as u32)).with_precision(prec))
}

/// `p` unit vectors in the plane at angles `kπ/p`.
pub fn fan_family(p: usize, prec: usize) -> Result<VectorFamily<HpComplex>> {
    if p < 2 {
        return Err(Error::invalid("fan needs p >= 2"));
    }
    let step = HpReal::pi(prec) / HpReal::from_i64(p as i64, prec);
    let rows = (0..p)
        .map(|k| {
            let angle = step.clone() * HpReal::from_i64(k as i64, prec);
            vec![HpComplex::real(angle.cos()), HpComplex::real(angle.sin())]
        })
        .collect();
    GramRows::new(rows)
}

/// Best family found by [`loop_min_search`].
#[derive(Clone, Debug, Serialize)]
pub struct LoopSearchResult {
    pub p: usize,
    pub dim: usize,
    pub restarts: usize,
    pub seed: u64,
    pub best_restart: usize,
    pub vectors: Vec<Vec<f64>>,
    pub value: String,
    pub bound: String,
    #[serde(skip)]
    pub value_hp: HpReal,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn normalize(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

fn loop_f64(vs: &[Vec<f64>]) -> f64 {
    let p = vs.len();
    (0..p).map(|k| dot(&vs[k], &vs[(k + 1) % p])).product()
}

/// Tangential gradient of the canonical loop on the product of spheres.
fn loop_gradient(vs: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = vs.len();
    let factors: Vec<f64> = (0..p).map(|k| dot(&vs[k], &vs[(k + 1) % p])).collect();
    let without = |skip: usize| (0..p).filter(|&m| m != skip).map(|m| factors[m]).product::<f64>();
    (0..p)
        .map(|k| {
            let (prev, next) = ((k + p - 1) % p, (k + 1) % p);
            let (wp, wn) = (without(prev), without(k));
            let mut g: Vec<f64> = vs[prev].iter().zip(&vs[next]).map(|(a, b)| wp * a + wn * b).collect();
            let radial = dot(&g, &vs[k]);
            g.iter_mut().zip(&vs[k]).for_each(|(gi, vi)| *gi -= radial * vi);
            g
        })
        .collect()
}

fn descend(mut vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut value = loop_f64(&vs);
    let mut step = 0.1;
    for _ in 0..20_000 {
        let grad = loop_gradient(&vs);
        let trial: Vec<Vec<f64>> = vs
            .iter()
            .zip(&grad)
            .map(|(v, g)| {
                let mut w: Vec<f64> = v.iter().zip(g).map(|(a, b)| a - step * b).collect();
                normalize(&mut w);
                w
            })
            .collect();
        let tv = loop_f64(&trial);
        if tv < value {
            vs = trial;
            value = tv;
            step *= 1.5;
        } else {
            step *= 0.5;
            if step < 1e-16 {
                break;
            }
        }
    }
    vs
}

/// Minimizes the canonical loop over `p` unit vectors in `R^d` by projected
/// gradient descent from `restarts` random starts. Restart `r` draws from the
/// ChaCha stream `r` of `seed`; the reported value is recomputed at `prec`
/// bits from the renormalized vectors.
pub fn loop_min_search(p: usize, d: usize, restarts: usize, seed: u64, prec: usize) -> Result<LoopSearchResult> {
    if p < 2 || d < 2 || restarts == 0 {
        return Err(Error::invalid("loop search needs p >= 2, d >= 2 and at least one restart"));
    }
    let finals: Vec<(f64, Vec<Vec<f64>>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let start = (0..p)
                .map(|_| {
                    let mut v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    normalize(&mut v);
                    v
                })
                .collect();
            let vs = descend(start);
            (loop_f64(&vs), vs)
        })
        .collect();
    let (best_restart, (_, vectors)) =
        finals.iter().enumerate().reduce(|best, cur| if cur.1 .0 < best.1 .0 { cur } else { best }).expect("at least one restart");
    let rows: Vec<Vec<HpComplex>> = vectors
        .iter()
        .map(|v| {
            let hp: Vec<HpReal> = v.iter().map(|&x| HpReal::from_f64(x, prec)).collect();
            let norm = hp.iter().fold(HpReal::zero(prec), |acc, x| acc + x.clone() * x.clone()).sqrt()?;
            Ok(hp.into_iter().map(|x| HpComplex::real(x / norm.clone())).collect())
        })
        .collect::<Result<_>>()?;
    let value_hp = canonical_loop(&GramRows::new(rows)?)?.re;
    let digits = crate::traceder::digits_for(prec);
    Ok(LoopSearchResult {
        p,
        dim: d,
        restarts,
        seed,
        best_restart,
        vectors: vectors.clone(),
        value: value_hp.to_sci(digits),
        bound: loop_bound(p, prec)?.to_sci(digits),
        value_hp,
    })
}

/// A point `0 <= t3 <= t2 <= t1 <= 1` of the integration simplex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrandPoint {
    #[serde(with = "serde_rational")]
    pub t1: ExactRational,
    #[serde(with = "serde_rational")]
    pub t2: ExactRational,
    #[serde(with = "serde_rational")]
    pub t3: ExactRational,
}

impl IntegrandPoint {
    pub fn new(t1: ExactRational, t2: ExactRational, t3: ExactRational) -> Result<Self> {
        let zero = ExactRational::from_integer(0.into());
        let one = ExactRational::from_integer(1.into());
        if !(zero <= t3 && t3 <= t2 && t2 <= t1 && t1 <= one) {
            return Err(Error::domain(format!("point ({t1}, {t2}, {t3}) is outside 0 <= t3 <= t2 <= t1 <= 1")));
        }
        Ok(Self { t1, t2, t3 })
    }

    /// `"t1,t2,t3"`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<ExactRational> = text.split(',').map(parse_rational).collect::<Result<_>>()?;
        match <[ExactRational; 3]>::try_from(parts) {
            Ok([t1, t2, t3]) => Self::new(t1, t2, t3),
            Err(_) => Err(Error::parse(format!("expected three coordinates, got {text:?}"))),
        }
    }

    /// Exponent weights of the roles `(p, i, j)`: `1 - (t1 - t3)`, `t1 - t2`
    /// and `t2 - t3`.
    pub fn weights(&self) -> [ExactRational; 3] {
        let one = ExactRational::from_integer(1.into());
        [one - (&self.t1 - &self.t3), &self.t1 - &self.t2, &self.t2 - &self.t3]
    }
}

/// Parses `{"vectors": [[...], ...]}` with entries given as rationals
/// (strings or JSON integers) or `{re, im}` objects.
pub fn parse_family(value: &Value) -> Result<VectorFamily<GaussianRational>> {
    let rows = value.get("vectors").and_then(Value::as_array).ok_or_else(|| Error::parse("family needs a \"vectors\" array"))?;
    let entry = |v: &Value| -> Result<GaussianRational> {
        match v {
            Value::String(s) => parse_rational(s).map(GaussianRational::real),
            Value::Number(n) => parse_rational(&n.to_string()).map(GaussianRational::real),
            Value::Object(o) => {
                let part = |k: &str| match o.get(k) {
                    None => Ok(ExactRational::from_integer(0.into())),
                    Some(Value::String(s)) => parse_rational(s),
                    Some(Value::Number(n)) => parse_rational(&n.to_string()),
                    Some(_) => Err(Error::parse(format!("bad {k} part"))),
                };
                Ok(GaussianRational::new(part("re")?, part("im")?))
            }
            _ => Err(Error::parse("bad vector entry")),
        }
    };
    let rows = rows
        .iter()
        .map(|r| r.as_array().ok_or_else(|| Error::parse("vector must be an array"))?.iter().map(entry).collect())
        .collect::<Result<Vec<Vec<_>>>>()?;
    GramRows::new(rows)
}

pub fn family_to_json(family: &VectorFamily<GaussianRational>) -> Value {
    let rows: Vec<Vec<Value>> = family
        .rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|z| {
                    if z.is_real() {
                        Value::String(format_rational(&z.re))
                    } else {
                        serde_json::json!({"re": format_rational(&z.re), "im": format_rational(&z.im)})
                    }
                })
                .collect()
        })
        .collect();
    serde_json::json!({ "vectors": rows })
}

/// Real part of
/// `Σ_{p,i,j} (a_p|a_i)(a_i|a_j)(a_j|a_p) exp(w_p λ_p + w_i λ_i + w_j λ_j)`
/// with the weights of [`IntegrandPoint::weights`].
///
/// Each `λ` is a rational multiple of `ln 2`. When every exponent is an
/// integer multiple of `ln 2` the sum is computed exactly with powers of two.
pub fn triple_integrand(
    family: &VectorFamily<GaussianRational>,
    lambda: &[Log2Multiple],
    point: &IntegrandPoint,
    prec: usize,
) -> Result<RealValue> {
    let n = family.len();
    if lambda.len() != n {
        return Err(Error::invalid(format!("{} exponents for {n} vectors", lambda.len())));
    }
    let g = family.gram();
    let w = point.weights();
    let scaled: Vec<Vec<ExactRational>> = w.iter().map(|wk| lambda.iter().map(|l| wk * &l.coeff).collect()).collect();
    let exponent = |p: usize, i: usize, j: usize| &scaled[0][p] + &scaled[1][i] + &scaled[2][j];
    let exact = (0..n).all(|p| (0..n).all(|i| (0..n).all(|j| exponent(p, i, j).is_integer())));
    if exact {
        let mut total = GaussianRational::zero();
        for p in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let loop_ = g[(p, i)].clone() * g[(i, j)].clone() * g[(j, p)].clone();
                    if loop_.is_zero() {
                        continue;
                    }
                    let RealValue::Exact(e) = exp_pow2(&exponent(p, i, j), prec)? else { unreachable!("integral exponent") };
                    total = total + loop_ * GaussianRational::real(e);
                }
            }
        }
        return Ok(RealValue::Exact(total.re));
    }
    let work = prec + 32;
    let gh = g.to_hp(work);
    let mut total = HpReal::zero(work);
    for p in 0..n {
        for i in 0..n {
            for j in 0..n {
                let loop_ = (gh[(p, i)].clone() * gh[(i, j)].clone() * gh[(j, p)].clone()).re;
                if loop_.is_zero() {
                    continue;
                }
                total = total + loop_ * exp_pow2(&exponent(p, i, j), work)?.to_hp(work);
            }
        }
    }
    Ok(RealValue::Float(total.with_precision(prec)))
}

/// Both routes to `-(1/3!) d³/dt³ tr exp(x - t h)` at `t = 0`, with
/// `x = diag(λ)` and `h` the Gram matrix of the family.
#[derive(Clone, Debug, Serialize)]
pub struct ThirdDerivative {
    pub closed_form: String,
    pub quadrature: String,
    pub gap: String,
    pub quad_points: usize,
    #[serde(skip)]
    pub closed_form_hp: HpReal,
    #[serde(skip)]
    pub quadrature_hp: HpReal,
}

/// Closed form from the loop sum of exponential divided differences, against
/// a Gauss-Legendre rule with `quad_points` nodes per axis on the simplex
/// (collapsed coordinates `t1 = u1`, `t2 = u1 u2`, `t3 = u1 u2 u3`).
pub fn third_derivative_value(
    family: &VectorFamily<GaussianRational>,
    lambda: &[Log2Multiple],
    quad_points: usize,
    prec: usize,
) -> Result<ThirdDerivative> {
    let n = family.len();
    if lambda.len() != n {
        return Err(Error::invalid(format!("{} exponents for {n} vectors", lambda.len())));
    }
    let work = prec + 32;
    let g = family.gram().to_hp(work);
    let lam: Vec<HpReal> = lambda.iter().map(|l| l.value(work)).collect();

    // tr exp(x - t h) = tr exp(-(y + t h)) with y = -x.
    let frame = EigenFrame::new(lam.iter().map(|v| -v.clone()).collect(), g.clone())?;
    let d3 = trace_derivative_exp(&frame, &ExactRational::from_integer((-1).into()), 3, work)?;
    let closed = -d3 / HpReal::from_i64(6, work);

    let rule = gauss_legendre(quad_points, work);
    let q = rule.nodes.len();
    let gr: Vec<Vec<HpReal>> = (0..n).map(|i| (0..n).map(|j| g[(i, j)].re.clone()).collect()).collect();
    let partial: Vec<HpReal> = (0..q)
        .into_par_iter()
        .map(|a| -> Result<HpReal> {
            let u1 = &rule.nodes[a];
            let mut acc = HpReal::zero(work);
            for b in 0..q {
                let u2 = &rule.nodes[b];
                for c in 0..q {
                    let u3 = &rule.nodes[c];
                    let t1 = u1.clone();
                    let t2 = u1.clone() * u2.clone();
                    let t3 = t2.clone() * u3.clone();
                    let w = [HpReal::one(work) - (t1.clone() - t3.clone()), t1 - t2.clone(), t2 - t3];
                    let e: Vec<Vec<HpReal>> = w
                        .iter()
                        .map(|wk| lam.iter().map(|l| (wk.clone() * l.clone()).exp()).collect::<Result<_>>())
                        .collect::<Result<_>>()?;
                    let mut s = HpReal::zero(work);
                    for p in 0..n {
                        for i in 0..n {
                            let gpi = gr[p][i].clone() * e[0][p].clone() * e[1][i].clone();
                            for j in 0..n {
                                s = s + gpi.clone() * gr[i][j].clone() * gr[j][p].clone() * e[2][j].clone();
                            }
                        }
                    }
                    let jac = u1.clone() * u1.clone() * u2.clone();
                    acc = acc + rule.weights[b].clone() * rule.weights[c].clone() * jac * s;
                }
            }
            Ok(rule.weights[a].clone() * acc)
        })
        .collect::<Result<_>>()?;
    let quad = partial.into_iter().fold(HpReal::zero(work), |acc, v| acc + v);
    let gap = (closed.clone() - quad.clone()).abs();
    let digits = crate::traceder::digits_for(prec);
    Ok(ThirdDerivative {
        closed_form: closed.to_sci(digits),
        quadrature: quad.to_sci(digits),
        gap: gap.to_sci(6),
        quad_points,
        closed_form_hp: closed.with_precision(prec),
        quadrature_hp: quad.with_precision(prec),
    })
}

/// Which variant of the example family to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Original,
    Modified,
}

impl Variant {
    /// Third entry of `a_3`.
    pub fn last_entry(self) -> i64 {
        match self {
            Variant::Original => 202139,
            Variant::Modified => 202138,
        }
    }

    /// Reference integer for this variant.
    pub fn expected(self) -> &'static str {
        match self {
            Variant::Original => "-487062506352658941731358505750",
            Variant::Modified => "376189230591238013538921396773",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "original" => Ok(Variant::Original),
            "modified" => Ok(Variant::Modified),
            _ => Err(Error::parse(format!("unknown variant {s:?}"))),
        }
    }
}

/// Inputs of the example: three integer vectors, `λ = 3 ln 2 (23, 11, 0)`,
/// evaluated at `(1, 1, 1/3)`.
#[derive(Clone, Debug)]
pub struct BmvExample {
    pub family: VectorFamily<GaussianRational>,
    pub lambda: Vec<Log2Multiple>,
    pub point: IntegrandPoint,
}

pub fn example_inputs(variant: Variant) -> BmvExample {
    let int = |v: i64| GaussianRational::from_int(v);
    let rows =
        vec![vec![int(1000), int(-10), int(1)], vec![int(-10), int(10000), int(1000)], vec![int(1), int(1000), int(variant.last_entry())]];
    BmvExample {
        family: GramRows::new(rows).expect("three vectors of length three"),
        lambda: [69, 33, 0].into_iter().map(Log2Multiple::from_int).collect(),
        point: IntegrandPoint::new(crate::exactnum::rat(1), crate::exactnum::rat(1), crate::exactnum::ratio(1, 3))
            .expect("inside the simplex"),
    }
}

/// Evaluates the example integrand exactly.
pub fn bmv_example(variant: Variant) -> Result<ExactRational> {
    let ex = example_inputs(variant);
    match triple_integrand(&ex.family, &ex.lambda, &ex.point, 128)? {
        RealValue::Exact(v) => Ok(v),
        RealValue::Float(_) => Err(Error::Inexact("example exponents are integral".into())),
    }
}
