//! Checkable equivalents of the BMV property: trace-polynomial coefficients,
//! positive type of `t ↦ tr exp(A + itB)`, and m-positivity sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactnum::{format_rational, ExactRational, GaussianRational, HpComplex, HpReal};
use crate::linalg::{complex_matrix_exp, jacobi_eigen, HermitianMatrix, Mat};
use crate::traceder::digits_for;

/// Words in `{A, B}` enumerated by the oracle are capped at length 12.
pub const ORACLE_MAX_POWER: usize = 12;

/// Coefficients of `t ↦ tr (A + tB)^p`, constant term first.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolyCoefficients {
    pub p: usize,
    #[serde(serialize_with = "rational_list")]
    pub coeffs: Vec<ExactRational>,
}

impl PolyCoefficients {
    pub fn all_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| c >= &ExactRational::from_integer(0.into()))
    }
}

fn rational_list<S: Serializer>(v: &[ExactRational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

fn exact_pair<'a>(a: &'a HermitianMatrix, b: &'a HermitianMatrix) -> Result<(&'a Mat<GaussianRational>, &'a Mat<GaussianRational>)> {
    match (a, b) {
        (HermitianMatrix::Exact(a), HermitianMatrix::Exact(b)) if a.rows() == b.rows() => Ok((a, b)),
        (HermitianMatrix::Exact(_), HermitianMatrix::Exact(_)) => Err(Error::invalid("A and B differ in size")),
        _ => Err(Error::Inexact("trace polynomial coefficients need exact matrices".into())),
    }
}

fn real_trace(m: &Mat<GaussianRational>) -> Result<ExactRational> {
    let tr = m.trace();
    if !tr.is_real() {
        return Err(Error::Numerical("trace polynomial coefficient is not real".into()));
    }
    Ok(tr.re)
}

/// Iterates `M_j(t) = M_{j-1}(t)(A + tB)` on matrices of polynomials.
pub fn poly_coefficients(a: &HermitianMatrix, b: &HermitianMatrix, p: usize) -> Result<PolyCoefficients> {
    if p == 0 {
        return Err(Error::invalid("power must be at least 1"));
    }
    let (a, b) = exact_pair(a, b)?;
    let mut m = vec![a.clone(), b.clone()];
    for _ in 1..p {
        let zero = Mat::zeros_like(&GaussianRational::zero(), a.rows(), a.cols());
        let mut next = vec![zero; m.len() + 1];
        for (k, mk) in m.iter().enumerate() {
            next[k] = next[k].add(&mk.matmul(a));
            next[k + 1] = next[k + 1].add(&mk.matmul(b));
        }
        m = next;
    }
    let coeffs = m.iter().map(real_trace).collect::<Result<_>>()?;
    Ok(PolyCoefficients { p, coeffs })
}

/// Sums `tr(word)` over all `2^p` words, grouped by the number of `B` letters.
pub fn poly_coefficients_oracle(a: &HermitianMatrix, b: &HermitianMatrix, p: usize) -> Result<PolyCoefficients> {
    if p == 0 {
        return Err(Error::invalid("power must be at least 1"));
    }
    if p > ORACLE_MAX_POWER {
        return Err(Error::Cap(format!("word enumeration capped at p = {ORACLE_MAX_POWER}, got {p}")));
    }
    let (a, b) = exact_pair(a, b)?;
    let mut sums = vec![GaussianRational::zero(); p + 1];
    words(a, b, p, a, 1, 0, &mut sums);
    words(a, b, p, b, 1, 1, &mut sums);
    let coeffs = sums
        .into_iter()
        .map(|s| if s.is_real() { Ok(s.re) } else { Err(Error::Numerical("non-real word sum".into())) })
        .collect::<Result<_>>()?;
    Ok(PolyCoefficients { p, coeffs })
}

fn words(
    a: &Mat<GaussianRational>,
    b: &Mat<GaussianRational>,
    p: usize,
    prefix: &Mat<GaussianRational>,
    len: usize,
    b_count: usize,
    sums: &mut [GaussianRational],
) {
    if len == p {
        sums[b_count] = sums[b_count].clone() + prefix.trace();
        return;
    }
    words(a, b, p, &prefix.matmul(a), len + 1, b_count, sums);
    words(a, b, p, &prefix.matmul(b), len + 1, b_count + 1, sums);
}

/// Result of a Gram-matrix test for `g(t) = tr exp(A + itB)`.
#[derive(Clone, Debug, Serialize)]
pub struct PositiveTypeReport {
    #[serde(serialize_with = "rational_list")]
    pub samples: Vec<ExactRational>,
    pub min_eigenvalue: String,
    pub tolerance: String,
    pub pass: bool,
    pub mode: &'static str,
    #[serde(skip)]
    pub min_value: HpReal,
    #[serde(skip)]
    pub gram: Mat<HpComplex>,
}

/// `tr exp(A + i t B)`.
pub fn trace_exp_imaginary(a: &HermitianMatrix, b: &HermitianMatrix, t: &ExactRational, prec: usize) -> Result<HpComplex> {
    let work = prec + 16;
    let it = HpComplex::new(HpReal::zero(work), HpReal::from_rational(t, work));
    let m = a.to_float(work).add(&b.to_float(work).map(|z| z.clone() * it.clone()));
    Ok(complex_matrix_exp(&m, work)?.trace().with_precision(prec))
}

/// Builds `G_jk = g(t_j − t_k)` and reports its smallest eigenvalue; passes
/// when it is at least `-2^(-prec/3)` relative to `max |G_jk|`.
pub fn positive_type_check(a: &HermitianMatrix, b: &HermitianMatrix, samples: &[ExactRational], prec: usize) -> Result<PositiveTypeReport> {
    if a.n() != b.n() {
        return Err(Error::invalid("A and B differ in size"));
    }
    if samples.is_empty() {
        return Err(Error::invalid("no sample points"));
    }
    let mut gaps: BTreeMap<ExactRational, Option<HpComplex>> = BTreeMap::new();
    for tj in samples {
        for tk in samples {
            gaps.insert(tj - tk, None);
        }
    }
    let keys: Vec<ExactRational> = gaps.keys().cloned().collect();
    let values: Vec<HpComplex> = keys.par_iter().map(|d| trace_exp_imaginary(a, b, d, prec)).collect::<Result<_>>()?;
    for (k, v) in keys.into_iter().zip(values) {
        gaps.insert(k, Some(v));
    }
    let m = samples.len();
    let gram = Mat::from_fn(m, m, |j, k| gaps[&(&samples[j] - &samples[k])].clone().expect("every gap evaluated"));
    let eig = jacobi_eigen(&gram.symmetrized(), prec)?;
    let min_value = eig.values[0].clone();
    let tol = gram.max_abs().max(&HpReal::one(prec)).mul_pow2(-(prec as i32) / 3);
    let digits = digits_for(prec);
    Ok(PositiveTypeReport {
        samples: samples.to_vec(),
        min_eigenvalue: min_value.to_sci(digits),
        tolerance: tol.to_sci(6),
        pass: min_value >= -tol.clone(),
        mode: "float",
        min_value,
        gram,
    })
}

/// Parameters of the m-positivity probe.
#[derive(Clone, Debug, PartialEq)]
pub struct MPositiveProbe {
    /// Half-width of the interval; `None` selects `1/(2 ‖B‖_max k)`.
    pub alpha: Option<ExactRational>,
    pub k: usize,
    pub sample_count: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MPositiveReport {
    pub alpha: String,
    pub k: usize,
    pub sample_count: usize,
    pub seed: u64,
    pub min_entry: String,
    pub argmin_sample: usize,
    pub tolerance: String,
    pub pass: bool,
    pub mode: &'static str,
    #[serde(skip)]
    pub min_value: HpReal,
}

/// `1/(2 ‖B‖_max k)`, or `1/(2k)` for `B = 0`.
pub fn default_alpha(b: &HermitianMatrix, k: usize, prec: usize) -> ExactRational {
    let norm = b.to_float(prec).max_abs();
    let norm = if norm.is_zero() { ExactRational::from_integer(1.into()) } else { norm.to_rational() };
    ExactRational::from_integer(1.into()) / (norm * ExactRational::from_integer((2 * k as i64).into()))
}

/// `φ(s) = tr exp(A + sB)`.
fn phi(a: &Mat<HpComplex>, b: &Mat<HpComplex>, s: &HpReal, prec: usize) -> Result<HpReal> {
    let eig = jacobi_eigen(&a.add(&b.map(|z| z.scale(s))), prec)?;
    eig.values.iter().try_fold(HpReal::zero(prec), |acc, v| Ok(acc + v.exp()?))
}

/// `φ(X)` for a real symmetric `X`, applied through its spectrum.
pub fn apply_phi(a: &HermitianMatrix, b: &HermitianMatrix, x: &Mat<HpComplex>, prec: usize) -> Result<Mat<HpComplex>> {
    let work = prec + 32;
    let (am, bm) = (a.to_float(work), b.to_float(work));
    let eig = jacobi_eigen(&x.map(|z| z.with_precision(work)), work)?;
    let vals: Vec<HpReal> = eig.values.iter().map(|s| phi(&am, &bm, s, work)).collect::<Result<_>>()?;
    let u = &eig.vectors;
    let k = x.rows();
    let out = Mat::from_fn(k, k, |i, j| (0..k).fold(HpComplex::zero(work), |acc, m| acc + u[(i, m)].scale(&vals[m]) * u[(j, m)].conj()));
    Ok(out.symmetrized().map(|z| z.with_precision(prec)))
}

/// Sample `index` of the probe: a symmetric entrywise nonnegative matrix
/// rescaled so that its spectral radius is `r α` with `r` uniform in `(0, 1)`.
pub fn probe_matrix(alpha: &ExactRational, k: usize, seed: u64, index: usize, prec: usize) -> Result<Mat<HpComplex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut raw = Mat::from_fn(k, k, |_, _| 0.0f64);
    for i in 0..k {
        for j in i..k {
            let v: f64 = rng.gen();
            raw[(i, j)] = v;
            raw[(j, i)] = v;
        }
    }
    let r: f64 = rng.gen_range(f64::EPSILON..1.0);
    let x = raw.map(|&v| HpComplex::real(HpReal::from_f64(v, prec)));
    let radius = jacobi_eigen(&x, prec)?.values.iter().fold(HpReal::zero(prec), |m, v| m.max(&v.abs()));
    if radius.is_zero() {
        return Ok(x);
    }
    let factor = HpReal::from_rational(alpha, prec) * HpReal::from_f64(r, prec) / radius;
    Ok(x.map(|z| z.scale(&factor)))
}

/// Samples probe matrices and reports the smallest entry of `φ(X)`. A
/// sampling check can only falsify; `pass` means no sample went below
/// `-2^(-prec/3)` relative to `max |φ(X)_ij|`.
pub fn m_positive_check(a: &HermitianMatrix, b: &HermitianMatrix, probe: &MPositiveProbe, prec: usize) -> Result<MPositiveReport> {
    if a.n() != b.n() {
        return Err(Error::invalid("A and B differ in size"));
    }
    if probe.k == 0 || probe.sample_count == 0 {
        return Err(Error::invalid("probe dimension and sample count must be positive"));
    }
    let alpha = probe.alpha.clone().unwrap_or_else(|| default_alpha(b, probe.k, prec));
    if alpha <= ExactRational::from_integer(0.into()) {
        return Err(Error::domain("alpha must be positive"));
    }
    for v in jacobi_eigen(&a.to_float(prec), prec)?.values.iter().chain(&jacobi_eigen(&b.to_float(prec), prec)?.values) {
        if !v.is_positive() {
            return Err(Error::domain("A and B must be positive definite"));
        }
    }
    let mins: Vec<(HpReal, HpReal)> = (0..probe.sample_count)
        .into_par_iter()
        .map(|s| {
            let x = probe_matrix(&alpha, probe.k, probe.seed, s, prec)?;
            let fx = apply_phi(a, b, &x, prec)?;
            let min = fx.entries().map(|z| z.re.clone()).reduce(|m, v| m.min(&v)).expect("nonempty");
            Ok((min, fx.max_abs()))
        })
        .collect::<Result<_>>()?;
    let (argmin, (min_value, _)) =
        mins.iter().enumerate().reduce(|best, cur| if cur.1 .0 < best.1 .0 { cur } else { best }).expect("at least one sample");
    let scale = mins.iter().fold(HpReal::one(prec), |m, (_, s)| m.max(s));
    let tol = scale.mul_pow2(-(prec as i32) / 3);
    Ok(MPositiveReport {
        alpha: format_rational(&alpha),
        k: probe.k,
        sample_count: probe.sample_count,
        seed: probe.seed,
        min_entry: min_value.to_sci(digits_for(prec)),
        argmin_sample: argmin,
        tolerance: tol.to_sci(6),
        pass: *min_value >= -tol,
        mode: "float",
        min_value: min_value.clone(),
    })
}
