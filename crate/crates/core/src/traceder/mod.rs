//! Derivatives of `t ↦ tr f(x + t h)` from loop sums of divided differences.
//!
//! In an eigenbasis of `x` with eigenvalues `λ_i`,
//!
//! ```text
//! d^p/dt^p tr f(x + t h) |_{t=0} = p! Σ h_{i1 i2} h_{i2 i3} ⋯ h_{ip i1} [λ_{i1}, …, λ_{ip}, λ_{i1}]_f
//! ```
//!
//! The divided difference only depends on the multiset of indices, so loop
//! products are accumulated per multiset and each distinct divided difference
//! is evaluated once.

mod report;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

pub use report::{complete_monotonicity_report, digits_for, Caps, DerivativeReport, ReportEntry, Sign};

use crate::divdiff::{divdiff, divdiff_exp_opitz, FunctionSpec};
use crate::error::{Error, Result};
use crate::exactnum::{ComplexScalar, ExactRational, HpReal, RealScalar, RealValue, Scalar};
use crate::linalg::{conjugate, jacobi_eigen, AnyFrame, EigenFrame, HermitianMatrix, Mat};

/// Loop sums grouped by sorted index multiset (first index counted twice).
type LoopSums<C> = BTreeMap<Vec<usize>, C>;

fn loop_sums<C: ComplexScalar>(h: &Mat<C>, p: usize) -> LoopSums<C> {
    let n = h.rows();
    let partial: Vec<LoopSums<C>> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut sums = LoopSums::new();
            let mut path = vec![first];
            let one = h[(0, 0)].one_like();
            walk(h, p, &mut path, one, &mut sums);
            sums
        })
        .collect();
    let mut total: LoopSums<C> = LoopSums::new();
    for sums in partial {
        for (key, v) in sums {
            match total.get_mut(&key) {
                Some(acc) => *acc = acc.clone() + v,
                None => {
                    total.insert(key, v);
                }
            }
        }
    }
    total
}

fn walk<C: ComplexScalar>(h: &Mat<C>, p: usize, path: &mut Vec<usize>, prefix: C, sums: &mut LoopSums<C>) {
    let last = *path.last().unwrap();
    if path.len() == p {
        let value = prefix * h[(last, path[0])].clone();
        if value.is_zero() {
            return;
        }
        let mut key = path.clone();
        key.push(path[0]);
        key.sort_unstable();
        match sums.get_mut(&key) {
            Some(acc) => *acc = acc.clone() + value,
            None => {
                sums.insert(key, value);
            }
        }
        return;
    }
    for next in 0..h.rows() {
        let step = h[(last, next)].clone();
        if step.is_zero() {
            continue;
        }
        path.push(next);
        walk(h, p, path, prefix.clone() * step, sums);
        path.pop();
    }
}

fn factorial<R: RealScalar>(like: &R, p: usize) -> R {
    (2..=p).fold(like.one_like(), |acc, k| acc * like.int_like(k as i64))
}

fn check_order(p: usize) -> Result<()> {
    if p == 0 {
        return Err(Error::invalid("derivative order must be at least 1"));
    }
    Ok(())
}

/// `p`-th derivative at `t = 0` over the frame's scalar type: exact for the
/// resolvent family over an exact frame.
pub fn trace_derivative<R: RealScalar>(frame: &EigenFrame<R>, f: &FunctionSpec, p: usize) -> Result<R> {
    check_order(p)?;
    f.validate()?;
    let like = &frame.eigenvalues[0];
    let mut total = like.zero_like();
    for (key, loops) in loop_sums(&frame.h, p) {
        let nodes: Vec<R> = key.iter().map(|&i| frame.eigenvalues[i].clone()).collect();
        total = total + loops.re() * divdiff(f, &nodes)?;
    }
    Ok(factorial(like, p) * total)
}

/// The same derivative from the alternative index ordering
/// `h_{ip i(p-1)} ⋯ h_{i2 i1} h_{i1 ip} [λ_{i1}, …, λ_{ip}, λ_{ip}]_f`,
/// enumerating every tuple.
pub fn trace_derivative_reversed<R: RealScalar>(frame: &EigenFrame<R>, f: &FunctionSpec, p: usize) -> Result<R> {
    check_order(p)?;
    f.validate()?;
    let n = frame.n();
    let like = &frame.eigenvalues[0];
    let h = &frame.h;
    let mut memo: HashMap<Vec<usize>, R> = HashMap::new();
    let mut total = h[(0, 0)].zero_like();
    let mut idx = vec![0usize; p];
    loop {
        let mut prod = h[(idx[0], idx[p - 1])].clone();
        for k in (1..p).rev() {
            prod = h[(idx[k], idx[k - 1])].clone() * prod;
        }
        if !prod.is_zero() {
            let mut key = idx.clone();
            key.push(idx[p - 1]);
            key.sort_unstable();
            let dd = match memo.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let nodes: Vec<R> = key.iter().map(|&i| frame.eigenvalues[i].clone()).collect();
                    let v = divdiff(f, &nodes)?;
                    memo.insert(key, v.clone());
                    v
                }
            };
            total = total + prod * R::Complex::from_real(dd);
        }
        let mut k = p;
        loop {
            if k == 0 {
                return Ok(factorial(like, p) * total.re());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Exact when the frame is exact and `f` is in the resolvent family.
pub fn trace_derivative_any(frame: &AnyFrame, f: &FunctionSpec, p: usize, prec: usize) -> Result<RealValue> {
    match frame {
        AnyFrame::Exact(fr) if f.is_rational() => trace_derivative(fr, f, p).map(RealValue::Exact),
        _ => trace_derivative(&frame.to_float(prec), f, p).map(RealValue::Float),
    }
}

/// Derivative of `tr exp(σ(x + t h))` with every divided difference taken
/// from the Opitz construction.
pub fn trace_derivative_exp(frame: &EigenFrame<HpReal>, sigma: &ExactRational, p: usize, prec: usize) -> Result<HpReal> {
    check_order(p)?;
    let work = prec + 32;
    let frame = frame.to_float(work);
    let mut total = HpReal::zero(work);
    for (key, loops) in loop_sums(&frame.h, p) {
        let nodes: Vec<HpReal> = key.iter().map(|&i| frame.eigenvalues[i].clone()).collect();
        total = total + loops.re * divdiff_exp_opitz(&nodes, sigma, work)?;
    }
    Ok((factorial(&total, p) * total).with_precision(prec))
}

/// `φ(t) = Σ_i f(λ_i(A + t B))`.
fn trace_fn(a: &Mat<crate::exactnum::HpComplex>, b: &Mat<crate::exactnum::HpComplex>, f: &FunctionSpec, t: &HpReal) -> Result<HpReal> {
    let prec = t.precision();
    let m = a.add(&b.map(|z| z.scale(t)));
    let eig = jacobi_eigen(&m, prec)?;
    eig.values.iter().try_fold(HpReal::zero(prec), |acc, v| Ok(acc + f.eval_hp(v)?))
}

/// Central finite difference of `t ↦ tr f(A + t B)` at `t0` with step
/// `2^(-prec/(p+2))`, evaluated with enough extra bits to survive division
/// by `h^p`.
pub fn trace_derivative_fd(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    f: &FunctionSpec,
    p: usize,
    t0: &ExactRational,
    prec: usize,
) -> Result<HpReal> {
    check_order(p)?;
    let step_bits = (prec / (p + 2)) as i32;
    let work = prec + p * step_bits as usize + 64;
    let (am, bm) = (a.to_float(work), b.to_float(work));
    let h = HpReal::one(work).mul_pow2(-step_bits);
    let t0 = HpReal::from_rational(t0, work);
    let mut binom = ExactRational::from_integer(1.into());
    let mut acc = HpReal::zero(work);
    for k in 0..=p {
        // Offset (p/2 − k) h.
        let offset = HpReal::from_i64(p as i64 - 2 * k as i64, work).mul_pow2(-1) * h.clone();
        let value = trace_fn(&am, &bm, f, &(t0.clone() + offset))?;
        let weight = HpReal::from_rational(&binom, work);
        acc = if k % 2 == 0 { acc + weight * value } else { acc - weight * value };
        binom = binom * ExactRational::from_integer(((p - k) as i64).into()) / ExactRational::from_integer(((k + 1) as i64).into());
    }
    Ok((acc.mul_pow2(step_bits * p as i32)).with_precision(prec))
}

/// Frame of `x + t0 h`, with `h` rewritten in its eigenbasis.
pub fn shift_frame(frame: &EigenFrame<HpReal>, t0: &ExactRational, prec: usize) -> Result<EigenFrame<HpReal>> {
    if t0 < &ExactRational::from_integer(0.into()) {
        return Err(Error::domain(format!("shift t0 = {t0} must be >= 0")));
    }
    if num_traits::Zero::is_zero(t0) || frame.h.is_zero() {
        return Ok(frame.to_float(prec));
    }
    let work = prec + 32;
    let fr = frame.to_float(work);
    let t = HpReal::from_rational(t0, work);
    let x = Mat::diagonal(&fr.eigenvalues.iter().map(|v| crate::exactnum::HpComplex::real(v.clone())).collect::<Vec<_>>());
    let m = x.add(&fr.h.map(|z| z.scale(&t)));
    let eig = jacobi_eigen(&m, work)?;
    let h = conjugate(&fr.h, &eig.vectors);
    Ok(EigenFrame::new(eig.values, h)?.to_float(prec))
}
