//! Gauss-Legendre rules at arbitrary precision and the simplex quadrature of
//! the Hermite integral for divided differences.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::function::FunctionSpec;
use crate::error::{Error, Result};
use crate::exactnum::HpReal;

/// Points and weights of a `q`-point rule on `[0, 1]`, ascending.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<HpReal>,
    pub weights: Vec<HpReal>,
}

type RuleCache = Mutex<HashMap<(usize, usize), Arc<GaussLegendre>>>;

/// The `q`-point rule on `[0, 1]` at `prec` bits. Rules are cached.
pub fn gauss_legendre(q: usize, prec: usize) -> Arc<GaussLegendre> {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().unwrap().get(&(q, prec)) {
        return rule.clone();
    }
    let rule = Arc::new(compute_rule(q, prec));
    cache.lock().unwrap().insert((q, prec), rule.clone());
    rule
}

/// `(P_q(x), P_{q-1}(x))` by the three-term recurrence.
fn legendre(q: usize, x: &HpReal) -> (HpReal, HpReal) {
    let prec = x.precision();
    let mut p0 = HpReal::one(prec);
    let mut p1 = x.clone();
    if q == 0 {
        return (p0, HpReal::zero(prec));
    }
    for k in 1..q {
        let k1 = HpReal::from_i64(k as i64 + 1, prec);
        let p2 = (HpReal::from_i64(2 * k as i64 + 1, prec) * x.clone() * p1.clone() - HpReal::from_i64(k as i64, prec) * p0) / k1;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn compute_rule(q: usize, prec: usize) -> GaussLegendre {
    assert!(q > 0, "quadrature needs at least one point");
    let work = prec + 32;
    let one = HpReal::one(work);
    let qh = HpReal::from_i64(q as i64, work);
    let tol = one.mul_pow2(-(work as i32) + 8);
    let mut half = Vec::with_capacity(q);
    // Roots in (0, 1) of P_q on [-1, 1], largest first; the rest by symmetry.
    for i in 1..=q.div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 - 0.25) / (q as f64 + 0.5)).cos();
        let mut x = HpReal::from_f64(guess, work);
        let mut dp = one.clone();
        for _ in 0..64 {
            let (p, pm1) = legendre(q, &x);
            dp = qh.clone() * (x.clone() * p.clone() - pm1) / (x.clone() * x.clone() - one.clone());
            let step = p / dp.clone();
            x = x - step.clone();
            if step.abs() <= tol {
                break;
            }
        }
        let (p, pm1) = legendre(q, &x);
        if !p.is_zero() {
            dp = qh.clone() * (x.clone() * p - pm1) / (x.clone() * x.clone() - one.clone());
        }
        let w = HpReal::from_i64(2, work) / ((one.clone() - x.clone() * x.clone()) * dp.clone() * dp);
        half.push((x, w));
    }
    let centre = if q % 2 == 1 { half.pop().map(|(_, w)| (HpReal::zero(work), w)) } else { None };
    let mut pairs: Vec<(HpReal, HpReal)> = half.iter().map(|(x, w)| (-x.clone(), w.clone())).collect();
    pairs.extend(centre);
    pairs.extend(half.iter().rev().cloned());
    let two = HpReal::from_i64(2, work);
    GaussLegendre {
        nodes: pairs.iter().map(|(x, _)| ((one.clone() + x.clone()) / two.clone()).with_precision(prec)).collect(),
        weights: pairs.iter().map(|(_, w)| (w.clone() / two.clone()).with_precision(prec)).collect(),
    }
}

/// Simplex quadrature of the Hermite integral
/// `∫ f^{(n)}(x_0 + Σ_k t_k (x_k - x_{k-1}))` over `1 ≥ t_1 ≥ … ≥ t_n ≥ 0`
/// with `quad_points` Gauss-Legendre points per axis. Working precision is
/// taken from the nodes.
pub fn divdiff_hermite_quadrature(f: &FunctionSpec, nodes: &[HpReal], quad_points: usize) -> Result<HpReal> {
    let x0 = nodes.first().ok_or_else(|| Error::invalid("empty node list"))?;
    let prec = nodes.iter().map(HpReal::precision).max().unwrap_or(x0.precision());
    let order = nodes.len() - 1;
    if order == 0 {
        return f.eval_hp(&x0.with_precision(prec));
    }
    if quad_points == 0 {
        return Err(Error::invalid("quadrature needs at least one point"));
    }
    match f.exp_scale() {
        Some(scale) => exp_nested(&scale, nodes, quad_points, prec),
        None => tensor_collapsed(f, nodes, quad_points, prec),
    }
}

/// For `e^{σ x}` the integrand factorizes as
/// `σ^n e^{σ x_0} Π_k e^{a_k t_k}` with `a_k = σ (x_k - x_{k-1})`, so the
/// nested integrals are `G_k(s) = ∫_0^s e^{a_k t} G_{k+1}(t) dt`. Each `G_k`
/// is tabulated at the rule's nodes; values at the scaled points `s ξ_i` come
/// from barycentric interpolation.
fn exp_nested(scale: &crate::exactnum::ExactRational, nodes: &[HpReal], q: usize, prec: usize) -> Result<HpReal> {
    let work = prec + 32;
    let rule = gauss_legendre(q, work);
    let (u, w) = (&rule.nodes, &rule.weights);
    let sigma = HpReal::from_rational(scale, work);
    let n = nodes.len() - 1;
    let a: Vec<HpReal> = (1..=n).map(|k| sigma.clone() * (nodes[k].with_precision(work) - nodes[k - 1].with_precision(work))).collect();

    let bary = barycentric_weights(u);
    // interp[j][i][m]: basis polynomial m evaluated at u_j * u_i.
    let interp: Vec<Vec<Vec<HpReal>>> =
        u.iter().map(|uj| u.iter().map(|ui| basis_at(u, &bary, &(uj.clone() * ui.clone()))).collect()).collect();

    let mut g = vec![HpReal::one(work); q];
    for ak in a.iter().rev().take(n - 1) {
        let mut next = Vec::with_capacity(q);
        for j in 0..q {
            let mut sum = HpReal::zero(work);
            for i in 0..q {
                let s = u[j].clone() * u[i].clone();
                let inner: HpReal = interp[j][i].iter().zip(&g).fold(HpReal::zero(work), |acc, (l, gv)| acc + l.clone() * gv.clone());
                sum = sum + w[i].clone() * (ak.clone() * s).exp()? * inner;
            }
            next.push(u[j].clone() * sum);
        }
        g = next;
    }
    let mut total = HpReal::zero(work);
    for i in 0..q {
        total = total + w[i].clone() * (a[0].clone() * u[i].clone()).exp()? * g[i].clone();
    }
    let lead = sigma.powi(n as u32) * (sigma * nodes[0].with_precision(work)).exp()?;
    Ok((lead * total).with_precision(prec))
}

fn barycentric_weights(x: &[HpReal]) -> Vec<HpReal> {
    let prec = x[0].precision();
    (0..x.len())
        .map(|j| {
            let prod = (0..x.len()).filter(|&k| k != j).fold(HpReal::one(prec), |acc, k| acc * (x[j].clone() - x[k].clone()));
            prod.recip()
        })
        .collect()
}

/// Lagrange basis values at `t` in barycentric form.
fn basis_at(x: &[HpReal], bary: &[HpReal], t: &HpReal) -> Vec<HpReal> {
    let prec = t.precision();
    if let Some(hit) = x.iter().position(|xi| xi == t) {
        return (0..x.len()).map(|m| if m == hit { HpReal::one(prec) } else { HpReal::zero(prec) }).collect();
    }
    let terms: Vec<HpReal> = x.iter().zip(bary).map(|(xi, bi)| bi.clone() / (t.clone() - xi.clone())).collect();
    let denom = terms.iter().fold(HpReal::zero(prec), |acc, v| acc + v.clone());
    terms.into_iter().map(|v| v / denom.clone()).collect()
}

/// Iterated rule under `t_1 = ξ_1`, `t_k = t_{k-1} ξ_k`, Jacobian
/// `t_1 ⋯ t_{n-1}`; costs `q^n` evaluations of `f^{(n)}`.
fn tensor_collapsed(f: &FunctionSpec, nodes: &[HpReal], q: usize, prec: usize) -> Result<HpReal> {
    let n = nodes.len() - 1;
    let count = (q as f64).powi(n as i32);
    if count > 2.0e7 {
        return Err(Error::Cap(format!("{q}^{n} quadrature points exceed the evaluation cap")));
    }
    let work = prec + 32;
    let rule = gauss_legendre(q, work);
    let x: Vec<HpReal> = nodes.iter().map(|v| v.with_precision(work)).collect();
    let d: Vec<HpReal> = (1..=n).map(|k| x[k].clone() - x[k - 1].clone()).collect();
    let mut nfact = HpReal::one(work);
    for k in 2..=n {
        nfact = nfact * HpReal::from_i64(k as i64, work);
    }

    let mut total = HpReal::zero(work);
    let mut idx = vec![0usize; n];
    loop {
        let mut t = HpReal::one(work);
        let mut weight = HpReal::one(work);
        let mut arg = x[0].clone();
        for (k, &i) in idx.iter().enumerate() {
            weight = weight * rule.weights[i].clone() * t.clone();
            t = t * rule.nodes[i].clone();
            arg = arg + t.clone() * d[k].clone();
        }
        total = total + weight * f.taylor_coeff(&arg, n)?;
        let mut k = n;
        loop {
            if k == 0 {
                return Ok((total * nfact).with_precision(prec));
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < q {
                break;
            }
            idx[k] = 0;
        }
    }
}
