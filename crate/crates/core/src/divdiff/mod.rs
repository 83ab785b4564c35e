//! Divided differences with repeated nodes.
//!
//! Three independent evaluators are provided: the Newton table (with Taylor
//! coefficients on confluent runs), the Opitz corner entry of `exp` of a
//! bidiagonal matrix, and simplex quadrature of the Hermite integral. The
//! resolvent family additionally has a closed product form.
//!
//! ```
//! use trace_laplace::divdiff::{divided_difference, FunctionSpec, NodeList};
//! use trace_laplace::exactnum::{ratio, RealValue};
//!
//! let f: FunctionSpec = "resolvent:0".parse().unwrap();
//! let nodes = NodeList::parse("1,2,3", 256).unwrap();
//! assert_eq!(divided_difference(&f, &nodes, 256).unwrap(), RealValue::Exact(ratio(1, 6)));
//! ```

mod function;
mod quadrature;

use std::cmp::Ordering;

use num_traits::{One, Zero};

pub use function::{Atom, FunctionSpec};
pub use quadrature::{divdiff_hermite_quadrature, gauss_legendre, GaussLegendre};

use crate::error::{Error, Result};
use crate::exactnum::{parse_rational, ExactRational, HpReal, RealScalar, RealValue, Scalar};

/// Nodes `x_0..x_k`, repetitions allowed.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeList {
    Exact(Vec<ExactRational>),
    Float(Vec<HpReal>),
}

impl NodeList {
    /// Parses a comma-separated list. Each entry is a rational or decimal, or
    /// a multiple of `ln2` such as `ln2`, `3ln2` or `1/2*ln2`; any `ln2` entry
    /// makes the whole list float.
    pub fn parse(text: &str, prec: usize) -> Result<Self> {
        let tokens: Vec<&str> = text.split(',').map(str::trim).filter(|t| !t.is_empty()).collect();
        if tokens.is_empty() {
            return Err(Error::parse("empty node list"));
        }
        if tokens.iter().all(|t| !t.ends_with("ln2")) {
            return tokens.iter().map(|t| parse_rational(t)).collect::<Result<Vec<_>>>().map(NodeList::Exact);
        }
        let ln2 = HpReal::ln2(prec);
        tokens
            .iter()
            .map(|t| match t.strip_suffix("ln2") {
                Some(coeff) => {
                    let coeff = coeff.trim().trim_end_matches('*');
                    let q = if coeff.is_empty() { ExactRational::one() } else { parse_rational(coeff)? };
                    Ok(HpReal::from_rational(&q, prec) * ln2.clone())
                }
                None => Ok(HpReal::from_rational(&parse_rational(t)?, prec)),
            })
            .collect::<Result<Vec<_>>>()
            .map(NodeList::Float)
    }

    pub fn len(&self) -> usize {
        match self {
            NodeList::Exact(v) => v.len(),
            NodeList::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, NodeList::Exact(_))
    }

    pub fn to_hp(&self, prec: usize) -> Vec<HpReal> {
        match self {
            NodeList::Exact(v) => v.iter().map(|q| HpReal::from_rational(q, prec)).collect(),
            NodeList::Float(v) => v.iter().map(|x| x.with_precision(prec)).collect(),
        }
    }

    /// Every node multiplied by `t`.
    pub fn scaled(&self, t: &ExactRational) -> Self {
        match self {
            NodeList::Exact(v) => NodeList::Exact(v.iter().map(|q| q * t).collect()),
            NodeList::Float(v) => NodeList::Float(v.iter().map(|x| x.rational_like(t) * x.clone()).collect()),
        }
    }
}

/// Newton table over sorted nodes: `entry(i, j) = [x_i, …, x_{i+j}]_f`.
#[derive(Clone, Debug)]
pub struct DivDiffTable<R> {
    nodes: Vec<R>,
    columns: Vec<Vec<R>>,
}

impl<R: RealScalar> DivDiffTable<R> {
    /// Builds the table, using `f^{(m)}(x)/m!` wherever a run of equal nodes
    /// makes the difference quotient undefined.
    pub fn build(f: &FunctionSpec, nodes: &[R]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::invalid("empty node list"));
        }
        let mut sorted = nodes.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
        for x in &sorted {
            f.check_domain(x)?;
        }
        let n = sorted.len();
        let mut columns = Vec::with_capacity(n);
        columns.push(sorted.iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?);
        for j in 1..n {
            let prev = &columns[j - 1];
            let col = (0..n - j)
                .map(|i| {
                    let gap = sorted[i + j].clone() - sorted[i].clone();
                    if gap.is_zero() {
                        f.taylor_coeff(&sorted[i], j)
                    } else {
                        Ok((prev[i + 1].clone() - prev[i].clone()) / gap)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            columns.push(col);
        }
        Ok(Self { nodes: sorted, columns })
    }

    pub fn nodes(&self) -> &[R] {
        &self.nodes
    }

    pub fn entry(&self, i: usize, j: usize) -> &R {
        &self.columns[j][i]
    }

    /// The full divided difference `[x_0, …, x_n]_f`.
    pub fn value(&self) -> &R {
        &self.columns[self.nodes.len() - 1][0]
    }
}

/// Divided difference over any real scalar type. Exact types run the Newton
/// table directly; floats go through [`divdiff_hp`].
pub fn divdiff<R: RealScalar>(f: &FunctionSpec, nodes: &[R]) -> Result<R> {
    if R::is_exact() {
        return DivDiffTable::build(f, nodes).map(|t| t.value().clone());
    }
    let prec = nodes.iter().filter_map(|x| x.precision()).max().unwrap_or(crate::exactnum::DEFAULT_PRECISION);
    let hp: Vec<HpReal> = nodes.iter().map(|x| x.to_hp(prec)).collect();
    divdiff_hp(f, &hp, prec).map(|v| R::from_hp(&v))
}

/// Float divided difference at `prec` bits.
///
/// Distinct nodes closer than `2^(-prec/2)` are sent to the Opitz evaluator
/// (exponentials) or the product formula (resolvent family). Otherwise the
/// Newton table runs with enough guard bits to absorb the cancellation of
/// `order` difference quotients.
pub fn divdiff_hp(f: &FunctionSpec, nodes: &[HpReal], prec: usize) -> Result<HpReal> {
    let Some(first) = nodes.first() else {
        return Err(Error::invalid("empty node list"));
    };
    let order = nodes.len() - 1;
    let mut sorted = nodes.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let spread = sorted[order].clone() - sorted[0].clone();
    let min_gap = sorted.windows(2).map(|w| w[1].clone() - w[0].clone()).filter(|g| !g.is_zero()).reduce(|a, b| a.min(&b));

    let Some(min_gap) = min_gap else {
        return f.taylor_coeff(&first.with_precision(prec), order);
    };
    let gap_exp = min_gap.exponent().unwrap_or(0);
    if gap_exp < -(prec as i32) / 2 {
        if let Some(scale) = f.exp_scale() {
            return divdiff_exp_opitz(nodes, &scale, prec);
        }
        if f.is_rational() {
            let work: Vec<HpReal> = nodes.iter().map(|x| x.with_precision(prec + 32)).collect();
            return rational_family_product(f, &work).map(|v| v.with_precision(prec));
        }
    }
    let spread_exp = spread.exponent().unwrap_or(0).max(0);
    let lost = (spread_exp - gap_exp + 2).max(0) as usize;
    let work = prec + order * lost + 32;
    let work_nodes: Vec<HpReal> = sorted.iter().map(|x| x.with_precision(work)).collect();
    DivDiffTable::build(f, &work_nodes).map(|t| t.value().with_precision(prec))
}

/// Divided difference of `f` over `nodes`: exact when the nodes are rational
/// and `f` belongs to the resolvent family, float otherwise.
pub fn divided_difference(f: &FunctionSpec, nodes: &NodeList, prec: usize) -> Result<RealValue> {
    f.validate()?;
    match nodes {
        NodeList::Exact(q) if f.is_rational() => divdiff(f, q).map(RealValue::Exact),
        _ => divdiff_hp(f, &nodes.to_hp(prec), prec).map(RealValue::Float),
    }
}

/// `(-1)^{p-1} Π 1/(c + λ_i)` over any real scalar.
pub fn resolvent_product<R: RealScalar>(c: &ExactRational, nodes: &[R]) -> Result<R> {
    let first = nodes.first().ok_or_else(|| Error::invalid("empty node list"))?;
    let f = FunctionSpec::resolvent(c.clone());
    let mut acc = first.one_like();
    for x in nodes {
        acc = acc * f.eval(x)?;
    }
    Ok(if nodes.len() % 2 == 0 { -acc } else { acc })
}

/// Closed form `(-1)^{p-1} Π 1/(c + λ_i)` for the divided difference of
/// `1/(c + t)` over `p` rational nodes.
pub fn divdiff_resolvent_product(c: &ExactRational, nodes: &[ExactRational]) -> Result<ExactRational> {
    resolvent_product(c, nodes)
}

/// Product-form divided difference for the resolvent family, including
/// nonnegative combinations and rescalings of resolvents.
pub fn rational_family_product<R: RealScalar>(f: &FunctionSpec, nodes: &[R]) -> Result<R> {
    let first = nodes.first().ok_or_else(|| Error::invalid("empty node list"))?;
    match f {
        FunctionSpec::Resolvent { c } => resolvent_product(c, nodes),
        FunctionSpec::MonotoneRep { beta, atoms } => {
            let mut acc = if nodes.len() == 1 { first.rational_like(beta) } else { first.zero_like() };
            for a in atoms {
                acc = acc + first.rational_like(&a.w) * resolvent_product(&a.c, nodes)?;
            }
            Ok(acc)
        }
        FunctionSpec::Scaled { base, t } => {
            let tt = first.rational_like(t);
            let scaled: Vec<R> = nodes.iter().map(|x| tt.clone() * x.clone()).collect();
            let mut pow = first.one_like();
            for _ in 1..nodes.len() {
                pow = pow * tt.clone();
            }
            Ok(pow * rational_family_product(base, &scaled)?)
        }
        FunctionSpec::Exp { .. } => Err(Error::invalid("the product formula applies to resolvents only")),
    }
}

/// `[x_0, …, x_n]` of `t ↦ e^{σ t}` as the top-right entry of `exp(M)`,
/// where `M` is upper bidiagonal with `σ x_i` on the diagonal and `σ` above it.
pub fn divdiff_exp_opitz(nodes: &[HpReal], scale: &ExactRational, prec: usize) -> Result<HpReal> {
    let m = nodes.len();
    if m == 0 {
        return Err(Error::invalid("empty node list"));
    }
    let probe = HpReal::zero(prec);
    let sigma = HpReal::from_rational(scale, prec + 64);
    let bound = nodes.iter().fold(probe.clone(), |acc, x| acc.max(&x.abs())) * sigma.abs() + sigma.abs();
    // Scale so the norm is at most 1/2.
    let squarings = bound.exponent().map_or(0, |e| (e + 1).max(0) as usize);
    let work = prec + 2 * squarings + m + 48;
    let sigma = sigma.with_precision(work);
    let shrink = |x: HpReal| x.mul_pow2(-(squarings as i32));

    let mut a = vec![vec![HpReal::zero(work); m]; m];
    for i in 0..m {
        a[i][i] = shrink(sigma.clone() * nodes[i].with_precision(work));
        if i + 1 < m {
            a[i][i + 1] = shrink(sigma.clone());
        }
    }
    let eps = HpReal::one(work).mul_pow2(-(work as i32) - 4);
    let mut exp = identity(m, work);
    let mut term = identity(m, work);
    for k in 1..=4 * work {
        term = tri_mul(&term, &a, work);
        let kk = HpReal::from_i64(k as i64, work);
        let mut largest = HpReal::zero(work);
        for i in 0..m {
            for j in i..m {
                term[i][j] = term[i][j].clone() / kk.clone();
                exp[i][j] = exp[i][j].clone() + term[i][j].clone();
                largest = largest.max(&term[i][j].abs());
            }
        }
        if largest <= eps {
            break;
        }
    }
    for _ in 0..squarings {
        exp = tri_mul(&exp, &exp, work);
    }
    Ok(exp[0][m - 1].with_precision(prec))
}

fn identity(m: usize, prec: usize) -> Vec<Vec<HpReal>> {
    (0..m).map(|i| (0..m).map(|j| if i == j { HpReal::one(prec) } else { HpReal::zero(prec) }).collect()).collect()
}

/// Product of upper-triangular matrices.
fn tri_mul(x: &[Vec<HpReal>], y: &[Vec<HpReal>], prec: usize) -> Vec<Vec<HpReal>> {
    let m = x.len();
    let mut out = vec![vec![HpReal::zero(prec); m]; m];
    for i in 0..m {
        for j in i..m {
            let mut s = HpReal::zero(prec);
            for k in i..=j {
                s = s + x[i][k].clone() * y[k][j].clone();
            }
            out[i][j] = s;
        }
    }
    out
}

/// `t^{p-1} [t λ_1, …, t λ_p]_f − [λ_1, …, λ_p]_{f_t}` where `f_t(s) = f(t s)`.
/// Each side is evaluated on its own Newton table.
pub fn scaling_identity_gap(f: &FunctionSpec, t: &ExactRational, nodes: &NodeList, prec: usize) -> Result<RealValue> {
    let p = nodes.len();
    let lhs = divided_difference(f, &nodes.scaled(t), prec)?;
    let rhs = divided_difference(&FunctionSpec::scaled(f.clone(), t.clone()), nodes, prec)?;
    let pow = num_traits::pow(t.clone(), p.saturating_sub(1));
    Ok(match (lhs, rhs) {
        (RealValue::Exact(l), RealValue::Exact(r)) => RealValue::Exact(pow * l - r),
        (l, r) => {
            let (l, r) = (l.to_hp(prec), r.to_hp(prec));
            RealValue::Float(HpReal::from_rational(&pow, prec) * l - r)
        }
    })
}

/// Gap between the two sides of
/// `∫_0^t e^{-μs} [sλ_1, …, sλ_k]_exp s^{k-1} ds = t^k e^{-μt} [tλ_1, …, tλ_k, tμ]_exp`,
/// with the left side integrated by a `quad_points`-point Gauss-Legendre rule.
pub fn laplace_lemma_gap(lambdas: &NodeList, mu: &ExactRational, t: &ExactRational, quad_points: usize, prec: usize) -> Result<HpReal> {
    let k = lambdas.len();
    if k == 0 {
        return Err(Error::invalid("the lemma needs k >= 1 nodes"));
    }
    if t < &ExactRational::zero() {
        return Err(Error::domain(format!("t = {t} must be >= 0")));
    }
    let work = prec + 32;
    let exp = FunctionSpec::exp(ExactRational::one());
    let lam = lambdas.to_hp(work);
    let mu_hp = HpReal::from_rational(mu, work);
    let t_hp = HpReal::from_rational(t, work);

    let rule = gauss_legendre(quad_points, work);
    let mut lhs = HpReal::zero(work);
    for (xi, wi) in rule.nodes.iter().zip(&rule.weights) {
        let s = t_hp.clone() * xi.clone();
        let scaled: Vec<HpReal> = lam.iter().map(|l| s.clone() * l.clone()).collect();
        let dd = divdiff_hp(&exp, &scaled, work)?;
        let weight = (-(mu_hp.clone() * s.clone())).exp()? * s.powi(k as u32 - 1);
        lhs = lhs + wi.clone() * weight * dd;
    }
    lhs = lhs * t_hp.clone();

    let mut rhs_nodes: Vec<HpReal> = lam.iter().map(|l| t_hp.clone() * l.clone()).collect();
    rhs_nodes.push(t_hp.clone() * mu_hp.clone());
    let rhs = t_hp.powi(k as u32) * (-(mu_hp * t_hp)).exp()? * divdiff_hp(&exp, &rhs_nodes, work)?;
    Ok((lhs - rhs).abs().with_precision(prec))
}
