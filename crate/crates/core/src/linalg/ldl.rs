use super::{HermitianMatrix, Mat};
use crate::error::{Error, Result};
use crate::exactnum::{ComplexScalar, GaussianRational, HpComplex, HpReal, RealScalar, Scalar};

/// `h = L D L*` with `L` unit lower triangular and `D ≥ 0` diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Ldl<C: ComplexScalar> {
    pub l: Mat<C>,
    pub d: Vec<C::Real>,
}

/// LDL* of a positive semi-definite matrix.
///
/// Pivots below `-tol` fail with a domain error; pivots within `tol` of zero
/// are clamped to zero and their column dropped. With `tol = 0` over exact
/// scalars this is an exact psd certificate: a zero pivot additionally
/// requires the rest of its column to vanish.
pub fn ldl_psd<C: ComplexScalar>(h: &Mat<C>, tol: &C::Real) -> Result<Ldl<C>> {
    let n = h.rows();
    if n == 0 || !h.is_square() {
        return Err(Error::invalid("LDL* needs a nonempty square matrix"));
    }
    let seed = h[(0, 0)].zero_like();
    let mut l = Mat::identity_like(&seed, n);
    let mut d: Vec<C::Real> = Vec::with_capacity(n);
    for j in 0..n {
        let mut pivot = h[(j, j)].re();
        for k in 0..j {
            pivot = pivot - l[(j, k)].norm_sqr() * d[k].clone();
        }
        if pivot < -tol.clone() {
            return Err(Error::domain(format!("not positive semi-definite: pivot {j} is {pivot:?}")));
        }
        let zero_pivot = pivot.abs_val() <= *tol;
        for i in j + 1..n {
            let mut v = h[(i, j)].clone();
            for k in 0..j {
                v = v - l[(i, k)].clone() * C::from_real(d[k].clone()) * l[(j, k)].conj();
            }
            l[(i, j)] = if zero_pivot {
                if C::is_exact() && !v.is_zero() {
                    return Err(Error::domain(format!("not positive semi-definite: zero pivot {j} with nonzero column")));
                }
                seed.clone()
            } else {
                v / C::from_real(pivot.clone())
            };
        }
        d.push(if zero_pivot { pivot.zero_like() } else { pivot });
    }
    Ok(Ldl { l, d })
}

/// Vectors `a_1..a_n` with `h_ij = (a_i | a_j) = Σ_m a_im w_m conj(a_jm)`,
/// where the diagonal metric `w` is the identity when absent.
#[derive(Clone, Debug, PartialEq)]
pub struct GramRows<C: ComplexScalar> {
    pub rows: Vec<Vec<C>>,
    pub metric: Option<Vec<C::Real>>,
}

impl<C: ComplexScalar> GramRows<C> {
    pub fn new(rows: Vec<Vec<C>>) -> Result<Self> {
        Self::with_metric(rows, None)
    }

    pub fn with_metric(rows: Vec<Vec<C>>, metric: Option<Vec<C::Real>>) -> Result<Self> {
        let d = rows.first().map(Vec::len).ok_or_else(|| Error::invalid("empty vector family"))?;
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("vectors of different dimensions"));
        }
        if metric.as_ref().is_some_and(|w| w.len() != d) {
            return Err(Error::invalid("metric length does not match dimension"));
        }
        Ok(Self { rows, metric })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.rows[0].len()
    }

    /// `(a_i | a_j)`.
    pub fn inner(&self, i: usize, j: usize) -> C {
        let (a, b) = (&self.rows[i], &self.rows[j]);
        let mut acc = a[0].zero_like();
        for m in 0..a.len() {
            let term = a[m].clone() * b[m].conj();
            acc = acc
                + match &self.metric {
                    Some(w) => term * C::from_real(w[m].clone()),
                    None => term,
                };
        }
        acc
    }

    /// The Gram matrix `[(a_i | a_j)]`.
    pub fn gram(&self) -> Mat<C> {
        Mat::from_fn(self.len(), self.len(), |i, j| self.inner(i, j))
    }
}

/// Gram rows of an exact or float psd matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum Gram {
    /// The LDL* pair: rows of `L` under the metric `D`.
    Exact(GramRows<GaussianRational>),
    /// Rows of `L sqrt(D)`.
    Float(GramRows<HpComplex>),
}

/// Factorizes a psd `h` into Gram rows. The exact path never takes square
/// roots, so every inner product of the result stays rational.
pub fn gram_rows(h: &HermitianMatrix, prec: usize) -> Result<Gram> {
    match h {
        HermitianMatrix::Exact(m) => {
            let ldl = ldl_psd(m, &crate::exactnum::rat(0))?;
            Ok(Gram::Exact(GramRows::with_metric(ldl.l.to_rows(), Some(ldl.d))?))
        }
        HermitianMatrix::Float(m) => {
            let scale = m.max_abs().max(&HpReal::one(prec));
            let tol = scale.mul_pow2(-(prec as i32) / 4);
            let ldl = ldl_psd(m, &tol)?;
            let roots: Vec<HpReal> = ldl.d.iter().map(|v| v.sqrt()).collect::<Result<_>>()?;
            let rows = (0..m.rows()).map(|i| (0..m.rows()).map(|k| ldl.l[(i, k)].scale(&roots[k])).collect()).collect();
            Ok(Gram::Float(GramRows::new(rows)?))
        }
    }
}
