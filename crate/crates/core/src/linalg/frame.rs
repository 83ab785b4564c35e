use std::cmp::Ordering;

use super::{eigen_decompose, ldl_psd, HermitianMatrix, Mat};
use crate::error::{Error, Result};
use crate::exactnum::{ExactRational, HpComplex, HpReal, RealScalar};

/// Eigenvalues of `x` (ascending) and the perturbation `h` written in an
/// eigenbasis of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenFrame<R: RealScalar> {
    pub eigenvalues: Vec<R>,
    pub h: Mat<R::Complex>,
}

impl<R: RealScalar> EigenFrame<R> {
    /// Checks dimensions; `h` must be square of the same size as the spectrum.
    pub fn new(eigenvalues: Vec<R>, h: Mat<R::Complex>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("empty spectrum"));
        }
        if !h.is_square() || h.rows() != eigenvalues.len() {
            return Err(Error::invalid(format!(
                "perturbation is {}x{} but the spectrum has {} values",
                h.rows(),
                h.cols(),
                eigenvalues.len()
            )));
        }
        Ok(Self { eigenvalues, h })
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_exact(&self) -> bool {
        R::is_exact()
    }

    pub fn to_float(&self, prec: usize) -> EigenFrame<HpReal> {
        EigenFrame {
            eigenvalues: self.eigenvalues.iter().map(|v| v.to_hp(prec)).collect(),
            h: self.h.map(|z| crate::exactnum::ComplexScalar::to_hp(z, prec)),
        }
    }
}

/// An exact or float frame.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyFrame {
    Exact(EigenFrame<ExactRational>),
    Float(EigenFrame<HpReal>),
}

impl AnyFrame {
    pub fn n(&self) -> usize {
        match self {
            AnyFrame::Exact(f) => f.n(),
            AnyFrame::Float(f) => f.n(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, AnyFrame::Exact(_))
    }

    pub fn to_float(&self, prec: usize) -> EigenFrame<HpReal> {
        match self {
            AnyFrame::Exact(f) => f.to_float(prec),
            AnyFrame::Float(f) => f.to_float(prec),
        }
    }
}

/// Diagonalizes `A` and expresses `B` in its eigenbasis.
///
/// Requires `A` positive definite and `B` positive semi-definite. When `A` is
/// an exact diagonal matrix and `B` is exact the frame stays exact (the basis
/// change is a permutation); otherwise it is computed in float.
pub fn to_eigenframe(a: &HermitianMatrix, b: &HermitianMatrix, prec: usize) -> Result<AnyFrame> {
    let n = a.n();
    if b.n() != n {
        return Err(Error::invalid(format!("A is {n}x{n} but B is {0}x{0}", b.n())));
    }
    if let (HermitianMatrix::Exact(am), HermitianMatrix::Exact(bm)) = (a, b) {
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || am[(i, j)].is_zero()));
        if diagonal {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| am[(i, i)].re.partial_cmp(&am[(j, j)].re).unwrap_or(Ordering::Equal).then(i.cmp(&j)));
            let eigenvalues: Vec<ExactRational> = order.iter().map(|&i| am[(i, i)].re.clone()).collect();
            if let Some(bad) = eigenvalues.iter().find(|v| v.signum_i8() <= 0) {
                return Err(Error::domain(format!("A is not positive definite: eigenvalue {bad}")));
            }
            ldl_psd(bm, &crate::exactnum::rat(0)).map_err(|_| Error::domain("B is not positive semi-definite"))?;
            let h = Mat::from_fn(n, n, |i, j| bm[(order[i], order[j])].clone());
            return EigenFrame::new(eigenvalues, h).map(AnyFrame::Exact);
        }
    }

    let ea = eigen_decompose(a, prec)?;
    if let Some(bad) = ea.values.iter().find(|v| !v.is_positive()) {
        return Err(Error::domain(format!("A is not positive definite: eigenvalue {}", bad.to_sci(20))));
    }
    check_psd(b, prec)?;
    let h = conjugate(&b.to_float(prec), &ea.vectors);
    EigenFrame::new(ea.values, h).map(AnyFrame::Float)
}

/// Positive semi-definiteness: an exact LDL* certificate for exact input,
/// otherwise eigenvalues no lower than `-2^(-prec/4)` relative to the scale.
pub fn check_psd(b: &HermitianMatrix, prec: usize) -> Result<()> {
    if let HermitianMatrix::Exact(bm) = b {
        return ldl_psd(bm, &crate::exactnum::rat(0)).map(|_| ()).map_err(|_| Error::domain("B is not positive semi-definite"));
    }
    let eb = eigen_decompose(b, prec)?;
    let scale = b.to_float(prec).max_abs().max(&HpReal::one(prec));
    let floor = -scale.mul_pow2(-(prec as i32) / 4);
    if let Some(bad) = eb.values.iter().find(|v| **v < floor) {
        return Err(Error::domain(format!("B is not positive semi-definite: eigenvalue {}", bad.to_sci(20))));
    }
    Ok(())
}

/// `h` rewritten in the eigenbasis `u`.
pub fn conjugate(h: &Mat<HpComplex>, u: &Mat<HpComplex>) -> Mat<HpComplex> {
    u.adjoint().matmul(h).matmul(u).symmetrized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, ratio};

    fn tol(prec: usize) -> HpReal {
        HpReal::one(prec).mul_pow2(-(prec as i32) / 2)
    }

    #[test]
    fn diagonal_a_keeps_exact_frame() {
        let a = HermitianMatrix::from_rational_rows(vec![vec![rat(3), rat(0)], vec![rat(0), rat(1)]]).unwrap();
        let b = HermitianMatrix::from_rational_rows(vec![vec![rat(2), rat(1)], vec![rat(1), ratio(1, 2)]]).unwrap();
        let AnyFrame::Exact(f) = to_eigenframe(&a, &b, 128).unwrap() else { panic!() };
        assert_eq!(f.eigenvalues, vec![rat(1), rat(3)]);
        assert_eq!(f.h[(0, 0)].re, ratio(1, 2));
        assert_eq!(f.h[(1, 1)].re, rat(2));
        assert_eq!(f.h[(0, 1)].re, rat(1));
    }

    #[test]
    fn identity_a_preserves_spectrum_of_b() {
        let a = HermitianMatrix::Float(Mat::identity_like(&HpComplex::one(192), 2));
        let b = HermitianMatrix::from_rational_rows(vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]]).unwrap();
        let AnyFrame::Float(f) = to_eigenframe(&a, &b, 192).unwrap() else { panic!() };
        assert!(f.eigenvalues.iter().all(|v| (v.clone() - HpReal::one(192)).abs() < tol(192)));
        let eh = eigen_decompose(&HermitianMatrix::Float(f.h.clone()), 192).unwrap();
        assert!((eh.values[0].clone() - HpReal::one(192)).abs() < tol(192));
        assert!((eh.values[1].clone() - HpReal::from_i64(3, 192)).abs() < tol(192));
    }

    #[test]
    fn trace_is_invariant() {
        let a = HermitianMatrix::from_rational_rows(vec![
            vec![rat(4), rat(1), ratio(1, 2)],
            vec![rat(1), rat(3), rat(0)],
            vec![ratio(1, 2), rat(0), rat(2)],
        ])
        .unwrap();
        let b = HermitianMatrix::from_rational_rows(vec![
            vec![rat(2), rat(-1), rat(0)],
            vec![rat(-1), rat(2), rat(-1)],
            vec![rat(0), rat(-1), rat(2)],
        ])
        .unwrap();
        let f = to_eigenframe(&a, &b, 256).unwrap();
        assert!(!f.is_exact());
        let AnyFrame::Float(f) = f else { panic!() };
        assert!((f.h.trace().re - HpReal::from_i64(6, 256)).abs() < tol(256));
    }

    #[test]
    fn domain_errors() {
        let a = HermitianMatrix::from_rational_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(-1)]]).unwrap();
        let b = HermitianMatrix::from_rational_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(1)]]).unwrap();
        assert!(to_eigenframe(&a, &b, 128).unwrap_err().is_domain());
        assert!(to_eigenframe(&b, &a, 128).unwrap_err().is_domain());
        let a2 = HermitianMatrix::from_rational_rows(vec![vec![rat(2), rat(1)], vec![rat(1), rat(2)]]).unwrap();
        assert!(to_eigenframe(&a2, &a, 128).unwrap_err().is_domain());
    }
}
