use super::{jacobi_eigen, HermitianMatrix, Mat};
use crate::divdiff::FunctionSpec;
use crate::error::Result;
use crate::exactnum::{HpComplex, HpReal};

/// `f(M) = U f(Λ) U*`.
pub fn hermitian_function(m: &HermitianMatrix, f: &FunctionSpec, prec: usize) -> Result<HermitianMatrix> {
    f.validate()?;
    let work = prec + 32;
    let eig = jacobi_eigen(&m.to_float(work), work)?;
    let fvals: Vec<HpReal> = eig.values.iter().map(|x| f.eval_hp(x)).collect::<Result<_>>()?;
    let u = &eig.vectors;
    let n = m.n();
    let out = Mat::from_fn(n, n, |i, j| (0..n).fold(HpComplex::zero(work), |acc, k| acc + u[(i, k)].scale(&fvals[k]) * u[(j, k)].conj()));
    Ok(HermitianMatrix::Float(out.map(|z| z.with_precision(prec)).symmetrized()))
}

/// `exp(M)` for a general complex square matrix by scaling and squaring with
/// a Taylor kernel.
pub fn complex_matrix_exp(m: &Mat<HpComplex>, prec: usize) -> Result<Mat<HpComplex>> {
    let n = m.rows();
    let norm = m.map(|z| z.with_precision(prec)).max_abs() * HpReal::from_i64(n.max(1) as i64, prec);
    let squarings = norm.exponent().map_or(0, |e| (e + 1).max(0) as usize);
    let work = prec + squarings + 48;
    let a = m.map(|z| z.with_precision(work).scale(&HpReal::one(work).mul_pow2(-(squarings as i32))));
    let one = HpComplex::one(work);
    let mut sum = Mat::identity_like(&one, n);
    let mut term = sum.clone();
    let eps = HpReal::one(work).mul_pow2(-(work as i32) - 4);
    for k in 1..=4 * work {
        term = term.matmul(&a).map(|z| z.scale(&HpReal::from_i64(k as i64, work).recip()));
        sum = sum.add(&term);
        if term.max_abs() <= eps {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.matmul(&sum);
    }
    Ok(sum.map(|z| z.with_precision(prec)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, ratio, GaussianRational};

    fn tol(prec: usize) -> HpReal {
        HpReal::one(prec).mul_pow2(-(prec as i32) / 2)
    }

    fn c(re: i64, im: i64, prec: usize) -> HpComplex {
        HpComplex::new(HpReal::from_i64(re, prec), HpReal::from_i64(im, prec))
    }

    #[test]
    fn resolvent_of_diagonal() {
        let m = HermitianMatrix::from_rational_rows(vec![vec![rat(1), rat(0)], vec![rat(0), rat(2)]]).unwrap();
        let r = hermitian_function(&m, &FunctionSpec::resolvent(rat(0)), 128).unwrap();
        let want = HermitianMatrix::from_rational_rows(vec![vec![rat(1), rat(0)], vec![rat(0), ratio(1, 2)]]).unwrap();
        assert!(r.to_float(128).sub(&want.to_float(128)).max_abs() < tol(128));
    }

    #[test]
    fn exp_of_zero_and_pauli() {
        let zero = HermitianMatrix::from_rational_rows(vec![vec![rat(0); 2]; 2]).unwrap();
        let e = hermitian_function(&zero, &FunctionSpec::exp(rat(1)), 128).unwrap();
        assert!(e.to_float(128).sub(&Mat::identity_like(&HpComplex::one(128), 2)).max_abs() < tol(128));

        let x = HermitianMatrix::from_rational_rows(vec![vec![rat(0), rat(1)], vec![rat(1), rat(0)]]).unwrap();
        let e = hermitian_function(&x, &FunctionSpec::exp(rat(1)), 256).unwrap().to_float(256);
        let (ep, em) = (HpReal::one(256).exp().unwrap(), (-HpReal::one(256)).exp().unwrap());
        let half = HpReal::one(256).mul_pow2(-1);
        let cosh = (ep.clone() + em.clone()) * half.clone();
        let sinh = (ep - em) * half;
        assert!((e[(0, 0)].re.clone() - cosh).abs() < tol(256));
        assert!((e[(0, 1)].re.clone() - sinh).abs() < tol(256));
    }

    #[test]
    fn matrix_exp_examples() {
        let p = 192;
        let zero = Mat::from_fn(3, 3, |_, _| HpComplex::zero(p));
        let id = Mat::identity_like(&HpComplex::one(p), 3);
        assert!(complex_matrix_exp(&zero, p).unwrap().sub(&id).max_abs() < tol(p));

        let diag = Mat::diagonal(&[c(1, 0, p), c(0, 1, p), c(-2, 3, p)]);
        let e = complex_matrix_exp(&diag, p).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)].clone() - diag[(i, i)].exp().unwrap()).abs_max() < tol(p));
        }
        assert!(e[(0, 1)].abs_max() < tol(p));

        let nil = Mat::from_rows(vec![vec![c(0, 0, p), c(1, 0, p)], vec![c(0, 0, p), c(0, 0, p)]]).unwrap();
        let e = complex_matrix_exp(&nil, p).unwrap();
        assert!(e.sub(&id_plus(&nil, p)).max_abs() < tol(p));
    }

    fn id_plus(m: &Mat<HpComplex>, p: usize) -> Mat<HpComplex> {
        m.add(&Mat::identity_like(&HpComplex::one(p), m.rows()))
    }

    #[test]
    fn exp_times_exp_of_negative_is_identity() {
        let p = 256;
        let g = |a: i64, b: i64| GaussianRational::new(ratio(a, 3), ratio(b, 5));
        let m = Mat::from_rows(vec![vec![g(1, 2), g(-4, 1), g(7, 0)], vec![g(2, -3), g(0, 0), g(5, 5)], vec![g(-1, 1), g(3, 3), g(-6, 2)]])
            .unwrap()
            .to_hp(p);
        let prod = complex_matrix_exp(&m, p).unwrap().matmul(&complex_matrix_exp(&m.map(|z| -z.clone()), p).unwrap());
        assert!(prod.sub(&Mat::identity_like(&HpComplex::one(p), 3)).max_abs() < tol(p));
    }
}
