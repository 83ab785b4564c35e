use std::cmp::Ordering;

use super::{HermitianMatrix, Mat};
use crate::error::{Error, Result};
use crate::exactnum::{HpComplex, HpReal};

const MAX_SWEEPS: usize = 80;

/// `M = U diag(values) U*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<HpReal>,
    pub vectors: Mat<HpComplex>,
}

impl Eigen {
    /// `max |M U − U diag(λ)|`.
    pub fn residual(&self, m: &Mat<HpComplex>) -> HpReal {
        let mu = m.matmul(&self.vectors);
        let scaled = Mat::from_fn(m.rows(), m.cols(), |i, j| self.vectors[(i, j)].scale(&self.values[j]));
        mu.sub(&scaled).max_abs()
    }

    /// `max |U* U − I|`.
    pub fn unitarity_defect(&self) -> HpReal {
        let g = self.vectors.adjoint().matmul(&self.vectors);
        let one = HpComplex::one(g[(0, 0)].precision());
        g.sub(&Mat::identity_like(&one, g.rows())).max_abs()
    }
}

/// Eigendecomposition of a Hermitian matrix at `prec` bits.
pub fn eigen_decompose(m: &HermitianMatrix, prec: usize) -> Result<Eigen> {
    jacobi_eigen(&m.to_float(prec), prec)
}

/// Cyclic complex Jacobi on a Hermitian matrix, run with 64 guard bits.
/// Ties between equal eigenvalues keep their diagonal order.
pub fn jacobi_eigen(m: &Mat<HpComplex>, prec: usize) -> Result<Eigen> {
    let n = m.rows();
    if n == 0 || !m.is_square() {
        return Err(Error::invalid("eigendecomposition needs a nonempty square matrix"));
    }
    let work = prec + 64;
    let mut a = m.map(|z| z.with_precision(work)).symmetrized();
    let mut u = Mat::identity_like(&HpComplex::zero(work), n);
    let scale = a.max_abs();
    let converged = |a: &Mat<HpComplex>| {
        let limit = scale.mul_pow2(-(work as i32) + 8);
        (0..n).all(|p| (p + 1..n).all(|q| a[(p, q)].abs_max() <= limit))
    };

    let mut done = scale.is_zero() || converged(&a);
    for _ in 0..MAX_SWEEPS {
        if done {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut u, p, q, &scale);
            }
        }
        done = converged(&a);
    }
    if !done {
        return Err(Error::Numerical(format!("Jacobi did not converge in {MAX_SWEEPS} sweeps")));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(Ordering::Equal).then(i.cmp(&j)));
    let values: Vec<HpReal> = order.iter().map(|&i| a[(i, i)].re.with_precision(prec)).collect();
    let vectors = Mat::from_fn(n, n, |i, j| u[(i, order[j])].with_precision(prec));
    let eig = Eigen { values, vectors };

    let bound = scale.max(&HpReal::one(work)).with_precision(prec).mul_pow2(-(prec as i32) / 2);
    if eig.residual(&m.map(|z| z.with_precision(prec))) > bound {
        return Err(Error::Numerical("eigendecomposition residual above tolerance".into()));
    }
    Ok(eig)
}

/// One rotation `V` in the `(p, q)` plane: `A ← V* A V`, `U ← U V`, where
/// `V_pp = c`, `V_pq = s`, `V_qp = −s ē`, `V_qq = c ē` and `e = a_pq/|a_pq|`.
fn rotate(a: &mut Mat<HpComplex>, u: &mut Mat<HpComplex>, p: usize, q: usize, scale: &HpReal) {
    let apq = a[(p, q)].clone();
    let work = apq.precision();
    if apq.abs_max() <= scale.mul_pow2(-(work as i32) - 8) {
        a[(p, q)] = HpComplex::zero(work);
        a[(q, p)] = HpComplex::zero(work);
        return;
    }
    let r = apq.abs();
    let phase = HpComplex::new(&apq.re / &r, &apq.im / &r);
    let one = HpReal::one(work);
    let tau = (a[(q, q)].re.clone() - a[(p, p)].re.clone()) / (r.clone() + r.clone());
    let root = (one.clone() + tau.clone() * tau.clone()).sqrt().expect("positive");
    let t = if tau.is_negative() { -(one.clone() / (root.clone() - tau)) } else { one.clone() / (tau + root) };
    let c = one.clone() / (one + t.clone() * t.clone()).sqrt().expect("positive");
    let s = t * c.clone();

    let ebar = phase.conj();
    let vpp = HpComplex::real(c.clone());
    let vpq = HpComplex::real(s.clone());
    let vqp = ebar.scale(&-s);
    let vqq = ebar.scale(&c);

    let n = a.rows();
    for k in 0..n {
        let (xp, xq) = (a[(k, p)].clone(), a[(k, q)].clone());
        a[(k, p)] = xp.clone() * vpp.clone() + xq.clone() * vqp.clone();
        a[(k, q)] = xp * vpq.clone() + xq * vqq.clone();
        let (yp, yq) = (u[(k, p)].clone(), u[(k, q)].clone());
        u[(k, p)] = yp.clone() * vpp.clone() + yq.clone() * vqp.clone();
        u[(k, q)] = yp * vpq.clone() + yq * vqq.clone();
    }
    for k in 0..n {
        let (xp, xq) = (a[(p, k)].clone(), a[(q, k)].clone());
        a[(p, k)] = vpp.conj() * xp.clone() + vqp.conj() * xq.clone();
        a[(q, k)] = vpq.conj() * xp + vqq.conj() * xq;
    }
    a[(p, q)] = HpComplex::zero(work);
    a[(q, p)] = HpComplex::zero(work);
    a[(p, p)].im = HpReal::zero(work);
    a[(q, q)].im = HpReal::zero(work);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, GaussianRational};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exact(rows: Vec<Vec<(i64, i64)>>) -> HermitianMatrix {
        let m =
            Mat::from_rows(rows.into_iter().map(|r| r.into_iter().map(|(a, b)| GaussianRational::new(rat(a), rat(b))).collect()).collect())
                .unwrap();
        HermitianMatrix::exact(m).unwrap()
    }

    fn tol(prec: usize) -> HpReal {
        HpReal::one(prec).mul_pow2(-(prec as i32) / 2)
    }

    #[test]
    fn diagonal_is_sorted() {
        let e = eigen_decompose(&exact(vec![vec![(3, 0), (0, 0)], vec![(0, 0), (1, 0)]]), 128).unwrap();
        assert_eq!(e.values, vec![HpReal::from_i64(1, 128), HpReal::from_i64(3, 128)]);
        assert!(e.vectors[(1, 0)].abs() == HpReal::one(128));
        assert!(e.vectors[(0, 0)].is_zero());
    }

    #[test]
    fn pauli_x() {
        let m = exact(vec![vec![(0, 0), (1, 0)], vec![(1, 0), (0, 0)]]);
        let e = eigen_decompose(&m, 128).unwrap();
        assert!((e.values[0].clone() + HpReal::one(128)).abs() < tol(128));
        assert!((e.values[1].clone() - HpReal::one(128)).abs() < tol(128));
    }

    #[test]
    fn complex_entries() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = exact(vec![vec![(2, 0), (0, 1)], vec![(0, -1), (2, 0)]]);
        let e = eigen_decompose(&m, 192).unwrap();
        assert!((e.values[0].clone() - HpReal::from_i64(1, 192)).abs() < tol(192).mul_pow2(-80));
        assert!((e.values[1].clone() - HpReal::from_i64(3, 192)).abs() < tol(192).mul_pow2(-80));
        assert!(e.residual(&m.to_float(192)) < tol(192));
    }

    #[test]
    fn random_hermitian_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3, 4, 6] {
            let mut rows = vec![vec![(0i64, 0i64); n]; n];
            for i in 0..n {
                rows[i][i] = (rng.gen_range(-9..10), 0);
                for j in 0..i {
                    let z = (rng.gen_range(-9..10), rng.gen_range(-9..10));
                    rows[i][j] = z;
                    rows[j][i] = (z.0, -z.1);
                }
            }
            let m = exact(rows);
            let e = eigen_decompose(&m, 256).unwrap();
            assert!(e.residual(&m.to_float(256)) < tol(256));
            assert!(e.unitarity_defect() < tol(256));
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            let trace = m.to_float(256).trace().re;
            let sum = e.values.iter().fold(HpReal::zero(256), |acc, v| acc + v.clone());
            assert!((trace - sum).abs() < tol(256));
        }
    }

    #[test]
    fn repeated_eigenvalues() {
        let m = exact(vec![vec![(2, 0), (0, 0), (0, 0)], vec![(0, 0), (1, 0), (1, 0)], vec![(0, 0), (1, 0), (1, 0)]]);
        let e = eigen_decompose(&m, 128).unwrap();
        assert!(e.values[0].abs() < tol(128));
        assert!((e.values[1].clone() - HpReal::from_i64(2, 128)).abs() < tol(128));
        assert!((e.values[2].clone() - HpReal::from_i64(2, 128)).abs() < tol(128));
    }
}
