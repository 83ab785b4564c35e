//! Dense Hermitian matrices over exact or high-precision complex scalars.

mod frame;
mod functions;
mod jacobi;
mod ldl;

use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use frame::{check_psd, conjugate, to_eigenframe, AnyFrame, EigenFrame};
pub use functions::{complex_matrix_exp, hermitian_function};
pub use jacobi::{eigen_decompose, jacobi_eigen, Eigen};
pub use ldl::{gram_rows, ldl_psd, Gram, GramRows, Ldl};

use crate::error::{Error, Result};
use crate::exactnum::{parse_rational, ComplexScalar, GaussianRational, HpComplex, HpReal, Scalar};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Mat<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged matrix rows"));
        }
        Ok(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn entries(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mat<T> {
    /// `n × n` identity whose entries share `like`'s precision.
    pub fn identity_like(like: &T, n: usize) -> Self {
        Self::from_fn(n, n, |i, j| like.int_like((i == j) as i64))
    }

    pub fn zeros_like(like: &T, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| like.zero_like())
    }

    pub fn diagonal(values: &[T]) -> Self {
        Self::from_fn(values.len(), values.len(), |i, j| if i == j { values[i].clone() } else { values[i].zero_like() })
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let seed = self.data.first().or(other.data.first()).expect("nonempty matrix");
        Self::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols).fold(seed.zero_like(), |acc, k| acc + self[(i, k)].clone() * other[(k, j)].clone())
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() + other[(i, j)].clone())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)].clone() - other[(i, j)].clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn trace(&self) -> T {
        let seed = self.data.first().expect("nonempty matrix").zero_like();
        (0..self.rows.min(self.cols)).fold(seed, |acc, i| acc + self[(i, i)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Scalar::is_zero)
    }
}

impl<C: ComplexScalar> Mat<C> {
    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Exact Hermitian test.
    pub fn is_hermitian(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..=i).all(|j| self[(i, j)] == self[(j, i)].conj()))
    }

    pub fn to_hp(&self, prec: usize) -> Mat<HpComplex> {
        self.map(|z| z.to_hp(prec))
    }
}

impl Mat<HpComplex> {
    /// Largest `max(|re|, |im|)` over all entries.
    pub fn max_abs(&self) -> HpReal {
        let prec = self.data.first().map_or(64, HpComplex::precision);
        self.data.iter().fold(HpReal::zero(prec), |acc, z| acc.max(&z.abs_max()))
    }

    /// `(M + M*)/2`, with an exactly real diagonal.
    pub fn symmetrized(&self) -> Self {
        let half = |z: HpComplex| {
            let prec = z.precision();
            z.scale(&HpReal::one(prec).mul_pow2(-1))
        };
        let mut out = Self::from_fn(self.rows, self.cols, |i, j| half(self[(i, j)].clone() + self[(j, i)].conj()));
        for i in 0..self.rows {
            let prec = out[(i, i)].precision();
            out[(i, i)].im = HpReal::zero(prec);
        }
        out
    }
}

/// A square self-adjoint matrix, exact or float.
#[derive(Clone, Debug, PartialEq)]
pub enum HermitianMatrix {
    Exact(Mat<GaussianRational>),
    Float(Mat<HpComplex>),
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    re: String,
    #[serde(default = "zero_text")]
    im: String,
}

fn zero_text() -> String {
    "0".into()
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    mode: String,
    entries: Vec<Vec<EntryRepr>>,
}

impl HermitianMatrix {
    /// Validates exact self-adjointness.
    pub fn exact(m: Mat<GaussianRational>) -> Result<Self> {
        if !m.is_hermitian() {
            return Err(Error::invalid("matrix is not Hermitian"));
        }
        Ok(HermitianMatrix::Exact(m))
    }

    /// Validates self-adjointness to `2^(-prec/2)` relative to the largest
    /// entry, then symmetrizes.
    pub fn float(m: Mat<HpComplex>, prec: usize) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("matrix is not square"));
        }
        let defect = m.sub(&m.adjoint()).max_abs();
        let scale = m.max_abs().max(&HpReal::one(prec));
        if defect > scale.mul_pow2(-(prec as i32) / 2) {
            return Err(Error::invalid("matrix is not Hermitian"));
        }
        Ok(HermitianMatrix::Float(m.symmetrized()))
    }

    /// Real symmetric exact matrix from rational rows.
    pub fn from_rational_rows(rows: Vec<Vec<crate::exactnum::ExactRational>>) -> Result<Self> {
        let m = Mat::from_rows(rows)?.map(|q| GaussianRational::real(q.clone()));
        Self::exact(m)
    }

    pub fn n(&self) -> usize {
        match self {
            HermitianMatrix::Exact(m) => m.rows(),
            HermitianMatrix::Float(m) => m.rows(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, HermitianMatrix::Exact(_))
    }

    pub fn mode(&self) -> &'static str {
        if self.is_exact() {
            "exact"
        } else {
            "float"
        }
    }

    pub fn to_float(&self, prec: usize) -> Mat<HpComplex> {
        match self {
            HermitianMatrix::Exact(m) => m.to_hp(prec),
            HermitianMatrix::Float(m) => m.map(|z| z.with_precision(prec)),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            HermitianMatrix::Exact(m) => m.is_zero(),
            HermitianMatrix::Float(m) => m.is_zero(),
        }
    }

    /// Parses `{"n", "mode", "entries": [[{re, im}]]}`. Float entries are read
    /// at `prec` bits.
    pub fn from_json(value: &Value, prec: usize) -> Result<Self> {
        let repr: MatrixRepr = serde_json::from_value(value.clone())?;
        if repr.entries.len() != repr.n || repr.entries.iter().any(|r| r.len() != repr.n) {
            return Err(Error::invalid(format!("entries do not form a {0}x{0} matrix", repr.n)));
        }
        match repr.mode.as_str() {
            "exact" => {
                let rows = repr
                    .entries
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| Ok(GaussianRational::new(parse_rational(&e.re)?, parse_rational(&e.im)?)))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::exact(Mat::from_rows(rows)?)
            }
            "float" => {
                let rows = repr
                    .entries
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|e| Ok(HpComplex::new(HpReal::parse(&e.re, prec)?, HpReal::parse(&e.im, prec)?)))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::float(Mat::from_rows(rows)?, prec)
            }
            other => Err(Error::invalid(format!("unknown matrix mode {other:?}"))),
        }
    }

    pub fn parse_json(text: &str, prec: usize) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?, prec)
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Vec<EntryRepr>> = match self {
            HermitianMatrix::Exact(m) => m
                .to_rows()
                .iter()
                .map(|row| row.iter().map(|z| EntryRepr { re: z.re.to_string(), im: z.im.to_string() }).collect())
                .collect(),
            HermitianMatrix::Float(m) => m
                .to_rows()
                .iter()
                .map(|row| row.iter().map(|z| EntryRepr { re: z.re.to_string(), im: z.im.to_string() }).collect())
                .collect(),
        };
        serde_json::to_value(MatrixRepr { n: self.n(), mode: self.mode().into(), entries }).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::{rat, ratio};

    fn g(re: i64, im: i64) -> GaussianRational {
        GaussianRational::new(rat(re), rat(im))
    }

    #[test]
    fn exact_json_round_trip() {
        let m = Mat::from_rows(vec![vec![g(2, 0), g(1, -1)], vec![g(1, 1), GaussianRational::real(ratio(1, 3))]]).unwrap();
        let h = HermitianMatrix::exact(m).unwrap();
        let json = h.to_json();
        assert_eq!(json["mode"], "exact");
        assert_eq!(json["entries"][0][1]["im"], "-1");
        assert_eq!(json["entries"][1][1]["re"], "1/3");
        assert_eq!(HermitianMatrix::from_json(&json, 128).unwrap(), h);
    }

    #[test]
    fn float_json_round_trip() {
        let text =
            r#"{"n":2,"mode":"float","entries":[[{"re":"1.5"},{"re":"0.25","im":"1e-3"}],[{"re":"0.25","im":"-1e-3"},{"re":"-2"}]]}"#;
        let h = HermitianMatrix::parse_json(text, 128).unwrap();
        assert!(!h.is_exact());
        let back = HermitianMatrix::from_json(&h.to_json(), 128).unwrap();
        let (HermitianMatrix::Float(a), HermitianMatrix::Float(b)) = (&h, &back) else { panic!() };
        assert!(a.sub(b).max_abs() < HpReal::one(128).mul_pow2(-120));
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = Mat::from_rows(vec![vec![g(1, 0), g(2, 0)], vec![g(3, 0), g(1, 0)]]).unwrap();
        assert!(HermitianMatrix::exact(m).is_err());
        let text = r#"{"n":2,"mode":"exact","entries":[[{"re":"1","im":"1"},{"re":"0"}],[{"re":"0"},{"re":"1"}]]}"#;
        assert!(HermitianMatrix::parse_json(text, 128).is_err());
        let text = r#"{"n":3,"mode":"exact","entries":[[{"re":"1"}]]}"#;
        assert!(HermitianMatrix::parse_json(text, 128).is_err());
    }

    #[test]
    fn matrix_algebra() {
        let a = Mat::from_rows(vec![vec![rat(1), rat(2)], vec![rat(3), rat(4)]]).unwrap();
        let i = Mat::identity_like(&rat(0), 2);
        assert_eq!(a.matmul(&i), a);
        assert_eq!(a.trace(), rat(5));
        assert_eq!(a.matmul(&a)[(1, 0)], rat(15));
        let z = Mat::from_rows(vec![vec![g(0, 1)]]).unwrap();
        assert_eq!(z.adjoint()[(0, 0)], g(0, -1));
    }
}
