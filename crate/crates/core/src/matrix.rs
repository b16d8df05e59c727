//! Dense complex matrices and the Hilbert-Schmidt geometry used throughout.
//!
//! Operators, density matrices and superoperators are all stored as dense
//! column-major `faer` matrices. Vectorization is row-major, so that
//! `vec(A X B) = (A ⊗ Bᵀ) vec(X)` with the standard Kronecker product.

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense complex matrix. Entries are finite by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    inner: Mat<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { inner: Mat::zeros(rows, cols) }
    }

    pub fn identity(n: usize) -> Self {
        Self { inner: Mat::identity(n, n) }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::try_from_fn(rows, cols, f).expect("non-finite entry")
    }

    pub fn try_from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> C64,
    ) -> Result<Self> {
        let m = Mat::from_fn(rows, cols, |i, j| f(i, j));
        for j in 0..cols {
            for i in 0..rows {
                let z: C64 = m[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self { inner: m })
    }

    /// Rows given in row-major order; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn from_faer(m: Mat<C64>) -> Self {
        Self { inner: m }
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.inner[(i, j)] = v;
    }

    pub fn as_faer(&self) -> faer::MatRef<'_, C64> {
        self.inner.as_ref()
    }

    pub fn as_faer_mut(&mut self) -> faer::MatMut<'_, C64> {
        self.inner.as_mut()
    }

    pub fn into_faer(self) -> Mat<C64> {
        self.inner
    }

    pub fn transpose(&self) -> Self {
        Self { inner: self.inner.transpose().to_owned() }
    }

    pub fn conj(&self) -> Self {
        Self { inner: self.inner.conjugate().to_owned() }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self { inner: self.inner.adjoint().to_owned() }
    }

    pub fn trace(&self) -> C64 {
        let n = self.nrows().min(self.ncols());
        (0..n).map(|i| self.inner[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.norm_max()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { inner: Mat::from_fn(self.nrows(), self.ncols(), |i, j| self.inner[(i, j)] * s) }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols(), rhs.nrows(), "matmul dimension mismatch");
        Self { inner: &self.inner * &rhs.inner }
    }

    /// Commutator `[self, rhs]`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// Anticommutator `{self, rhs}`.
    pub fn anticommutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) + &rhs.matmul(self)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let dev = (self - &self.dagger()).frobenius_norm();
        dev <= tol * self.frobenius_norm().max(1.0)
    }

    /// Row-major vectorization: `vec(X)[i*cols + j] = X[i][j]`.
    pub fn vectorize(&self) -> Vec<C64> {
        let (r, c) = (self.nrows(), self.ncols());
        let mut v = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                v.push(self.inner[(i, j)]);
            }
        }
        v
    }

    /// Inverse of [`CMatrix::vectorize`] for square operators.
    pub fn unvectorize(dim: usize, v: &[C64]) -> Self {
        assert_eq!(v.len(), dim * dim, "vector length does not match dimension");
        Self::from_fn(dim, dim, |i, j| v[i * dim + j])
    }

    /// Kronecker product; target dimensions multiply.
    pub fn kron(&self, rhs: &Self) -> Self {
        self.try_kron(rhs).expect("kron dimension overflow")
    }

    pub fn try_kron(&self, rhs: &Self) -> Result<Self> {
        let (ar, ac) = (self.nrows(), self.ncols());
        let (br, bc) = (rhs.nrows(), rhs.ncols());
        let rows = ar.checked_mul(br).ok_or(Error::KronOverflow(ar, br))?;
        let cols = ac.checked_mul(bc).ok_or(Error::KronOverflow(ac, bc))?;
        rows.checked_mul(cols).ok_or(Error::KronOverflow(rows, cols))?;
        let mut out = Mat::<C64>::zeros(rows, cols);
        for aj in 0..ac {
            for ai in 0..ar {
                let a = self.inner[(ai, aj)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for bj in 0..bc {
                    for bi in 0..br {
                        out[(ai * br + bi, aj * bc + bj)] = a * rhs.inner[(bi, bj)];
                    }
                }
            }
        }
        Ok(Self { inner: out })
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.nrows()).map(|i| self.inner[(i, j)]).collect()
    }

    /// Interpret column `j` as a vectorized `dim x dim` operator.
    pub fn column_as_operator(&self, j: usize, dim: usize) -> Self {
        assert_eq!(self.nrows(), dim * dim);
        Self::from_fn(dim, dim, |r, c| self.inner[(r * dim + c, j)])
    }
}

/// Hilbert-Schmidt inner product `Tr[A† B]`.
///
/// With row-major vectorization this is the plain vector inner product
/// `vec(A)† vec(B)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            left: format!("{}x{}", a.nrows(), a.ncols()),
            right: format!("{}x{}", b.nrows(), b.ncols()),
        });
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += a.get(i, j).conj() * b.get(i, j);
        }
    }
    Ok(acc)
}

/// Inner product of two complex vectors, `u† v`.
pub fn vec_inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl core::ops::Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { inner: &self.inner + &rhs.inner }
    }
}

impl core::ops::Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix { inner: &self.inner - &rhs.inner }
    }
}

impl core::ops::Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl core::ops::Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

// Pauli matrices and friends, used all over the model builders and tests.

pub fn pauli_x() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
        vec![C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
    ])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
    ])
}

/// Raising operator `σ⁺ = |↑⟩⟨↓|` in the basis where index 0 is spin up.
pub fn sigma_plus() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    ])
}

pub fn sigma_minus() -> CMatrix {
    CMatrix::from_rows(&[
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn hs_inner_identity_and_paulis() {
        let id = CMatrix::identity(2);
        assert_eq!(hs_inner(&id, &id).unwrap(), c(2.0, 0.0));
        let xy = hs_inner(&pauli_x(), &pauli_y()).unwrap();
        assert!(xy.norm() < 1e-15);
        let zz = hs_inner(&pauli_z(), &pauli_z()).unwrap();
        assert!((zz - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn hs_inner_conjugate_symmetry() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(0.5, 0.0)], vec![c(0.0, -1.0), c(3.0, 1.0)]]);
        let b = CMatrix::from_rows(&[vec![c(0.0, 1.0), c(2.0, 2.0)], vec![c(1.0, 0.0), c(-1.0, 0.5)]]);
        let ab = hs_inner(&a, &b).unwrap();
        let ba = hs_inner(&b, &a).unwrap();
        assert!((ab - ba.conj()).norm() < 1e-14);
    }

    #[test]
    fn hs_inner_dimension_mismatch() {
        assert!(hs_inner(&CMatrix::identity(2), &CMatrix::identity(3)).is_err());
    }

    #[test]
    fn kron_identities() {
        let id2 = CMatrix::identity(2);
        let id4 = id2.kron(&id2);
        assert_eq!(&id4, &CMatrix::identity(4));
        let zk = pauli_z().kron(&id2);
        for (i, want) in [1.0, 1.0, -1.0, -1.0].iter().enumerate() {
            assert_eq!(zk.get(i, i), c(*want, 0.0));
        }
    }

    #[test]
    fn vec_sandwich_identity() {
        // vec(A X B) = (A ⊗ Bᵀ) vec(X), checked on the Pauli conjugation example.
        let x = pauli_x();
        let rho = CMatrix::identity(2).scale(c(0.5, 0.0));
        let sandwich = &(&x * &rho) * &x;
        let k = x.kron(&x.transpose());
        let v = rho.vectorize();
        let kv: Vec<C64> = (0..4)
            .map(|i| (0..4).map(|j| k.get(i, j) * v[j]).sum())
            .collect();
        let direct = sandwich.vectorize();
        for (a, b) in kv.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn vec_identity_random() {
        // vec(A X B) = (A ⊗ Bᵀ) vec(X) for pseudo-random matrices up to dim 8.
        let mut state = 1u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as f64) / (u32::MAX as f64) - 0.5
        };
        for dim in [2usize, 3, 5, 8] {
            let mut rnd = |_: usize, _: usize| c(next(), next());
            let a = CMatrix::from_fn(dim, dim, &mut rnd);
            let x = CMatrix::from_fn(dim, dim, &mut rnd);
            let b = CMatrix::from_fn(dim, dim, &mut rnd);
            let lhs = (&(&a * &x) * &b).vectorize();
            let k = a.kron(&b.transpose());
            let v = x.vectorize();
            for i in 0..dim * dim {
                let rhs: C64 = (0..dim * dim).map(|j| k.get(i, j) * v[j]).sum();
                assert!((lhs[i] - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn non_finite_rejected() {
        let r = CMatrix::try_from_fn(2, 2, |i, j| {
            if (i, j) == (1, 0) { c(f64::NAN, 0.0) } else { c(1.0, 0.0) }
        });
        assert!(matches!(r, Err(Error::NonFinite { row: 1, col: 0 })));
    }
}
