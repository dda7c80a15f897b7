//! Dense complex linear algebra for small Hermitian operators.

mod jacobi;

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::BipartiteDims;

/// Entrywise tolerance on `a_ij - conj(a_ji)` for the Hermitian invariant.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalues at or below this are treated as zero for support decisions.
pub const SPECTRAL_FLOOR: f64 = 1e-14;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Builds from row-major data. Fails unless `data.len()` is a perfect square.
    pub fn from_row_major(data: Vec<Complex64>) -> Result<Self> {
        let n = (data.len() as f64).sqrt().round() as usize;
        if n * n != data.len() || n == 0 {
            return Err(Error::DimensionMismatch { expected: n * n, found: data.len() });
        }
        Ok(Self { n, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*d, 0.0);
        }
        m
    }

    /// `|v><v|`
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "matmul dimension mismatch");
        let n = self.n;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for (k, a) in row.iter().enumerate() {
                if *a == ZERO {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Self { n, data: out }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (n, m) = (self.n, rhs.n);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * rhs[(i % m, j % m)])
    }

    /// Largest entrywise deviation `|a_ij - conj(a_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.n, rhs.n);
        CMatrix { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// A complex matrix known to satisfy `a_ij = conj(a_ji)` within [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    /// Validates the Hermitian invariant, then exactly symmetrizes.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.dim() == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let defect = m.hermitian_defect();
        if defect.is_nan() || defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self::symmetrized(m))
    }

    /// Projects onto the Hermitian part `(M + M^dagger) / 2` without checking.
    pub(crate) fn symmetrized(mut m: CMatrix) -> Self {
        let n = m.dim();
        for i in 0..n {
            m[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                m[(i, j)] = avg;
                m[(j, i)] = avg.conj();
            }
        }
        Self(m)
    }

    pub fn zeros(n: usize) -> Self {
        Self(CMatrix::zeros(n))
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(CMatrix::from_real_diagonal(diag))
    }

    /// Rank-one projector `|v><v|` (not normalized).
    pub fn projector(v: &[Complex64]) -> Self {
        Self::symmetrized(CMatrix::outer(v))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Re tr(self · other)`; exact for a pair of Hermitian matrices.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        let n = self.dim();
        assert_eq!(n, other.dim());
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.0[(i, j)];
                let b = other.0[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self(self.0.scale(Complex64::new(s, 0.0)))
    }

    /// `a·self + b·other`
    pub fn lincomb(&self, a: f64, other: &HermitianMatrix, b: f64) -> Self {
        assert_eq!(self.dim(), other.dim());
        let data = self.0.data.iter().zip(&other.0.data).map(|(x, y)| x * a + y * b).collect();
        Self(CMatrix { n: self.dim(), data })
    }

    pub fn eig(&self) -> EigenDecomposition {
        eig_hermitian(self)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eig_hermitian(self).eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Natural matrix logarithm; requires a strictly positive spectrum.
    pub fn log(&self) -> Result<HermitianMatrix> {
        matrix_log(self)
    }

    pub fn trace_norm(&self) -> f64 {
        trace_norm(self)
    }

    pub fn operator_norm(&self) -> f64 {
        operator_norm(self)
    }

    pub fn tensor(&self, rhs: &HermitianMatrix) -> HermitianMatrix {
        tensor_product(self, rhs)
    }

    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.0.max_abs_diff(&other.0)
    }
}

impl Index<(usize, usize)> for HermitianMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn mul(self, rhs: f64) -> HermitianMatrix {
        self.scaled(rhs)
    }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` pairs with `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl EigenDecomposition {
    /// `V · diag(f(λ)) · V^dagger`
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.eigenvalues.len();
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = &self.eigenvectors;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = ZERO;
                for (k, fk) in vals.iter().enumerate() {
                    if *fk != 0.0 {
                        acc += v[(i, k)] * v[(j, k)].conj() * *fk;
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
        HermitianMatrix::symmetrized(out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map_spectrum(|l| l)
    }

    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        let n = self.eigenvalues.len();
        (0..n).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// `V^dagger · M · V`, i.e. `M` expressed in the eigenbasis.
    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        let v = &self.eigenvectors;
        v.adjoint().matmul(&m.matmul(v))
    }

    /// `V · M · V^dagger`
    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        let v = &self.eigenvectors;
        v.matmul(&m.matmul(&v.adjoint()))
    }
}

pub fn eig_hermitian(h: &HermitianMatrix) -> EigenDecomposition {
    let n = h.dim();
    let mut a = h.0.data.clone();
    let mut v = vec![ZERO; n * n];
    jacobi::diagonalize(&mut a, &mut v, n);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues = order.iter().map(|&k| a[k * n + k].re).collect();
    let eigenvectors = CMatrix::from_fn(n, |i, j| v[i * n + order[j]]);
    EigenDecomposition { eigenvalues, eigenvectors }
}

/// Natural logarithm `V · diag(ln λ) · V^dagger`.
pub fn matrix_log(h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = h.eig();
    let min = eig.eigenvalues[0];
    if min <= SPECTRAL_FLOOR {
        return Err(Error::NonPositiveSpectrum(min));
    }
    Ok(eig.map_spectrum(f64::ln))
}

/// Transpose on the B factor: `M[(a,b),(a',b')] -> M[(a,b'),(a',b)]`.
pub fn partial_transpose(m: &HermitianMatrix, dims: BipartiteDims) -> Result<HermitianMatrix> {
    check_dim(m, dims)?;
    let db = dims.db();
    let out = CMatrix::from_fn(m.dim(), |r, c| {
        let (a, b) = (r / db, r % db);
        let (a2, b2) = (c / db, c % db);
        m[(a * db + b2, a2 * db + b)]
    });
    Ok(HermitianMatrix(out))
}

/// Subsystem selector for [`partial_trace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Traces out `which`, returning the reduced operator on the other factor.
pub fn partial_trace(m: &HermitianMatrix, dims: BipartiteDims, which: Subsystem) -> Result<HermitianMatrix> {
    check_dim(m, dims)?;
    let (da, db) = (dims.da(), dims.db());
    let out = match which {
        Subsystem::B => CMatrix::from_fn(da, |a, a2| (0..db).map(|b| m[(a * db + b, a2 * db + b)]).sum()),
        Subsystem::A => CMatrix::from_fn(db, |b, b2| (0..da).map(|a| m[(a * db + b, a * db + b2)]).sum()),
    };
    Ok(HermitianMatrix::symmetrized(out))
}

/// `tr|M|`, the sum of absolute eigenvalues (no 1/2 factor).
pub fn trace_norm(m: &HermitianMatrix) -> f64 {
    m.eigenvalues().iter().map(|l| l.abs()).sum()
}

/// Largest absolute eigenvalue.
pub fn operator_norm(m: &HermitianMatrix) -> f64 {
    let ev = m.eigenvalues();
    ev[0].abs().max(ev[ev.len() - 1].abs())
}

pub fn tensor_product(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix(a.0.kron(&b.0))
}

fn check_dim(m: &HermitianMatrix, dims: BipartiteDims) -> Result<()> {
    if m.dim() != dims.total() {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: m.dim() });
    }
    Ok(())
}

/// Normalizes a vector in place; returns its original Euclidean norm.
pub(crate) fn normalize(v: &mut [Complex64]) -> f64 {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

/// Kronecker product of two vectors.
pub(crate) fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(n: usize, seed: u64) -> HermitianMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMatrix::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        HermitianMatrix::symmetrized(&m + &m.adjoint())
    }

    fn bell() -> HermitianMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        HermitianMatrix::projector(&[c(s, 0.0), ZERO, ZERO, c(s, 0.0)])
    }

    #[test]
    fn eig_identity_and_diagonal() {
        assert_eq!(HermitianMatrix::identity(2).eigenvalues(), vec![1.0, 1.0]);
        assert_eq!(HermitianMatrix::from_real_diagonal(&[1.0, -1.0]).eigenvalues(), vec![-1.0, 1.0]);
    }

    #[test]
    fn eig_reconstructs_random_matrices() {
        for (seed, n) in [(1u64, 4usize), (2, 4), (3, 7), (4, 16), (5, 64)] {
            let h = random_hermitian(n, seed);
            let e = h.eig();
            let residual = (&e.reconstruct().0 - &h.0).frobenius_norm();
            assert!(residual <= 1e-10 * n as f64, "n={n} residual={residual:e}");
            let vv = e.eigenvectors.adjoint().matmul(&e.eigenvectors);
            assert!(vv.max_abs_diff(&CMatrix::identity(n)) <= 1e-10);
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_two_by_two_closed_form() {
        // [[1, i],[-i, 1]] has eigenvalues 0 and 2.
        let m = HermitianMatrix::new(CMatrix::from_row_major(vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]).unwrap()).unwrap();
        let ev = m.eigenvalues();
        assert!(ev[0].abs() < 1e-15 && (ev[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_major(vec![c(1.0, 0.0), c(0.5, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn log_examples() {
        let zero = matrix_log(&HermitianMatrix::identity(3)).unwrap();
        assert!(zero.max_abs_diff(&HermitianMatrix::zeros(3)) < 1e-15);
        let e = std::f64::consts::E;
        let one = matrix_log(&HermitianMatrix::from_real_diagonal(&[e, e])).unwrap();
        assert!(one.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-15);
        let tau = HermitianMatrix::identity(4).scaled(0.25);
        let l = matrix_log(&tau).unwrap();
        assert!(l.max_abs_diff(&HermitianMatrix::identity(4).scaled(-(4f64).ln())) < 1e-14);
        assert!(matches!(matrix_log(&HermitianMatrix::from_real_diagonal(&[1.0, 0.0])), Err(Error::NonPositiveSpectrum(_))));
    }

    #[test]
    fn partial_transpose_of_bell() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let pt = partial_transpose(&bell(), dims).unwrap();
        let ev = pt.eigenvalues();
        let want = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        let back = partial_transpose(&pt, dims).unwrap();
        assert_eq!(back, bell());
    }

    #[test]
    fn partial_transpose_of_real_product_is_product() {
        let a = HermitianMatrix::new(CMatrix::from_row_major(vec![c(0.7, 0.0), c(0.2, 0.0), c(0.2, 0.0), c(0.3, 0.0)]).unwrap()).unwrap();
        let b = HermitianMatrix::new(
            CMatrix::from_row_major(vec![
                c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0),
                c(0.1, 0.0), c(0.3, 0.0), c(0.05, 0.0),
                c(0.0, 0.0), c(0.05, 0.0), c(0.2, 0.0),
            ])
            .unwrap(),
        )
        .unwrap();
        let prod = a.tensor(&b);
        let pt = partial_transpose(&prod, BipartiteDims::new(2, 3).unwrap()).unwrap();
        assert!(pt.max_abs_diff(&prod) < 1e-16);
    }

    #[test]
    fn partial_trace_examples() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let reduced = partial_trace(&bell(), dims, Subsystem::B).unwrap();
        assert!(reduced.max_abs_diff(&HermitianMatrix::identity(2).scaled(0.5)) < 1e-15);

        let a = random_hermitian(2, 9);
        let b = random_hermitian(3, 10);
        let prod = a.tensor(&b);
        let d23 = BipartiteDims::new(2, 3).unwrap();
        let ra = partial_trace(&prod, d23, Subsystem::B).unwrap();
        assert!(ra.max_abs_diff(&a.scaled(b.trace())) < 1e-13);
        let rb = partial_trace(&prod, d23, Subsystem::A).unwrap();
        assert!(rb.max_abs_diff(&b.scaled(a.trace())) < 1e-13);
        assert!((ra.trace() - prod.trace()).abs() < 1e-12);
    }

    #[test]
    fn norms() {
        assert_eq!(trace_norm(&HermitianMatrix::zeros(3)), 0.0);
        let d = HermitianMatrix::from_real_diagonal(&[0.3, -0.7]);
        assert!((trace_norm(&d) - 1.0).abs() < 1e-15);
        assert!((operator_norm(&d) - 0.7).abs() < 1e-15);
        assert!((operator_norm(&HermitianMatrix::identity(5)) - 1.0).abs() < 1e-15);
        let p0 = HermitianMatrix::projector(&[ONE, ZERO]);
        let p1 = HermitianMatrix::projector(&[ZERO, ONE]);
        assert!((trace_norm(&(&p0 - &p1)) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_examples() {
        assert_eq!(HermitianMatrix::identity(2).tensor(&HermitianMatrix::identity(2)), HermitianMatrix::identity(4));
        let p0 = HermitianMatrix::projector(&[ONE, ZERO]);
        let p1 = HermitianMatrix::projector(&[ZERO, ONE]);
        let p01 = HermitianMatrix::projector(&[ZERO, ONE, ZERO, ZERO]);
        assert_eq!(p0.tensor(&p1), p01);
        let a = random_hermitian(3, 11);
        let b = random_hermitian(2, 12);
        assert!((a.tensor(&b).trace() - a.trace() * b.trace()).abs() < 1e-12);
    }
}
