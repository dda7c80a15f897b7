//! Bipartite density matrices, canonical states and seeded samplers.

mod file;

pub use file::density_serde;

pub use file::{read_state_file, spectrum_csv, to_json_string, write_state_file, StateFile};

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DensityViolation, Error, Result};
use crate::linalg::{self, CMatrix, HermitianMatrix, Subsystem, ONE, ZERO};

/// Trace must be within this of one.
pub const TRACE_TOL: f64 = 1e-10;
/// Smallest eigenvalue accepted (then clipped to zero).
pub const PSD_TOL: f64 = 1e-10;

/// Factorization `N = dA · dB` of the joint Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "[usize; 2]", into = "[usize; 2]")]
pub struct BipartiteDims {
    da: usize,
    db: usize,
}

impl BipartiteDims {
    pub fn new(da: usize, db: usize) -> Result<Self> {
        if da == 0 || db == 0 {
            return Err(Error::InvalidDims(da, db));
        }
        Ok(Self { da, db })
    }

    pub fn da(&self) -> usize {
        self.da
    }

    pub fn db(&self) -> usize {
        self.db
    }

    /// `N = dA · dB`
    pub fn total(&self) -> usize {
        self.da * self.db
    }

    /// Dimensions of the `n`-fold tensor power with the cut `A^n : B^n`.
    pub fn power(&self, n: u32) -> Self {
        Self { da: self.da.pow(n), db: self.db.pow(n) }
    }
}

impl std::fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.da, self.db)
    }
}

impl std::str::FromStr for BipartiteDims {
    type Err = Error;

    /// Parses `"2x3"`.
    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| Error::Parse(format!("dims `{s}` is not of the form dAxdB")))?;
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("dims `{s}`: {e}")));
        Self::new(parse(a)?, parse(b)?)
    }
}

impl TryFrom<[usize; 2]> for BipartiteDims {
    type Error = Error;
    fn try_from(v: [usize; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<BipartiteDims> for [usize; 2] {
    fn from(d: BipartiteDims) -> Self {
        [d.da, d.db]
    }
}

/// Unit-trace positive semidefinite Hermitian operator on `H_A ⊗ H_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    dims: BipartiteDims,
}

impl DensityMatrix {
    /// Validates a raw complex matrix, reporting which condition failed.
    pub fn from_matrix(m: CMatrix, dims: BipartiteDims) -> Result<Self> {
        if m.dim() != dims.total() {
            return Err(Error::DimensionMismatch { expected: dims.total(), found: m.dim() });
        }
        let h = HermitianMatrix::new(m).map_err(|_| Error::NotDensityMatrix(DensityViolation::Hermiticity))?;
        validate_density(h, dims)
    }

    /// Wraps a matrix already known to be a state (convex combinations,
    /// tensor products and partial traces of states).
    pub(crate) fn from_trusted(matrix: HermitianMatrix, dims: BipartiteDims) -> Self {
        debug_assert_eq!(matrix.dim(), dims.total());
        Self { matrix, dims }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.total()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.matrix.eigenvalues()
    }

    /// `tr(ρ²)`
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix)
    }

    /// `(1 - t)·self + t·other`
    pub fn mix(&self, other: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
        self.check_same_dims(other)?;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::OutOfDomain { name: "t", value: t, domain: "[0, 1]" });
        }
        Ok(Self::from_trusted(self.matrix.lincomb(1.0 - t, &other.matrix, t), self.dims))
    }

    /// Reduced state on the factor that is kept.
    pub fn reduced(&self, traced_out: Subsystem) -> DensityMatrix {
        let m = linalg::partial_trace(&self.matrix, self.dims, traced_out).expect("dims are consistent");
        let d = match traced_out {
            Subsystem::A => self.dims.db,
            Subsystem::B => self.dims.da,
        };
        Self::from_trusted(m, BipartiteDims { da: d, db: 1 })
    }

    /// `self ⊗ other` regrouped so the cut is `(A A') : (B B')`.
    pub fn tensor_bipartite(&self, other: &DensityMatrix) -> DensityMatrix {
        let (da1, db1) = (self.dims.da, self.dims.db);
        let (da2, db2) = (other.dims.da, other.dims.db);
        let dims = BipartiteDims { da: da1 * da2, db: db1 * db2 };
        let n2 = other.dim();
        let kron = self.matrix.tensor(&other.matrix);
        // kron index: (a1 db1 + b1) n2 + (a2 db2 + b2); target: (a1 da2 + a2) (db1 db2) + b1 db2 + b2
        let map = |t: usize| {
            let (a, b) = (t / dims.db, t % dims.db);
            let (a1, a2) = (a / da2, a % da2);
            let (b1, b2) = (b / db2, b % db2);
            (a1 * db1 + b1) * n2 + a2 * db2 + b2
        };
        let perm: Vec<usize> = (0..dims.total()).map(map).collect();
        let m = CMatrix::from_fn(dims.total(), |i, j| kron[(perm[i], perm[j])]);
        Self::from_trusted(HermitianMatrix::symmetrized(m), dims)
    }

    /// `σ^{⊗n}` with the cut `A^n : B^n`.
    pub fn tensor_power(&self, n: u32) -> DensityMatrix {
        assert!(n >= 1, "tensor power needs n >= 1");
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor_bipartite(self);
        }
        out
    }

    pub(crate) fn check_same_dims(&self, other: &DensityMatrix) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(())
    }
}

/// Checks trace and positivity; small negative eigenvalues (down to
/// `-PSD_TOL`) are clipped to zero and the result renormalized.
pub fn validate_density(m: HermitianMatrix, dims: BipartiteDims) -> Result<DensityMatrix> {
    if m.dim() != dims.total() {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: m.dim() });
    }
    let tr = m.trace();
    if !tr.is_finite() || (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotDensityMatrix(DensityViolation::Trace));
    }
    let eig = m.eig();
    let min = eig.eigenvalues[0];
    if !(min >= -PSD_TOL) {
        return Err(Error::NotDensityMatrix(DensityViolation::Positivity));
    }
    if min < 0.0 {
        let clipped = eig.map_spectrum(|l| l.max(0.0));
        let t = clipped.trace();
        return Ok(DensityMatrix::from_trusted(clipped.scaled(1.0 / t), dims));
    }
    Ok(DensityMatrix::from_trusted(m, dims))
}

/// `τ = I/N`
pub fn maximally_mixed(dims: BipartiteDims) -> DensityMatrix {
    let n = dims.total();
    DensityMatrix::from_trusted(HermitianMatrix::identity(n).scaled(1.0 / n as f64), dims)
}

/// The four 2⊗2 Bell vectors in the order `Φ+, Φ-, Ψ+, Ψ-`.
pub fn bell_vectors() -> [[Complex64; 4]; 4] {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [[s, ZERO, ZERO, s], [s, ZERO, ZERO, -s], [ZERO, s, s, ZERO], [ZERO, s, -s, ZERO]]
}

pub fn qubit_pair() -> BipartiteDims {
    BipartiteDims { da: 2, db: 2 }
}

/// `|Φ+><Φ+|` with `|Φ+> = (|00> + |11>)/√2`.
pub fn bell_state() -> DensityMatrix {
    DensityMatrix::from_trusted(HermitianMatrix::projector(&bell_vectors()[0]), qubit_pair())
}

/// `Σ p_i |B_i><B_i|` over the Bell basis ordered `Φ+, Φ-, Ψ+, Ψ-`.
pub fn bell_diagonal(p: [f64; 4]) -> Result<DensityMatrix> {
    if p.iter().any(|x| !(*x >= 0.0)) {
        return Err(Error::NotProbabilityVector(format!("negative or NaN entry in {p:?}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > TRACE_TOL {
        return Err(Error::NotProbabilityVector(format!("entries sum to {total}")));
    }
    let mut m = HermitianMatrix::zeros(4);
    for (w, v) in p.iter().zip(bell_vectors()) {
        if *w > 0.0 {
            m = m.lincomb(1.0, &HermitianMatrix::projector(&v), *w);
        }
    }
    Ok(DensityMatrix::from_trusted(m, qubit_pair()))
}

/// Pure product state `|a><a| ⊗ |b><b|` from explicit factors (normalized here).
pub fn product_pure(a: &[Complex64], b: &[Complex64]) -> Result<DensityMatrix> {
    let dims = BipartiteDims::new(a.len(), b.len())?;
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    if linalg::normalize(&mut a) == 0.0 || linalg::normalize(&mut b) == 0.0 {
        return Err(Error::Parse("zero vector cannot be normalized".into()));
    }
    Ok(DensityMatrix::from_trusted(HermitianMatrix::projector(&linalg::kron_vec(&a, &b)), dims))
}

/// Computational basis state `|i>` in dimension `dim`.
pub fn basis_vector(dim: usize, i: usize) -> Vec<Complex64> {
    (0..dim).map(|k| if k == i { ONE } else { ZERO }).collect()
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian_vector<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

pub(crate) fn haar_vector<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let mut v = gaussian_vector(dim, rng);
        if linalg::normalize(&mut v) > 1e-300 {
            return v;
        }
    }
}

/// Haar-random unit vector: normalized i.i.d. standard complex Gaussians.
pub fn random_pure(dim: usize, seed: u64) -> Vec<Complex64> {
    haar_vector(dim, &mut rng_from_seed(seed))
}

/// Induced-measure mixed state: trace out a `rank`-dimensional ancilla from
/// a Haar-random pure state on `N · rank` dimensions.
pub fn random_mixed(dims: BipartiteDims, rank: usize, seed: u64) -> Result<DensityMatrix> {
    let n = dims.total();
    if rank == 0 || rank > n * n {
        return Err(Error::DimensionMismatch { expected: n, found: rank });
    }
    let psi = haar_vector(n * rank, &mut rng_from_seed(seed));
    // psi indexed (i, k) with k the ancilla; ρ = ψ ψ^dagger over k.
    let m = CMatrix::from_fn(n, |i, j| (0..rank).map(|k| psi[i * rank + k] * psi[j * rank + k].conj()).sum());
    let h = HermitianMatrix::symmetrized(m);
    let t = h.trace();
    Ok(DensityMatrix::from_trusted(h.scaled(1.0 / t), dims))
}

/// `|a><a| ⊗ |b><b|` with independent Haar factors. Always separable.
pub fn random_product_pure(dims: BipartiteDims, seed: u64) -> DensityMatrix {
    let mut rng = rng_from_seed(seed);
    let a = haar_vector(dims.da, &mut rng);
    let b = haar_vector(dims.db, &mut rng);
    DensityMatrix::from_trusted(HermitianMatrix::projector(&linalg::kron_vec(&a, &b)), dims)
}

/// GUE-like observable: `(G + G^dagger)/2` with i.i.d. complex Gaussian `G`.
pub fn random_hermitian(dim: usize, seed: u64) -> HermitianMatrix {
    let g = gaussian_vector(dim * dim, &mut rng_from_seed(seed));
    HermitianMatrix::symmetrized(CMatrix::from_fn(dim, |i, j| g[i * dim + j]))
}

/// `T = tr|σ1 - σ2|`, in `[0, 2]`.
pub fn trace_distance(s1: &DensityMatrix, s2: &DensityMatrix) -> Result<f64> {
    s1.check_same_dims(s2)?;
    Ok(linalg::trace_norm(&(s1.matrix() - s2.matrix())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d22() -> BipartiteDims {
        qubit_pair()
    }

    #[test]
    fn random_hermitian_is_seeded() {
        let a = random_hermitian(4, 9);
        assert_eq!(a, random_hermitian(4, 9));
        assert_ne!(a, random_hermitian(4, 10));
        assert_eq!(a.matrix().hermitian_defect(), 0.0);
    }

    #[test]
    fn dims_parse_and_validate() {
        assert_eq!("2x3".parse::<BipartiteDims>().unwrap(), BipartiteDims::new(2, 3).unwrap());
        assert!(matches!("0x2".parse::<BipartiteDims>(), Err(Error::InvalidDims(0, 2))));
        assert!("2by2".parse::<BipartiteDims>().is_err());
    }

    #[test]
    fn validate_examples() {
        let tau = HermitianMatrix::identity(4).scaled(0.25);
        assert!(validate_density(tau, d22()).is_ok());
        let d12 = BipartiteDims::new(1, 2).unwrap();
        let bad_trace = HermitianMatrix::from_real_diagonal(&[0.5, 0.6]);
        assert!(matches!(validate_density(bad_trace, d12), Err(Error::NotDensityMatrix(DensityViolation::Trace))));
        let bad_psd = HermitianMatrix::from_real_diagonal(&[1.2, -0.2]);
        assert!(matches!(validate_density(bad_psd, d12), Err(Error::NotDensityMatrix(DensityViolation::Positivity))));
        let c = |re| Complex64::new(re, 0.0);
        let skew = CMatrix::from_row_major(vec![c(0.5), c(0.1), c(0.0), c(0.5)]).unwrap();
        assert!(matches!(
            DensityMatrix::from_matrix(skew, d12),
            Err(Error::NotDensityMatrix(DensityViolation::Hermiticity))
        ));
        assert!(matches!(
            validate_density(HermitianMatrix::identity(3), d22()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tiny_negative_eigenvalue_is_clipped() {
        let m = HermitianMatrix::from_real_diagonal(&[1.0 + 5e-11, -5e-11]);
        let s = validate_density(m, BipartiteDims::new(2, 1).unwrap()).unwrap();
        assert!(s.eigenvalues()[0] >= 0.0);
        assert!((s.matrix().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_states() {
        let tau = maximally_mixed(d22());
        assert!(tau.matrix().max_abs_diff(&HermitianMatrix::from_real_diagonal(&[0.25; 4])) == 0.0);
        let bell = bell_state();
        assert!((bell.matrix().trace() - 1.0).abs() < 1e-15);
        assert!((bell.purity() - 1.0).abs() < 1e-15);
        let red = bell.reduced(Subsystem::B);
        assert!(red.matrix().max_abs_diff(&HermitianMatrix::identity(2).scaled(0.5)) < 1e-15);
        let pt = linalg::partial_transpose(bell.matrix(), d22()).unwrap();
        assert!((pt.min_eigenvalue() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn bell_diagonal_examples() {
        assert!(bell_diagonal([1.0, 0.0, 0.0, 0.0]).unwrap().matrix().max_abs_diff(bell_state().matrix()) < 1e-15);
        let tau = bell_diagonal([0.25; 4]).unwrap();
        assert!(tau.matrix().max_abs_diff(maximally_mixed(d22()).matrix()) < 1e-15);
        assert!(matches!(bell_diagonal([0.5, 0.6, 0.0, -0.1]), Err(Error::NotProbabilityVector(_))));
        assert!(matches!(bell_diagonal([0.5, 0.6, 0.0, 0.0]), Err(Error::NotProbabilityVector(_))));
    }

    #[test]
    fn random_pure_is_normalized_and_deterministic() {
        let v = random_pure(5, 42);
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(v, random_pure(5, 42));
        assert_ne!(v, random_pure(5, 43));
    }

    #[test]
    fn haar_first_moment() {
        // E|ψ><ψ| = I/d for Haar vectors.
        let d = 3;
        let samples = 10_000;
        let mut acc = CMatrix::zeros(d);
        let mut rng = rng_from_seed(7);
        for _ in 0..samples {
            let v = haar_vector(d, &mut rng);
            acc = &acc + &CMatrix::outer(&v);
        }
        let mean = acc.scale(Complex64::new(1.0 / samples as f64, 0.0));
        let target = CMatrix::identity(d).scale(Complex64::new(1.0 / d as f64, 0.0));
        assert!(mean.max_abs_diff(&target) < 0.02);
    }

    #[test]
    fn random_mixed_properties() {
        let d = BipartiteDims::new(2, 2).unwrap();
        let pure = random_mixed(d, 1, 3).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        for seed in 0..20 {
            let s = random_mixed(d, 3, seed).unwrap();
            assert!(validate_density(s.matrix().clone(), d).is_ok());
        }
        // With rank N² the spectrum concentrates near uniform: the mean
        // purity of induced states is (N + K)/(N K + 1) = 20/65 for N=4, K=16.
        let mean_purity: f64 = (0..400).map(|s| random_mixed(d, 16, 100 + s).unwrap().purity()).sum::<f64>() / 400.0;
        assert!((mean_purity - 20.0 / 65.0).abs() < 0.01, "{mean_purity}");
        assert!(matches!(random_mixed(d, 0, 1), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn product_states_are_ppt_with_pure_marginals() {
        let d = BipartiteDims::new(2, 3).unwrap();
        for seed in 0..10 {
            let p = random_product_pure(d, seed);
            let pt = linalg::partial_transpose(p.matrix(), d).unwrap();
            assert!(pt.min_eigenvalue() > -1e-12);
            assert!((p.reduced(Subsystem::B).purity() - 1.0).abs() < 1e-12);
            assert!((p.reduced(Subsystem::A).purity() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trace_distance_examples() {
        let b = bell_state();
        assert_eq!(trace_distance(&b, &b).unwrap(), 0.0);
        let p0 = product_pure(&basis_vector(2, 0), &basis_vector(2, 0)).unwrap();
        let p1 = product_pure(&basis_vector(2, 1), &basis_vector(2, 1)).unwrap();
        assert!((trace_distance(&p0, &p1).unwrap() - 2.0).abs() < 1e-15);
        let noisy = b.mix(&maximally_mixed(d22()), 0.1).unwrap();
        assert!((trace_distance(&b, &noisy).unwrap() - 0.15).abs() < 1e-14);
        let other = maximally_mixed(BipartiteDims::new(2, 3).unwrap());
        assert!(trace_distance(&b, &other).is_err());
    }

    #[test]
    fn tensor_power_regroups_cut() {
        // Bell ⊗ Bell under the A1A2 : B1B2 cut is maximally entangled on 4⊗4,
        // so its reduced state is I/4.
        let bb = bell_state().tensor_power(2);
        assert_eq!(bb.dims(), BipartiteDims::new(4, 4).unwrap());
        let red = bb.reduced(Subsystem::B);
        assert!(red.matrix().max_abs_diff(&HermitianMatrix::identity(4).scaled(0.25)) < 1e-14);
        assert!((bb.purity() - 1.0).abs() < 1e-13);
    }
}
