//! Orthonormal coordinates on the trace-one slice of Hermitian matrices.

use num_complex::Complex64;

use crate::linalg::{CMatrix, HermitianMatrix};
use crate::state::BipartiteDims;

pub(crate) type Sparse = Vec<(usize, usize, Complex64)>;

/// Orthonormal traceless Hermitian basis (generalized Gell-Mann), with each
/// element's partial transpose, both as sparse entry lists.
pub(crate) struct Basis {
    pub elems: Vec<Sparse>,
    pub pt_elems: Vec<Sparse>,
}

impl Basis {
    pub fn new(dims: BipartiteDims) -> Self {
        let n = dims.total();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut elems = Vec::with_capacity(n * n - 1);
        for i in 0..n {
            for j in (i + 1)..n {
                elems.push(vec![(i, j, Complex64::new(s, 0.0)), (j, i, Complex64::new(s, 0.0))]);
                elems.push(vec![(i, j, Complex64::new(0.0, -s)), (j, i, Complex64::new(0.0, s))]);
            }
        }
        for l in 1..n {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut e: Sparse = (0..l).map(|k| (k, k, Complex64::new(norm, 0.0))).collect();
            e.push((l, l, Complex64::new(-(l as f64) * norm, 0.0)));
            elems.push(e);
        }
        let db = dims.db();
        let pt = |(r, c, v): (usize, usize, Complex64)| {
            let (ra, rb) = (r / db, r % db);
            let (ca, cb) = (c / db, c % db);
            (ra * db + cb, ca * db + rb, v)
        };
        let pt_elems = elems.iter().map(|e| e.iter().copied().map(pt).collect()).collect();
        Self { elems, pt_elems }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    /// Element `k` as a dense matrix.
    pub fn dense(&self, n: usize, k: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n);
        for &(a, b, v) in &self.elems[k] {
            m[(a, b)] += v;
        }
        m
    }

    /// `Σ_k dy_k B_k`
    pub fn combine(&self, n: usize, dy: &[f64]) -> HermitianMatrix {
        let mut m = CMatrix::zeros(n);
        for (e, &w) in self.elems.iter().zip(dy) {
            for &(a, b, v) in e {
                m[(a, b)] += v * w;
            }
        }
        HermitianMatrix::symmetrized(m)
    }
}

/// `Re tr(M E)` for sparse `E = Σ v E_ab`: `Σ v M_ba`.
pub(crate) fn trace_with(m: &HermitianMatrix, e: &Sparse) -> f64 {
    e.iter().map(|&(a, b, v)| (v * m[(b, a)]).re).sum()
}

/// `Re tr(W E W F)` for sparse `E, F`: `Σ v_e v_f W_da W_bc` with `E ∋ (a,b)`, `F ∋ (c,d)`.
pub(crate) fn quad_form(w: &HermitianMatrix, e: &Sparse, f: &Sparse) -> f64 {
    let mut acc = 0.0;
    for &(a, b, ve) in e {
        for &(c, d, vf) in f {
            acc += (ve * vf * w[(d, a)] * w[(b, c)]).re;
        }
    }
    acc
}

/// Solves `H y = rhs` for symmetric positive definite row-major `H`, which is
/// overwritten by its Cholesky factor. `None` if `H` is not numerically PD.
pub(crate) fn cholesky_solve(h: &mut [f64], rhs: &[f64], k: usize) -> Option<Vec<f64>> {
    for j in 0..k {
        let mut d = h[j * k + j];
        for p in 0..j {
            d -= h[j * k + p] * h[j * k + p];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = d.sqrt();
        h[j * k + j] = d;
        for i in (j + 1)..k {
            let mut s = h[i * k + j];
            for p in 0..j {
                s -= h[i * k + p] * h[j * k + p];
            }
            h[i * k + j] = s / d;
        }
    }
    let mut y = rhs.to_vec();
    for i in 0..k {
        for p in 0..i {
            y[i] -= h[i * k + p] * y[p];
        }
        y[i] /= h[i * k + i];
    }
    for i in (0..k).rev() {
        for p in (i + 1)..k {
            y[i] -= h[p * k + i] * y[p];
        }
        y[i] /= h[i * k + i];
    }
    Some(y)
}
