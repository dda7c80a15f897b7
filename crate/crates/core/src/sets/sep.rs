//! Linear minimization over separable states.
//!
//! The minimum of `tr(G ω)` over SEP is attained at a pure product state, so
//! the oracle searches product vectors `a ⊗ b` by alternating eigenproblems:
//! with `b` fixed, `⟨a⊗b|G|a⊗b⟩ = ⟨a|G_b|a⟩` is minimized by the lowest
//! eigenvector of `G_b = (I ⊗ ⟨b|) G (I ⊗ |b⟩)`, and symmetrically for `b`.
//! The problem is nonconvex; random restarts guard against poor local minima.

use num_complex::Complex64;

use super::{derive_seed, Confidence, LinMinResult};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::linalg::{kron_vec, CMatrix, HermitianMatrix, ZERO};
use crate::state::{haar_vector, rng_from_seed, BipartiteDims, DensityMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SepOracleOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    pub execution: Execution,
}

impl Default for SepOracleOptions {
    fn default() -> Self {
        Self { restarts: 32, max_iters: 1000, seed: 0, execution: Execution::Sequential }
    }
}

/// One converged local search.
#[derive(Debug, Clone)]
pub(crate) struct ProductCandidate {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub value: f64,
}

/// `(I ⊗ ⟨b|) G (I ⊗ |b⟩)` on `H_A`.
fn condition_on_b(g: &HermitianMatrix, dims: BipartiteDims, b: &[Complex64]) -> HermitianMatrix {
    let (da, db) = (dims.da(), dims.db());
    let m = CMatrix::from_fn(da, |a1, a2| {
        let mut acc = ZERO;
        for b1 in 0..db {
            let cb1 = b[b1].conj();
            for b2 in 0..db {
                acc += cb1 * g[(a1 * db + b1, a2 * db + b2)] * b[b2];
            }
        }
        acc
    });
    HermitianMatrix::symmetrized(m)
}

/// `(⟨a| ⊗ I) G (|a⟩ ⊗ I)` on `H_B`.
fn condition_on_a(g: &HermitianMatrix, dims: BipartiteDims, a: &[Complex64]) -> HermitianMatrix {
    let (da, db) = (dims.da(), dims.db());
    let m = CMatrix::from_fn(db, |b1, b2| {
        let mut acc = ZERO;
        for a1 in 0..da {
            let ca1 = a[a1].conj();
            for a2 in 0..da {
                acc += ca1 * g[(a1 * db + b1, a2 * db + b2)] * a[a2];
            }
        }
        acc
    });
    HermitianMatrix::symmetrized(m)
}

fn lowest(h: &HermitianMatrix) -> (f64, Vec<Complex64>) {
    let e = h.eig();
    (e.eigenvalues[0], e.vector(0))
}

/// Alternating eigeniteration from a starting `b`. Stops at a fixed point
/// or after `max_iters` sweeps with the last iterate,
/// which is still a valid product vector.
pub(crate) fn alternate_from(
    g: &HermitianMatrix,
    dims: BipartiteDims,
    mut b: Vec<Complex64>,
    max_iters: usize,
) -> Option<ProductCandidate> {
    let scale = 1.0 + g.matrix().frobenius_norm();
    let mut prev = f64::INFINITY;
    let mut last = None;
    for _ in 0..max_iters.max(1) {
        let (_, a) = lowest(&condition_on_b(g, dims, &b));
        let (value, b_new) = lowest(&condition_on_a(g, dims, &a));
        b = b_new;
        if !value.is_finite() {
            return None;
        }
        let done = prev - value <= 1e-13 * scale;
        last = Some(ProductCandidate { a, b: b.clone(), value });
        if done {
            break;
        }
        prev = value;
    }
    last
}

/// Best product candidate over seeded restarts, plus an optional warm start
/// tried first. Ties go to the lowest restart index. Restarts that ran out of
/// sweeps still compete; the search fails only if none produced a candidate.
pub(crate) fn search(
    g: &HermitianMatrix,
    dims: BipartiteDims,
    opts: &SepOracleOptions,
    warm_b: Option<&[Complex64]>,
) -> Result<(ProductCandidate, usize)> {
    let starts = opts.restarts.max(1);
    let offset = usize::from(warm_b.is_some());
    let run = |idx: usize| {
        let b = match (idx, warm_b) {
            (0, Some(w)) => w.to_vec(),
            _ => haar_vector(dims.db(), &mut rng_from_seed(derive_seed(opts.seed, (idx - offset) as u64))),
        };
        alternate_from(g, dims, b, opts.max_iters)
    };
    let results = opts.execution.map(starts + offset, run);
    let mut best: Option<ProductCandidate> = None;
    for cand in results.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| cand.value < b.value) {
            best = Some(cand);
        }
    }
    let best = best.ok_or(Error::ConvergenceFailure { what: "separable linear minimization", iterations: opts.max_iters })?;
    Ok((best, starts + offset))
}

/// `min tr(G ω)` over separable `ω`, attained on a pure product state.
pub fn sep_linmin(g: &HermitianMatrix, dims: BipartiteDims, opts: &SepOracleOptions) -> Result<LinMinResult> {
    if g.dim() != dims.total() {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: g.dim() });
    }
    let (best, used) = search(g, dims, opts, None)?;
    Ok(candidate_to_result(best, dims, used))
}

pub(crate) fn candidate_to_result(c: ProductCandidate, dims: BipartiteDims, restarts_used: usize) -> LinMinResult {
    let atom = DensityMatrix::from_trusted(HermitianMatrix::projector(&kron_vec(&c.a, &c.b)), dims);
    LinMinResult { atom, value: c.value, restarts_used, global_confidence: Confidence::Heuristic, value_slack: 0.0 }
}
