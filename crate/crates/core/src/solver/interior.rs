//! Central-path warm start for sets with an exact semidefinite description.
//!
//! Minimizes `t·S(σ | xρ + (1-x)τ) - ln det ρ - ln det ρ^Γ` over trace-one
//! `ρ` for increasing `t`, with damped Newton steps in the traceless
//! Gell-Mann coordinates. The Hessian of the relative entropy comes from the
//! second divided differences of `ln`. The returned point is strictly inside
//! the PPT set; Frank–Wolfe then certifies it.

use num_complex::Complex64;

use super::{gradient_from_eig, log_divided_difference};
use crate::entropy::{cross_entropy, neg_entropy_of_spectrum};
use crate::linalg::{partial_transpose, CMatrix, EigenDecomposition, HermitianMatrix, ZERO};
use crate::sets::basis::{cholesky_solve, quad_form, trace_with, Basis};
use crate::state::{BipartiteDims, DensityMatrix};

const MAX_NEWTON: usize = 50;
const GROWTH: f64 = 10.0;

/// Second divided difference of `ln`, symmetric in its arguments.
pub(super) fn log_second_divided_difference(a: f64, b: f64, c: f64) -> f64 {
    let close = |p: f64, q: f64| (p - q).abs() <= 1e-5 * p.max(q);
    if !close(a, b) {
        (log_divided_difference(a, c) - log_divided_difference(b, c)) / (a - b)
    } else if !close(a, c) {
        (log_divided_difference(a, b) - log_divided_difference(c, b)) / (a - c)
    } else if !close(b, c) {
        (log_divided_difference(b, a) - log_divided_difference(c, a)) / (b - c)
    } else {
        let m = (a + b + c) / 3.0;
        -0.5 / (m * m)
    }
}

/// Hessian of `ρ ↦ -tr σ ln ρ` in the coordinates `basis`, at `ρ` given by
/// its eigenpairs:
/// `D²f[H,K] = -Σ_ijk σ̃_ji φ₂(λ_i,λ_k,λ_j) (H̃_ik K̃_kj + K̃_ik H̃_kj)`.
pub(super) fn relent_hessian(sigma: &HermitianMatrix, eig: &EigenDecomposition, dense: &[CMatrix]) -> Vec<f64> {
    let n = eig.eigenvalues.len();
    let k = dense.len();
    let lam = &eig.eigenvalues;
    let mut phi2 = vec![0.0; n * n * n];
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                phi2[(i * n + l) * n + j] = log_second_divided_difference(lam[i], lam[l], lam[j]);
            }
        }
    }
    let st = eig.to_eigenbasis(sigma.matrix());
    let rotated: Vec<CMatrix> = dense.iter().map(|b| eig.to_eigenbasis(b)).collect();
    // T_n[i,l] = Σ_j φ₂(i,l,j) B̃n_lj σ̃_ji
    let contracted: Vec<Vec<Complex64>> = rotated
        .iter()
        .map(|b| {
            let mut t = vec![ZERO; n * n];
            for i in 0..n {
                for l in 0..n {
                    let mut acc = ZERO;
                    for j in 0..n {
                        acc += phi2[(i * n + l) * n + j] * b[(l, j)] * st[(j, i)];
                    }
                    t[i * n + l] = acc;
                }
            }
            t
        })
        .collect();
    let mut a = vec![0.0; k * k];
    for m in 0..k {
        for q in 0..k {
            let mut acc = ZERO;
            for i in 0..n {
                for l in 0..n {
                    acc += rotated[m][(i, l)] * contracted[q][i * n + l];
                }
            }
            a[m * k + q] = acc.re;
        }
    }
    let mut h = vec![0.0; k * k];
    for m in 0..k {
        for q in 0..k {
            h[m * k + q] = -(a[m * k + q] + a[q * k + m]);
        }
    }
    h
}

struct Point {
    omega: HermitianMatrix,
    eig: EigenDecomposition,
    pt_eig: EigenDecomposition,
    shifted_eig: EigenDecomposition,
    value: f64,
}

impl Point {
    fn new(omega: HermitianMatrix, ctx: &Context<'_>) -> Option<Self> {
        let eig = omega.eig();
        if eig.eigenvalues[0] <= 0.0 {
            return None;
        }
        let pt_eig = partial_transpose(&omega, ctx.dims).ok()?.eig();
        if pt_eig.eigenvalues[0] <= 0.0 {
            return None;
        }
        let shifted_eig = omega.lincomb(ctx.x, &ctx.tau, 1.0 - ctx.x).eig();
        let value = ctx.neg_entropy + cross_entropy(ctx.sigma, &shifted_eig)?;
        Some(Self { omega, eig, pt_eig, shifted_eig, value })
    }

    fn log_dets(&self) -> f64 {
        self.eig.eigenvalues.iter().chain(&self.pt_eig.eigenvalues).map(|l| l.ln()).sum()
    }
}

struct Context<'a> {
    sigma: &'a DensityMatrix,
    dims: BipartiteDims,
    x: f64,
    tau: HermitianMatrix,
    neg_entropy: f64,
}

/// Approximately central point with barrier gap `2N/t ≤ gap_target`. A
/// stalled Newton phase moves on to the next `t`; the result is feasible
/// either way, only possibly far from optimal.
pub(super) fn central_path(sigma: &DensityMatrix, x: f64, gap_target: f64) -> Option<HermitianMatrix> {
    let dims = sigma.dims();
    let n = dims.total();
    let basis = Basis::new(dims);
    let k = basis.len();
    if k == 0 {
        return None;
    }
    let dense: Vec<CMatrix> = (0..k).map(|i| basis.dense(n, i)).collect();
    let tau = HermitianMatrix::identity(n).scaled(1.0 / n as f64);
    let ctx = Context { sigma, dims, x, tau: tau.clone(), neg_entropy: neg_entropy_of_spectrum(&sigma.eigenvalues()) };
    let mut point = Point::new(tau, &ctx)?;
    let nu = 2.0 * n as f64;
    let mut t = 1.0;
    loop {
        for _ in 0..MAX_NEWTON {
            let g = gradient_from_eig(sigma, &point.shifted_eig);
            let w = point.eig.map_spectrum(|l| 1.0 / l);
            let w_pt = point.pt_eig.map_spectrum(|l| 1.0 / l);
            let grad: Vec<f64> = (0..k)
                .map(|i| {
                    t * x * trace_with(&g, &basis.elems[i])
                        - trace_with(&w, &basis.elems[i])
                        - trace_with(&w_pt, &basis.pt_elems[i])
                })
                .collect();
            let hf = relent_hessian(sigma.matrix(), &point.shifted_eig, &dense);
            let mut hess = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..=i {
                    let v = t * x * x * 0.5 * (hf[i * k + j] + hf[j * k + i])
                        + quad_form(&w, &basis.elems[i], &basis.elems[j])
                        + quad_form(&w_pt, &basis.pt_elems[i], &basis.pt_elems[j]);
                    hess[i * k + j] = v;
                    hess[j * k + i] = v;
                }
            }
            let neg_grad: Vec<f64> = grad.iter().map(|v| -v).collect();
            let Some(step) = cholesky_solve(&mut hess, &neg_grad, k) else {
                break;
            };
            let decrement: f64 = -grad.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            if decrement <= 1e-10 {
                break;
            }
            let direction = basis.combine(n, &step);
            let log_det = point.log_dets();
            let mut s = if decrement > 0.25 { 1.0 / (1.0 + decrement.sqrt()) } else { 1.0 };
            let mut next = None;
            while s > 1e-10 {
                if let Some(p) = Point::new(point.omega.lincomb(1.0, &direction, s), &ctx) {
                    let change = t * (p.value - point.value) - (p.log_dets() - log_det);
                    // Near the center the merit change drowns in rounding; a
                    // feasible full step is then accepted as is.
                    if change <= -0.01 * s * decrement || decrement < 1e-6 {
                        next = Some(p);
                        break;
                    }
                }
                s *= 0.5;
            }
            match next {
                Some(p) => point = p,
                None => break,
            }
        }
        if nu / t <= gap_target {
            return Some(point.omega);
        }
        t *= GROWTH;
    }
}
