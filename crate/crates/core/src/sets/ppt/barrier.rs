//! Log-barrier path following for `min tr(Gω)` over PPT states.
//!
//! Minimizes `t·tr(Gω) - ln det ω - ln det ω^Γ` over the affine slice
//! `tr ω = 1`, parametrized by an orthonormal basis of traceless Hermitian
//! matrices, with damped Newton steps and geometric growth of `t`. Iterates
//! stay strictly inside the set, and on exit `Z = (ω^Γ)^{-1}/t` yields the
//! dual bound `λ_min(G - Z^Γ)` on the optimal value.


use super::basis::{cholesky_solve, quad_form, trace_with, Basis};
use super::dual_bound;
use crate::error::{Error, Result};
use crate::linalg::{partial_transpose, EigenDecomposition, HermitianMatrix};
use crate::sets::{Confidence, LinMinResult};
use crate::state::{maximally_mixed, BipartiteDims, DensityMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierOptions {
    /// Stop when the certified gap falls below `gap_tol · max(1, |G|_op)`, or
    /// give up tightening once the barrier gap `2N/t` is 100 times smaller.
    pub gap_tol: f64,
    pub growth: f64,
    pub max_newton: usize,
}

impl Default for BarrierOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-9, growth: 10.0, max_newton: 60 }
    }
}

struct Point {
    omega: HermitianMatrix,
    eig: EigenDecomposition,
    pt_eig: EigenDecomposition,
}

impl Point {
    fn new(omega: HermitianMatrix, dims: BipartiteDims) -> Option<Self> {
        let eig = omega.eig();
        if eig.eigenvalues[0] <= 0.0 {
            return None;
        }
        let pt_eig = partial_transpose(&omega, dims).expect("dims").eig();
        if pt_eig.eigenvalues[0] <= 0.0 {
            return None;
        }
        Some(Self { omega, eig, pt_eig })
    }

    fn log_dets(&self) -> f64 {
        self.eig.eigenvalues.iter().chain(&self.pt_eig.eigenvalues).map(|l| l.ln()).sum()
    }
}

pub(super) fn linmin(g: &HermitianMatrix, dims: BipartiteDims, opts: &BarrierOptions) -> Result<LinMinResult> {
    let n = dims.total();
    let nu = 2.0 * n as f64;
    let scale = g.operator_norm().max(1e-300);
    let basis = Basis::new(dims);
    let k = basis.len();
    let g_coords: Vec<f64> = basis.elems.iter().map(|e| trace_with(g, e)).collect();

    let tau = maximally_mixed(dims);
    let mut point = Point::new(tau.matrix().clone(), dims).expect("τ is interior");
    if k == 0 {
        return Ok(LinMinResult {
            atom: tau,
            value: g.trace_product(point.omega()),
            restarts_used: 1,
            global_confidence: Confidence::Certified,
            value_slack: 0.0,
        });
    }

    let mut t = 1.0 / scale;
    let target = opts.gap_tol * scale.max(1.0);
    let mut newton_steps = 0usize;
    let mut lower = f64::NEG_INFINITY;
    loop {
        for _ in 0..opts.max_newton {
            let w = point.eig.map_spectrum(|l| 1.0 / l);
            let w_pt = point.pt_eig.map_spectrum(|l| 1.0 / l);
            let grad: Vec<f64> = (0..k)
                .map(|i| t * g_coords[i] - trace_with(&w, &basis.elems[i]) - trace_with(&w_pt, &basis.pt_elems[i]))
                .collect();
            let mut hess = vec![0.0; k * k];
            for i in 0..k {
                for j in 0..=i {
                    let v = quad_form(&w, &basis.elems[i], &basis.elems[j])
                        + quad_form(&w_pt, &basis.pt_elems[i], &basis.pt_elems[j]);
                    hess[i * k + j] = v;
                    hess[j * k + i] = v;
                }
            }
            let neg_grad: Vec<f64> = grad.iter().map(|x| -x).collect();
            let Some(step) = cholesky_solve(&mut hess, &neg_grad, k) else {
                break;
            };
            newton_steps += 1;
            let decrement: f64 = -grad.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
            if decrement <= 1e-12 {
                break;
            }
            let direction = basis.combine(n, &step);
            // Linear part of the barrier change, taken from coordinates: at
            // large t the absolute barrier value swamps the decrease.
            let g_step: f64 = g_coords.iter().zip(&step).map(|(a, b)| a * b).sum();
            let log_det = point.log_dets();
            let mut s = 1.0;
            let mut moved = false;
            while s > 1e-12 {
                let cand = point.omega.lincomb(1.0, &direction, s);
                if let Some(p) = Point::new(cand, dims) {
                    let change = t * s * g_step - (p.log_dets() - log_det);
                    if change <= -0.01 * s * decrement {
                        point = p;
                        moved = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !moved || decrement <= 1e-9 {
                break;
            }
        }
        // Any Z ⪰ 0 certifies, so keep the best bound seen: at very large t
        // the small eigenvalues of ω^Γ lose relative accuracy.
        let z = point.pt_eig.map_spectrum(|l| 1.0 / (t * l));
        lower = lower.max(dual_bound(g, &z, dims));
        if g.trace_product(&point.omega) - lower <= target || nu / t <= 1e-2 * target {
            break;
        }
        if t > 1e16 / scale {
            return Err(Error::ConvergenceFailure { what: "PPT barrier method", iterations: newton_steps });
        }
        t *= opts.growth;
    }

    let value = g.trace_product(&point.omega);
    let atom = DensityMatrix::from_trusted(point.omega, dims);
    Ok(LinMinResult {
        atom,
        value,
        restarts_used: 1,
        global_confidence: Confidence::Certified,
        value_slack: (value - lower).max(0.0),
    })
}

impl Point {
    fn omega(&self) -> &HermitianMatrix {
        &self.omega
    }
}
