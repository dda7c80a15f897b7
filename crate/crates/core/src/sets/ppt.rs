//! The PPT set: Frobenius projection by Dykstra's algorithm and linear
//! minimization of `tr(G ω)` over `{ω ⪰ 0, ω^Γ ⪰ 0, tr ω = 1}`.


use super::{Confidence, LinMinResult};
use crate::error::{Error, Result};
use crate::linalg::{partial_transpose, HermitianMatrix};
use crate::state::{maximally_mixed, BipartiteDims, DensityMatrix};

mod barrier;
pub(crate) mod basis;

pub use barrier::BarrierOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PptMethod {
    /// Log-barrier interior point with an explicit dual certificate.
    Barrier,
    /// Projected gradient with a Dykstra projection per step.
    ProjectedGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PptOracleOptions {
    pub method: PptMethod,
    /// Projected-gradient step budget.
    pub step_count: usize,
    /// Fixed-point tolerance of the projected-gradient iteration.
    pub tol: f64,
    pub dykstra_tol: f64,
    pub dykstra_max_iters: usize,
    pub barrier: BarrierOptions,
}

impl Default for PptOracleOptions {
    fn default() -> Self {
        Self {
            method: PptMethod::Barrier,
            step_count: 2000,
            tol: 1e-9,
            dykstra_tol: 1e-10,
            dykstra_max_iters: 100_000,
            barrier: BarrierOptions::default(),
        }
    }
}

/// Eigenvalue clip onto the PSD cone.
fn project_psd(m: &HermitianMatrix) -> HermitianMatrix {
    m.eig().map_spectrum(|l| l.max(0.0))
}

fn project_pt_psd(m: &HermitianMatrix, dims: BipartiteDims) -> HermitianMatrix {
    let pt = partial_transpose(m, dims).expect("dims checked by caller");
    partial_transpose(&project_psd(&pt), dims).expect("dims checked by caller")
}

fn project_unit_trace(m: &HermitianMatrix) -> HermitianMatrix {
    let n = m.dim();
    let shift = (1.0 - m.trace()) / n as f64;
    m.lincomb(1.0, &HermitianMatrix::identity(n), shift)
}

/// Mixes `m` toward `τ` just enough that both `m` and `m^Γ` are PSD.
fn pull_inside(m: &HermitianMatrix, dims: BipartiteDims) -> HermitianMatrix {
    let n = m.dim() as f64;
    let lmin = m.min_eigenvalue().min(partial_transpose(m, dims).expect("dims").min_eigenvalue());
    if lmin >= 0.0 {
        return m.clone();
    }
    // (1-δ)λ + δ/N = 0
    let delta = -lmin / (1.0 / n - lmin);
    let tau = HermitianMatrix::identity(m.dim()).scaled(1.0 / n);
    m.lincomb(1.0 - delta, &tau, delta)
}

/// Frobenius-nearest PPT state to `m`, by Dykstra's algorithm over the cycle
/// PSD → PT-PSD → unit trace. The result is nudged toward `τ` by at most the
/// residual infeasibility so that it is an exact PPT state.
pub fn dykstra_project_ppt(m: &HermitianMatrix, dims: BipartiteDims, tol: f64, max_iters: usize) -> Result<DensityMatrix> {
    if m.dim() != dims.total() {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: m.dim() });
    }
    let n = m.dim();
    let mut x = m.clone();
    let mut p1 = HermitianMatrix::zeros(n);
    let mut p2 = HermitianMatrix::zeros(n);
    let mut p3 = HermitianMatrix::zeros(n);
    for _ in 0..max_iters {
        let start = x.clone();

        let y = &x + &p1;
        x = project_psd(&y);
        p1 = &y - &x;

        let y = &x + &p2;
        x = project_pt_psd(&y, dims);
        p2 = &y - &x;

        let y = &x + &p3;
        x = project_unit_trace(&y);
        p3 = &y - &x;

        if (&x - &start).matrix().frobenius_norm() <= tol {
            let inside = pull_inside(&x, dims);
            return Ok(DensityMatrix::from_trusted(project_unit_trace(&inside), dims));
        }
    }
    Err(Error::ConvergenceFailure { what: "Dykstra PPT projection", iterations: max_iters })
}

/// `min tr(G ω)` over PPT states. Convex, so the result is `Certified`.
pub fn ppt_linmin(g: &HermitianMatrix, dims: BipartiteDims, opts: &PptOracleOptions) -> Result<LinMinResult> {
    if g.dim() != dims.total() {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: g.dim() });
    }
    match opts.method {
        PptMethod::Barrier => barrier::linmin(g, dims, &opts.barrier),
        PptMethod::ProjectedGradient => projected_gradient(g, dims, opts),
    }
}

/// Projected gradient on the linear objective. Each step is
/// `ω ← Π(ω - η_k G)` with `η_k = η_0 / √(k+1)`, and the loop stops once the
/// objective moves by less than `tol` over a step.
fn projected_gradient(g: &HermitianMatrix, dims: BipartiteDims, opts: &PptOracleOptions) -> Result<LinMinResult> {
    let scale = g.operator_norm();
    let mut omega = maximally_mixed(dims);
    let mut value = g.trace_product(omega.matrix());
    if scale == 0.0 {
        return Ok(LinMinResult { atom: omega, value, restarts_used: 1, global_confidence: Confidence::Certified, value_slack: 0.0 });
    }
    let eta0 = 1.0 / scale;
    for k in 0..opts.step_count {
        let eta = eta0 / ((k + 1) as f64).sqrt();
        let trial = omega.matrix().lincomb(1.0, g, -eta);
        let next = dykstra_project_ppt(&trial, dims, opts.dykstra_tol, opts.dykstra_max_iters)?;
        let next_value = g.trace_product(next.matrix());
        let moved = (value - next_value).abs();
        omega = next;
        value = next_value;
        if moved <= opts.tol {
            return Ok(LinMinResult {
                atom: omega,
                value,
                restarts_used: 1,
                global_confidence: Confidence::Certified,
                value_slack: 0.0,
            });
        }
    }
    Err(Error::ConvergenceFailure { what: "PPT projected gradient", iterations: opts.step_count })
}

/// Dual lower bound for `min tr(Gω)` over PPT states from any `Z ⪰ 0`:
/// `λ_min(G - Z^Γ)`.
pub(crate) fn dual_bound(g: &HermitianMatrix, z: &HermitianMatrix, dims: BipartiteDims) -> f64 {
    let zpt = partial_transpose(z, dims).expect("dims");
    (g - &zpt).min_eigenvalue()
}

