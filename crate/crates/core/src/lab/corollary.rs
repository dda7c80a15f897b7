//! Closest states along a sequence converging into `D`.

use serde::{Deserialize, Serialize};

use crate::entropy::{theorem_bound, FANNES_MAX_DISTANCE};
use crate::error::{Error, Result};
use crate::linalg::trace_norm;
use crate::sets::{ppt_member, ConvexSetSpec, SetKind, MEMBERSHIP_TOL};
use crate::solver::{ree, SolverOptions};
use crate::state::DensityMatrix;

/// Distance below which the last closest state counts as converged,
/// whatever `||σ_n - σ||` is.
pub const DIST_TOL: f64 = 0.05;

/// Allowed increase of `||ρ̂(σ_n) - σ||` between schedule entries.
pub const MONOTONE_SLACK: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorollaryEntry {
    pub n: u64,
    /// `||σ_n - σ||`
    pub state_distance: f64,
    /// `||ρ̂(σ_n) - σ||`
    pub minimizer_distance: f64,
    pub e_upper: f64,
    pub e_lower: f64,
    /// Continuity bound at `||σ_n - σ||` when that is at most `1/3`.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CorollaryTrace {
    pub family: String,
    pub set: SetKind,
    pub entries: Vec<CorollaryEntry>,
    /// Last entry has `||ρ̂ - σ|| ≤ max(5·||σ_n - σ||, DIST_TOL)`.
    pub final_within_tolerance: bool,
    /// `||ρ̂(σ_n) - σ||` never grows by more than `MONOTONE_SLACK`.
    pub nonincreasing: bool,
}

impl CorollaryTrace {
    pub fn criterion_met(&self) -> bool {
        self.final_within_tolerance
    }
}

/// Membership of `σ` in `D`. PPT is exact for the PPT set and for SEP when
/// `dA·dB ≤ 6`; larger SEP cases additionally need a vanishing `E`.
fn is_member(sigma: &DensityMatrix, spec: &ConvexSetSpec, opts: &SolverOptions) -> Result<bool> {
    if !ppt_member(sigma, sigma.dims(), MEMBERSHIP_TOL)? {
        return Ok(false);
    }
    if spec.kind == SetKind::Ppt || sigma.dim() <= 6 {
        return Ok(true);
    }
    let cv = ree(sigma, spec, opts)?;
    Ok(cv.upper <= -opts.x.ln() + 2.0 * opts.gap_tol)
}

/// Follows `σ_n = (1 - 1/n)σ + (1/n)ζ` over `schedule` (sorted, duplicates
/// dropped) and records how far `ρ̂(σ_n)` is from `σ`.
pub fn corollary_trace(
    sigma: &DensityMatrix,
    direction: &DensityMatrix,
    schedule: &[u64],
    spec: &ConvexSetSpec,
    opts: &SolverOptions,
) -> Result<CorollaryTrace> {
    sigma.check_same_dims(direction)?;
    if sigma.dims() != spec.dims {
        return Err(Error::DimensionMismatch { expected: spec.dims.total(), found: sigma.dim() });
    }
    let mut ns = schedule.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.is_empty() || ns[0] == 0 {
        return Err(Error::OutOfDomain { name: "n", value: 0.0, domain: "[1, inf)" });
    }
    if !is_member(sigma, spec, opts)? {
        return Err(Error::NotInSet(spec.kind.name()));
    }
    let n_dim = sigma.dim();
    let mut entries = Vec::with_capacity(ns.len());
    for &n in &ns {
        let sn = sigma.mix(direction, 1.0 / n as f64)?;
        let state_distance = trace_norm(&(sn.matrix() - sigma.matrix()));
        let cv = ree(&sn, spec, opts)?;
        let minimizer_distance = trace_norm(&(cv.minimizer.matrix() - sigma.matrix()));
        let bound = if state_distance <= FANNES_MAX_DISTANCE { Some(theorem_bound(state_distance, n_dim)?) } else { None };
        entries.push(CorollaryEntry { n, state_distance, minimizer_distance, e_upper: cv.upper, e_lower: cv.lower, bound });
    }
    let last = entries.last().expect("schedule is nonempty");
    let final_within_tolerance = last.minimizer_distance <= (5.0 * last.state_distance).max(DIST_TOL);
    let nonincreasing = entries.windows(2).all(|w| w[1].minimizer_distance <= w[0].minimizer_distance + MONOTONE_SLACK);
    Ok(CorollaryTrace {
        family: "(1 - 1/n) state + (1/n) direction".to_string(),
        set: spec.kind,
        entries,
        final_within_tolerance,
        nonincreasing,
    })
}
