//! Per-copy value `(1/n)·E(σ^⊗n)` across the cut `A^n : B^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::ConvexSetSpec;
use crate::solver::{solve, CertifiedValue, SolverOptions};
use crate::state::DensityMatrix;

/// Largest total dimension `N^n` the check will attempt.
pub const MAX_POWER_DIM: usize = 64;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DensityRecord {
    pub n: u32,
    /// Interval for `E(σ^⊗n)` divided by `n`; the minimizer is the full
    /// `n`-copy state.
    pub per_pair_e: CertifiedValue,
    /// Single-copy upper bound, for comparison.
    pub reference: f64,
}

/// `(1/n)·E(σ^⊗n)` for `n = 1..=n_max`. Copy `n` starts from the `n`-th
/// tensor power of the single-copy minimizer.
pub fn density_check(sigma: &DensityMatrix, n_max: u32, spec: &ConvexSetSpec, opts: &SolverOptions) -> Result<Vec<DensityRecord>> {
    if n_max == 0 {
        return Err(Error::OutOfDomain { name: "n_max", value: 0.0, domain: "[1, 3]" });
    }
    if sigma.dims() != spec.dims {
        return Err(Error::DimensionMismatch { expected: spec.dims.total(), found: sigma.dim() });
    }
    let largest = sigma.dim().checked_pow(n_max).unwrap_or(usize::MAX);
    if n_max > 3 || largest > MAX_POWER_DIM {
        return Err(Error::DimensionMismatch { expected: MAX_POWER_DIM, found: largest });
    }
    let single = solve(sigma, spec.kind, opts)?.require_converged()?;
    let reference = single.upper;
    let mut records = vec![DensityRecord { n: 1, per_pair_e: single.clone(), reference }];
    for n in 2..=n_max {
        let power = sigma.tensor_power(n);
        let start = single.minimizer.tensor_power(n);
        let power_opts = SolverOptions { start: Some(start), ..opts.clone() };
        let mut cv = solve(&power, spec.kind, &power_opts)?.require_converged()?;
        let k = n as f64;
        cv.lower /= k;
        cv.upper /= k;
        cv.fw_gap /= k;
        records.push(DensityRecord { n, per_pair_e: cv, reference });
    }
    Ok(records)
}
