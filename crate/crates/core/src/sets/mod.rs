//! Compact convex sets of states containing `τ`: the separable states and
//! the PPT states, with the oracles the solver needs.

mod ppt;
mod sep;

pub(crate) use ppt::basis;
pub use ppt::{dykstra_project_ppt, ppt_linmin, BarrierOptions, PptMethod, PptOracleOptions};
pub use sep::{sep_linmin, SepOracleOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{partial_transpose, HermitianMatrix};
use crate::state::{maximally_mixed, BipartiteDims, DensityMatrix};

/// Default PPT membership tolerance on the smallest partial-transpose eigenvalue.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Sep,
    Ppt,
}

impl SetKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Sep => "SEP",
            Self::Ppt => "PPT",
        }
    }
}

impl std::str::FromStr for SetKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sep" => Ok(Self::Sep),
            "ppt" => Ok(Self::Ppt),
            other => Err(Error::Parse(format!("unknown set `{other}` (expected sep or ppt)"))),
        }
    }
}

/// Selects the set `D` and the mixing weight `x` of the shifted family
/// `x·D + (1 - x)·τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexSetSpec {
    pub kind: SetKind,
    pub dims: BipartiteDims,
    x: f64,
}

impl ConvexSetSpec {
    pub fn new(kind: SetKind, dims: BipartiteDims, x: f64) -> Result<Self> {
        check_weight(x)?;
        Ok(Self { kind, dims, x })
    }

    /// The unshifted set (`x = 1`).
    pub fn plain(kind: SetKind, dims: BipartiteDims) -> Self {
        Self { kind, dims, x: 1.0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn with_x(&self, x: f64) -> Result<Self> {
        Self::new(self.kind, self.dims, x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Heuristic,
    Certified,
}

/// Output of a linear-minimization oracle over `D`.
#[derive(Debug, Clone)]
pub struct LinMinResult {
    /// A member of `D` (pure product state for SEP).
    pub atom: DensityMatrix,
    /// `tr(G · atom)`
    pub value: f64,
    pub restarts_used: usize,
    pub global_confidence: Confidence,
    /// Certified `value - min_D tr(G ω)` upper bound; zero when unknown
    /// (heuristic oracles) or exact.
    pub value_slack: f64,
}

fn check_weight(x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::OutOfDomain { name: "x", value: x, domain: "(0, 1]" });
    }
    Ok(())
}

/// `λ_min(ρ^Γ) ≥ -tol`
pub fn ppt_member(rho: &DensityMatrix, dims: BipartiteDims, tol: f64) -> Result<bool> {
    let pt = partial_transpose(rho.matrix(), dims)?;
    Ok(pt.min_eigenvalue() >= -tol)
}

/// `x·ρ + (1 - x)·τ`; its spectrum is bounded below by `(1 - x)/N`.
pub fn shift(rho: &DensityMatrix, x: f64) -> Result<DensityMatrix> {
    check_weight(x)?;
    if x == 1.0 {
        return Ok(rho.clone());
    }
    let tau = maximally_mixed(rho.dims());
    rho.mix(&tau, 1.0 - x)
}

/// Linear minimization dispatch over `kind`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleOptions {
    pub sep: SepOracleOptions,
    pub ppt: PptOracleOptions,
}

pub fn linmin(kind: SetKind, g: &HermitianMatrix, dims: BipartiteDims, opts: &OracleOptions) -> Result<LinMinResult> {
    match kind {
        SetKind::Sep => sep_linmin(g, dims, &opts.sep),
        SetKind::Ppt => ppt_linmin(g, dims, &opts.ppt),
    }
}

/// Stateful oracle for iterative solvers: the SEP search is warm-started
/// from the previous best product vector.
pub(crate) struct WarmOracle<'a> {
    kind: SetKind,
    dims: BipartiteDims,
    opts: &'a OracleOptions,
    last_b: Option<Vec<Complex64>>,
    calls: u64,
}

impl<'a> WarmOracle<'a> {
    pub fn new(kind: SetKind, dims: BipartiteDims, opts: &'a OracleOptions) -> Self {
        Self { kind, dims, opts, last_b: None, calls: 0 }
    }

    pub fn call(&mut self, g: &HermitianMatrix) -> Result<LinMinResult> {
        self.calls += 1;
        match self.kind {
            SetKind::Sep => {
                let mut o = self.opts.sep.clone();
                o.seed = derive_seed(o.seed, self.calls);
                let (best, used) = sep::search(g, self.dims, &o, self.last_b.as_deref())?;
                self.last_b = Some(best.b.clone());
                Ok(sep::candidate_to_result(best, self.dims, used))
            }
            SetKind::Ppt => ppt_linmin(g, self.dims, &self.opts.ppt),
        }
    }
}

/// SplitMix64 mixing of a base seed with a stream index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests;
