//! Numerical checks of the continuity bound for `E`, the inequalities its
//! proof is built from, convergence of closest states, and the per-copy
//! value on small tensor powers.

use serde::{Deserialize, Serialize};

use crate::entropy::{fannes_bound, theorem_bound, von_neumann_entropy, FANNES_MAX_DISTANCE};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::sets::{derive_seed, shift, ConvexSetSpec, SetKind};
use crate::solver::{solve, solve_shifted, CertifiedValue, SolverOptions, ValueConfidence};
use crate::state::{maximally_mixed, random_product_pure, trace_distance, BipartiteDims, DensityMatrix};

mod batch;
mod corollary;
mod density;

pub use batch::{batch_report, continuity_csv, sample_pair, BatchReport, SamplerConfig};
pub use corollary::{corollary_trace, CorollaryEntry, CorollaryTrace, DIST_TOL, MONOTONE_SLACK};
pub use density::{density_check, DensityRecord, MAX_POWER_DIM};

/// Slack below which a checked inequality counts as violated.
pub const CHECK_TOL: f64 = 1e-9;

/// Number of states `ρ ∈ D` (τ plus random products) probed by check (d).
pub const TRACE_CHECK_SAMPLES: usize = 8;

/// `lhs ≤ rhs`, with `slack = rhs - lhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(name: &str, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self { name: name.to_string(), lhs, rhs, slack, holds: slack >= -CHECK_TOL }
    }

    /// The binding one of several checks sharing a name.
    fn tightest(name: &str, pairs: &[(f64, f64)]) -> Self {
        let (lhs, rhs) = pairs
            .iter()
            .copied()
            .min_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
            .expect("at least one comparison");
        Self::new(name, lhs, rhs)
    }
}

/// One pair `(σ1, σ2)` against the continuity bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ContinuityReport {
    pub seed: u64,
    pub dims: BipartiteDims,
    pub set: SetKind,
    #[serde(rename = "T")]
    pub t: f64,
    /// `T > 1/3`: outside the theorem, nothing computed.
    pub skipped: bool,
    pub bound: Option<f64>,
    #[serde(rename = "E1")]
    pub e1: Option<CertifiedValue>,
    #[serde(rename = "E2")]
    pub e2: Option<CertifiedValue>,
    /// `max(|E1.upper - E2.lower|, |E2.upper - E1.lower|)`
    pub delta_upper: Option<f64>,
    pub holds: bool,
    pub margin: Option<f64>,
    pub proof_chain: Vec<InequalityCheck>,
    pub confidence: Option<ValueConfidence>,
}

impl ContinuityReport {
    pub fn proof_chain_holds(&self) -> bool {
        self.proof_chain.iter().all(|c| c.holds)
    }

    /// `deltaUpper / bound` when both are defined and the bound is positive.
    pub fn ratio(&self) -> Option<f64> {
        match (self.delta_upper, self.bound) {
            (Some(d), Some(b)) if b > 0.0 => Some(d / b),
            _ => None,
        }
    }

    /// Rescales every entropic quantity (not `T`) by `factor`.
    pub fn rescaled(mut self, factor: f64) -> Self {
        for v in [&mut self.bound, &mut self.delta_upper, &mut self.margin].into_iter().flatten() {
            *v *= factor;
        }
        for e in [&mut self.e1, &mut self.e2].into_iter().flatten() {
            e.lower *= factor;
            e.upper *= factor;
            e.fw_gap *= factor;
        }
        // (b) compares ln x with 2(1-x); everything else is in nats.
        for c in self.proof_chain.iter_mut().filter(|c| c.name != "b") {
            c.lhs *= factor;
            c.rhs *= factor;
            c.slack *= factor;
        }
        self
    }
}

fn pair_distance(s1: &DensityMatrix, s2: &DensityMatrix, spec: &ConvexSetSpec) -> Result<f64> {
    if s1.dims() != spec.dims {
        return Err(Error::DimensionMismatch { expected: spec.dims.total(), found: s1.dim() });
    }
    trace_distance(s1, s2)
}

fn combined_confidence(a: &CertifiedValue, b: &CertifiedValue) -> ValueConfidence {
    if a.confidence == ValueConfidence::Certified && b.confidence == ValueConfidence::Certified {
        ValueConfidence::Certified
    } else {
        ValueConfidence::HeuristicLower
    }
}

/// Largest `|v1 - v2|` consistent with two intervals.
fn interval_spread(a: &CertifiedValue, b: &CertifiedValue) -> f64 {
    (a.upper - b.lower).abs().max((b.upper - a.lower).abs())
}

/// Solves `E` for both states and compares `|E1 - E2|` with the bound.
/// Pairs with `T > 1/3` come back `skipped`; for `0 < T ≤ 1/3` the proof
/// chain is filled in as well.
pub fn theorem_check(
    s1: &DensityMatrix,
    s2: &DensityMatrix,
    spec: &ConvexSetSpec,
    opts: &SolverOptions,
) -> Result<ContinuityReport> {
    let t = pair_distance(s1, s2, spec)?;
    let mut report = ContinuityReport {
        seed: opts.oracle.sep.seed,
        dims: spec.dims,
        set: spec.kind,
        t,
        skipped: true,
        bound: None,
        e1: None,
        e2: None,
        delta_upper: None,
        holds: false,
        margin: None,
        proof_chain: Vec::new(),
        confidence: None,
    };
    if t > FANNES_MAX_DISTANCE {
        return Ok(report);
    }
    let n = spec.dims.total();
    let bound = theorem_bound(t, n)?;
    let e1 = solve(s1, spec.kind, opts)?;
    let e2 = solve(s2, spec.kind, opts)?;
    let delta = interval_spread(&e1, &e2);
    if t > 0.0 {
        report.proof_chain = chain_with(s1, s2, t, &e1, &e2, spec, opts)?;
    }
    report.skipped = false;
    report.bound = Some(bound);
    report.delta_upper = Some(delta);
    report.holds = delta <= bound + CHECK_TOL;
    report.margin = Some(bound - delta);
    report.confidence = Some(combined_confidence(&e1, &e2));
    report.e1 = Some(e1);
    report.e2 = Some(e2);
    Ok(report)
}

/// The five inequalities behind the bound, at `x = 1 - T`:
///
/// * `a`: `E ≤ E_x ≤ E - ln x` for both states, from certified intervals;
/// * `b`: `|ln x| ≤ 2(1 - x)`;
/// * `c`: Fannes, `|S1(σ1) - S1(σ2)| ≤ T ln N + η(T)`;
/// * `d`: `|tr(σ1 L) - tr(σ2 L)| ≤ T(ln N - ln(1 - x))` with
///   `L = ln(xρ + (1-x)τ)`, worst case over sampled `ρ ∈ D`;
/// * `e`: `|E_x(σ1) - E_x(σ2)| ≤ 2(T ln N + η(T))`.
pub fn proof_chain_check(
    s1: &DensityMatrix,
    s2: &DensityMatrix,
    spec: &ConvexSetSpec,
    opts: &SolverOptions,
) -> Result<Vec<InequalityCheck>> {
    let t = pair_distance(s1, s2, spec)?;
    if !(t > 0.0 && t <= FANNES_MAX_DISTANCE) {
        return Err(Error::OutOfDomain { name: "T", value: t, domain: "(0, 1/3]" });
    }
    let e1 = solve(s1, spec.kind, opts)?;
    let e2 = solve(s2, spec.kind, opts)?;
    chain_with(s1, s2, t, &e1, &e2, spec, opts)
}

fn chain_with(
    s1: &DensityMatrix,
    s2: &DensityMatrix,
    t: f64,
    e1: &CertifiedValue,
    e2: &CertifiedValue,
    spec: &ConvexSetSpec,
    opts: &SolverOptions,
) -> Result<Vec<InequalityCheck>> {
    let n = spec.dims.total();
    let x = 1.0 - t;
    let shifted = ConvexSetSpec::new(spec.kind, spec.dims, x)?;
    let ex1 = solve_shifted(s1, &shifted, opts)?;
    let ex2 = solve_shifted(s2, &shifted, opts)?;

    let mut sandwich = Vec::with_capacity(4);
    for (e, ex) in [(e1, &ex1), (e2, &ex2)] {
        sandwich.push((e.lower, ex.upper));
        sandwich.push((ex.lower, e.upper - x.ln()));
    }
    let a = InequalityCheck::tightest("a", &sandwich);
    let b = InequalityCheck::new("b", x.ln().abs(), 2.0 * (1.0 - x));
    let fannes = fannes_check(s1, s2)?.expect("T ≤ 1/3 checked by caller");
    let c = InequalityCheck { name: "c".into(), ..fannes };
    let d = trace_log_check(s1, s2, t, x, opts.oracle.sep.seed)?;
    let e = InequalityCheck::new("e", interval_spread(&ex1, &ex2), 2.0 * fannes_bound(t, n)?);
    Ok(vec![a, b, c, d, e])
}

fn trace_log_check(s1: &DensityMatrix, s2: &DensityMatrix, t: f64, x: f64, seed: u64) -> Result<InequalityCheck> {
    let dims = s1.dims();
    let n = dims.total() as f64;
    let diff = s1.matrix() - s2.matrix();
    let rhs = t * (n.ln() - (1.0 - x).ln());
    let mut pairs = Vec::with_capacity(TRACE_CHECK_SAMPLES);
    for j in 0..TRACE_CHECK_SAMPLES {
        let rho = if j == 0 { maximally_mixed(dims) } else { random_product_pure(dims, derive_seed(seed, 1000 + j as u64)) };
        let log = shift(&rho, x)?.matrix().log()?;
        pairs.push((diff.trace_product(&log).abs(), rhs));
    }
    Ok(InequalityCheck::tightest("d", &pairs))
}

/// Fannes' inequality `|S1(σ1) - S1(σ2)| ≤ T ln N + η(T)`; `None` when
/// `T > 1/3`, where it is not claimed.
pub fn fannes_check(s1: &DensityMatrix, s2: &DensityMatrix) -> Result<Option<InequalityCheck>> {
    let t = trace_distance(s1, s2)?;
    if t > FANNES_MAX_DISTANCE {
        return Ok(None);
    }
    let lhs = (von_neumann_entropy(s1).nats() - von_neumann_entropy(s2).nats()).abs();
    Ok(Some(InequalityCheck::new("fannes", lhs, fannes_bound(t, s1.dim())?)))
}

/// `|tr(σ1 A) - tr(σ2 A)| ≤ tr|σ1 - σ2| · ||A||_op`.
pub fn trace_functional_check(s1: &DensityMatrix, s2: &DensityMatrix, a: &HermitianMatrix) -> Result<InequalityCheck> {
    let t = trace_distance(s1, s2)?;
    if a.dim() != s1.dim() {
        return Err(Error::DimensionMismatch { expected: s1.dim(), found: a.dim() });
    }
    let lhs = (s1.matrix() - s2.matrix()).trace_product(a).abs();
    Ok(InequalityCheck::new("trace functional", lhs, t * a.operator_norm()))
}

/// A pair at trace distance exactly `1/3` (as a float): `σ2` moves weight
/// `1/6` from `|0⟩` to `|1⟩` in the computational basis of `σ1`.
pub fn fannes_boundary_pair(dims: BipartiteDims) -> Result<(DensityMatrix, DensityMatrix)> {
    let n = dims.total();
    if n < 3 {
        return Err(Error::InvalidDims(dims.da(), dims.db()));
    }
    let delta = FANNES_MAX_DISTANCE / 2.0;
    let rest = (1.0 - delta) / (n - 2) as f64;
    let mut d1 = vec![rest; n];
    d1[0] = delta;
    d1[1] = 0.0;
    let mut d2 = d1.clone();
    d2.swap(0, 1);
    let s1 = DensityMatrix::from_matrix(HermitianMatrix::from_real_diagonal(&d1).into_matrix(), dims)?;
    let s2 = DensityMatrix::from_matrix(HermitianMatrix::from_real_diagonal(&d2).into_matrix(), dims)?;
    Ok((s1, s2))
}
