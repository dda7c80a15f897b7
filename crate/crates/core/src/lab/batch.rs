//! Sampled pairs within the theorem's range, checked in bulk.

use std::fmt::Write as _;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{theorem_check, ContinuityReport};
use crate::entropy::FANNES_MAX_DISTANCE;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::sets::{derive_seed, ConvexSetSpec, SetKind};
use crate::solver::SolverOptions;
use crate::state::{random_mixed, rng_from_seed, trace_distance, BipartiteDims, DensityMatrix};

/// Consecutive rejected draws before sampling gives up.
const MAX_REJECTIONS: usize = 10_000;

/// Pair sampler: `σ1` and a direction `ζ` are induced-measure random states,
/// `σ2 = (1 - s)σ1 + sζ` with `s` log-uniform on `[min_step, s_max]` and
/// `s_max = min(1, (1/3)/tr|σ1 - ζ|)`, so `T = s·tr|σ1 - ζ| ≤ 1/3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SamplerConfig {
    /// Rank of `σ1` and `ζ`; `None` draws it uniformly from `1..=N`.
    pub rank: Option<usize>,
    pub min_step: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { rank: None, min_step: 1e-3 }
    }
}

/// Draws one pair with `0 < T ≤ 1/3` from `seed`.
pub fn sample_pair(dims: BipartiteDims, sampler: &SamplerConfig, seed: u64) -> Result<(DensityMatrix, DensityMatrix)> {
    let n = dims.total();
    let mut rng = rng_from_seed(seed);
    for _ in 0..MAX_REJECTIONS {
        let mut rank = || sampler.rank.unwrap_or_else(|| rng.random_range(1..=n));
        let (r1, r2) = (rank(), rank());
        let s1 = random_mixed(dims, r1, rng.random())?;
        let zeta = random_mixed(dims, r2, rng.random())?;
        let dist = trace_distance(&s1, &zeta)?;
        if dist <= 1e-12 {
            continue;
        }
        let s_max = (FANNES_MAX_DISTANCE / dist).min(1.0);
        if s_max < sampler.min_step {
            continue;
        }
        let u: f64 = rng.random();
        let step = (sampler.min_step.ln() + u * (s_max / sampler.min_step).ln()).exp().min(s_max);
        let s2 = s1.mix(&zeta, step)?;
        let t = trace_distance(&s1, &s2)?;
        if t > 0.0 && t <= FANNES_MAX_DISTANCE {
            return Ok((s1, s2));
        }
    }
    Err(Error::SamplingExhausted(MAX_REJECTIONS))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BatchReport {
    pub count: usize,
    pub dims: BipartiteDims,
    pub set: SetKind,
    pub seed: u64,
    /// Indices whose `|E1 - E2|` estimate exceeded the bound.
    pub failures: Vec<usize>,
    /// Indices with at least one proof-chain inequality violated.
    pub proof_chain_failures: Vec<usize>,
    /// Largest `deltaUpper / bound` over the batch.
    pub max_ratio: f64,
    /// Wall-clock time; omitted from deterministic output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
    pub reports: Vec<ContinuityReport>,
}

impl BatchReport {
    pub fn all_hold(&self) -> bool {
        self.failures.is_empty() && self.proof_chain_failures.is_empty()
    }

    pub fn summary_line(&self) -> String {
        format!("pairs={} failures={} maxRatio={:.6}", self.count, self.failures.len() + self.proof_chain_failures.len(), self.max_ratio)
    }
}

/// Samples `count` pairs for `spec.dims` and checks each one. Item `i` uses
/// the seed `derive_seed(seed, i)` for sampling and the oracle, so results
/// do not depend on `exec`.
pub fn batch_report(
    count: usize,
    sampler: &SamplerConfig,
    spec: &ConvexSetSpec,
    opts: &SolverOptions,
    seed: u64,
    exec: Execution,
) -> Result<BatchReport> {
    if count == 0 {
        return Err(Error::OutOfDomain { name: "count", value: 0.0, domain: "[1, inf)" });
    }
    opts.validate()?;
    let start = Instant::now();
    let results = exec.map(count, |i| {
        let item_seed = derive_seed(seed, i as u64);
        let (s1, s2) = sample_pair(spec.dims, sampler, item_seed)?;
        let mut item_opts = opts.clone();
        item_opts.oracle.sep.seed = item_seed;
        theorem_check(&s1, &s2, spec, &item_opts)
    });
    let reports = results.into_iter().collect::<Result<Vec<_>>>()?;
    let failures = reports.iter().enumerate().filter(|(_, r)| !r.skipped && !r.holds).map(|(i, _)| i).collect();
    let proof_chain_failures = reports.iter().enumerate().filter(|(_, r)| !r.proof_chain_holds()).map(|(i, _)| i).collect();
    let max_ratio = reports.iter().filter_map(ContinuityReport::ratio).fold(0.0, f64::max);
    Ok(BatchReport {
        count,
        dims: spec.dims,
        set: spec.kind,
        seed,
        failures,
        proof_chain_failures,
        max_ratio,
        elapsed_seconds: Some(start.elapsed().as_secs_f64()),
        reports,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

/// `seed,T,bound,deltaUpper,margin,holds,confidence`, one row per report.
pub fn continuity_csv(reports: &[ContinuityReport]) -> String {
    let mut out = String::from("seed,T,bound,deltaUpper,margin,holds,confidence\n");
    for r in reports {
        let confidence = match r.confidence {
            Some(c) => serde_json::to_value(c).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default(),
            None => "skipped".to_string(),
        };
        let _ = writeln!(out, "{},{:.16e},{},{},{},{},{}", r.seed, r.t, opt(r.bound), opt(r.delta_upper), opt(r.margin), r.holds, confidence);
    }
    out
}
