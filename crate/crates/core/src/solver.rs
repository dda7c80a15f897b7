//! Relative entropy of entanglement `E(σ) = inf_{ρ∈D} S(σ|ρ)` with a
//! certified interval.
//!
//! The solver runs Frank–Wolfe on the regularized problem
//! `E_x(σ) = inf_{ρ∈D} S(σ | xρ + (1-x)τ)`, whose iterates are full rank with
//! spectrum at least `(1-x)/N`. A Frank–Wolfe iterate gives an upper bound
//! (a feasible value) and its duality gap a lower bound on `E_x`. Because
//! `E ≤ E_x ≤ E - ln x`, the bracket on `E_x` converts into one on `E` by
//! widening the lower end by `-ln x`.

use serde::{Deserialize, Serialize};

use crate::entropy::{cross_entropy, neg_entropy_of_spectrum};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, EigenDecomposition, HermitianMatrix, ZERO};
use crate::sets::{Confidence, ConvexSetSpec, OracleOptions, SetKind, WarmOracle};
use crate::state::{maximally_mixed, DensityMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FwVariant {
    /// Move toward the oracle atom only.
    Classic,
    /// Shift weight from the worst active atom to the oracle atom.
    Pairwise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    /// Target for the certified duality gap, in nats.
    pub gap_tol: f64,
    /// Regularization weight, `1/2 ≤ x < 1`.
    pub x: f64,
    /// Bracket width at which the line search stops.
    pub line_search_tol: f64,
    pub oracle: OracleOptions,
    pub variant: FwVariant,
    /// Starting point in `D` (default `τ`). Must be a member of the set.
    pub start: Option<DensityMatrix>,
    /// Without an explicit `start`, begin from an interior-point
    /// approximation when the set is exactly PPT (the PPT set itself, or SEP
    /// with `dA·dB ≤ 6`).
    pub interior_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            gap_tol: 1e-6,
            x: 1.0 - 1e-6,
            line_search_tol: 1e-12,
            oracle: OracleOptions::default(),
            variant: FwVariant::Pairwise,
            start: None,
            interior_start: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gap_tol > 0.0) {
            return Err(Error::OutOfDomain { name: "gap_tol", value: self.gap_tol, domain: "(0, inf)" });
        }
        check_shift_weight(self.x)
    }
}

fn check_shift_weight(x: f64) -> Result<()> {
    if !(0.5..1.0).contains(&x) {
        return Err(Error::OutOfDomain { name: "x", value: x, domain: "[1/2, 1)" });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ValueConfidence {
    /// Both ends are rigorous (up to floating point).
    Certified,
    /// The lower end assumes the nonconvex SEP oracle found its global minimum.
    HeuristicLower,
}

/// Interval `[lower, upper]` for `E` (or `E_x`) with the witnessing state.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CertifiedValue {
    pub lower: f64,
    pub upper: f64,
    /// `ρ̂ ∈ D`; `upper = S(σ | x·ρ̂ + (1-x)τ)`.
    #[serde(with = "crate::state::density_serde")]
    pub minimizer: DensityMatrix,
    /// Certified duality gap of the final iterate.
    pub fw_gap: f64,
    pub iterations: usize,
    pub x: f64,
    pub confidence: ValueConfidence,
    pub converged: bool,
}

impl CertifiedValue {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, v: f64, slack: f64) -> bool {
        self.lower - slack <= v && v <= self.upper + slack
    }

    /// `Err(NotConverged)` unless the gap target was met.
    pub fn require_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged(Box::new(self)))
        }
    }
}

/// First divided difference of `ln`: `(ln a - ln b)/(a - b)`, `1/a` on the diagonal.
#[inline]
fn log_divided_difference(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() <= 1e-12 * a.max(b) {
        2.0 / (a + b)
    } else {
        (d / b).ln_1p() / d
    }
}

/// Divided-difference matrix `Φ_ij = φ(λ_i, λ_j)`.
fn divided_differences(eigenvalues: &[f64]) -> Vec<f64> {
    let n = eigenvalues.len();
    let mut phi = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            phi[i * n + j] = log_divided_difference(eigenvalues[i], eigenvalues[j]);
        }
    }
    phi
}

/// Gradient of `ρ ↦ -tr σ ln ρ` in the trace pairing, from `ρ`'s eigenpairs:
/// `G = V (-(V†σV) ∘ Φ) V†` (Daleckii–Krein).
fn gradient_from_eig(sigma: &DensityMatrix, eig: &EigenDecomposition) -> HermitianMatrix {
    let n = sigma.dim();
    let phi = divided_differences(&eig.eigenvalues);
    let st = eig.to_eigenbasis(sigma.matrix().matrix());
    let gt = CMatrix::from_fn(n, |i, j| -st[(i, j)] * phi[i * n + j]);
    HermitianMatrix::symmetrized(eig.from_eigenbasis(&gt))
}

/// `∇_ρ S(σ|ρ)` for a full-rank `ρ`.
pub fn relent_gradient(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<HermitianMatrix> {
    sigma.check_same_dims(rho)?;
    let eig = rho.matrix().eig();
    if eig.eigenvalues[0] <= crate::linalg::SPECTRAL_FLOOR {
        return Err(Error::NonPositiveSpectrum(eig.eigenvalues[0]));
    }
    Ok(gradient_from_eig(sigma, &eig))
}

/// `S(σ|ρ)` restricted to full-rank `ρ` along a segment.
struct Segment<'a> {
    sigma: &'a DensityMatrix,
    neg_entropy: f64,
    rho: &'a HermitianMatrix,
    dir: &'a HermitianMatrix,
}

impl Segment<'_> {
    fn point(&self, gamma: f64) -> HermitianMatrix {
        self.rho.lincomb(1.0, self.dir, gamma)
    }

    fn value(&self, gamma: f64) -> f64 {
        let eig = self.point(gamma).eig();
        let sigma = self.sigma;
        self.neg_entropy + cross_entropy(sigma, &eig).unwrap_or(f64::INFINITY)
    }

    /// `g'(γ) = tr(∇S(ρ_γ) · d) = -Σ_ij σ̃_ij Φ_ij d̃_ji`.
    fn slope(&self, gamma: f64) -> f64 {
        let eig = self.point(gamma).eig();
        if eig.eigenvalues[0] <= 0.0 {
            return f64::INFINITY;
        }
        let n = eig.eigenvalues.len();
        let phi = divided_differences(&eig.eigenvalues);
        let st = eig.to_eigenbasis(self.sigma.matrix().matrix());
        let dt = eig.to_eigenbasis(self.dir.matrix());
        let mut acc = ZERO;
        for i in 0..n {
            for j in 0..n {
                acc += st[(i, j)] * dt[(j, i)] * phi[i * n + j];
            }
        }
        -acc.re
    }
}

/// Minimizes `g(γ) = S(σ | ρ + γ·dir)` over `[0, γ_max]`. `g` is convex, so
/// the search brackets the sign change of `g'` (bisection safeguarding
/// regula-falsi steps) and returns an endpoint when the minimum is there.
fn line_search_segment(seg: &Segment<'_>, gamma_max: f64, tol: f64) -> f64 {
    if gamma_max <= 0.0 || seg.dir.matrix().frobenius_norm() == 0.0 {
        return 0.0;
    }
    let s0 = seg.slope(0.0);
    if s0 >= 0.0 {
        return 0.0;
    }
    let s1 = seg.slope(gamma_max);
    if s1 <= 0.0 {
        return gamma_max;
    }
    let (mut lo, mut hi) = (0.0, gamma_max);
    let (mut slo, mut shi) = (s0, s1);
    let mut side = 0i8;
    let mut iters = 0;
    while hi - lo > tol * gamma_max.max(1e-300) && iters < 200 {
        iters += 1;
        // Illinois-modified regula falsi, falling back to bisection when the
        // secant point is not well inside the bracket.
        let mut mid = lo - slo * (hi - lo) / (shi - slo);
        if !mid.is_finite() || mid <= lo + 0.01 * (hi - lo) || mid >= hi - 0.01 * (hi - lo) || iters % 4 == 0 {
            mid = 0.5 * (lo + hi);
        }
        let sm = seg.slope(mid);
        if sm == 0.0 {
            return mid;
        }
        if sm < 0.0 {
            lo = mid;
            slo = sm;
            if side == -1 {
                shi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            shi = sm;
            if side == 1 {
                slo *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (lo + hi)
}

/// Exact line search for `S(σ | ρ + γ(ω - ρ))` over `γ ∈ [0, 1]`.
/// Returns `0` when `ω = ρ`.
pub fn line_search(sigma: &DensityMatrix, rho: &DensityMatrix, omega: &DensityMatrix, tol: f64) -> Result<f64> {
    sigma.check_same_dims(rho)?;
    sigma.check_same_dims(omega)?;
    let dir = omega.matrix() - rho.matrix();
    let neg = neg_entropy_of_spectrum(&sigma.eigenvalues());
    let seg = Segment { sigma, neg_entropy: neg, rho: rho.matrix(), dir: &dir };
    Ok(line_search_segment(&seg, 1.0, tol))
}

/// Active atoms of the current unshifted iterate `ρ̂ = Σ w_i a_i`.
struct ActiveSet {
    atoms: Vec<HermitianMatrix>,
    weights: Vec<f64>,
}

impl ActiveSet {
    fn new(start: HermitianMatrix) -> Self {
        Self { atoms: vec![start], weights: vec![1.0] }
    }

    fn index_of(&self, atom: &HermitianMatrix) -> Option<usize> {
        self.atoms.iter().position(|a| a.max_abs_diff(atom) <= 1e-13)
    }

    fn combination(&self) -> HermitianMatrix {
        let n = self.atoms[0].dim();
        let mut acc = HermitianMatrix::zeros(n);
        for (a, w) in self.atoms.iter().zip(&self.weights) {
            acc = acc.lincomb(1.0, a, *w);
        }
        acc
    }

    /// Atom with the largest `tr(G a)`.
    fn away_atom(&self, g: &HermitianMatrix) -> (usize, f64) {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, a) in self.atoms.iter().enumerate() {
            let v = g.trace_product(a);
            if v > best.1 {
                best = (i, v);
            }
        }
        best
    }

    fn prune(&mut self) {
        let mut i = 0;
        while i < self.atoms.len() {
            if self.weights[i] <= 1e-15 && self.atoms.len() > 1 {
                self.atoms.swap_remove(i);
                self.weights.swap_remove(i);
            } else {
                i += 1;
            }
        }
        let total: f64 = self.weights.iter().sum();
        for w in &mut self.weights {
            *w /= total;
        }
    }
}

/// SEP coincides with PPT exactly when `dA·dB ≤ 6`.
fn has_ppt_description(spec: &ConvexSetSpec) -> bool {
    spec.kind == SetKind::Ppt || spec.dims.total() <= 6
}

fn confidence_for(kind: SetKind) -> ValueConfidence {
    match kind {
        SetKind::Sep => ValueConfidence::HeuristicLower,
        SetKind::Ppt => ValueConfidence::Certified,
    }
}

/// Frank–Wolfe for `E_x(σ)` at `x = spec.x() < 1`. Never fails on iteration
/// exhaustion; the returned value is flagged `converged = false` instead.
pub fn solve_shifted(sigma: &DensityMatrix, spec: &ConvexSetSpec, opts: &SolverOptions) -> Result<CertifiedValue> {
    let x = spec.x();
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::OutOfDomain { name: "x", value: x, domain: "(0, 1)" });
    }
    if sigma.dims() != spec.dims {
        return Err(Error::DimensionMismatch { expected: spec.dims.total(), found: sigma.dim() });
    }
    let dims = spec.dims;
    let n = dims.total();
    let tau = maximally_mixed(dims);
    let start = match &opts.start {
        Some(s) => {
            sigma.check_same_dims(s)?;
            s.matrix().clone()
        }
        None if opts.interior_start && has_ppt_description(spec) => {
            interior::central_path(sigma, x, 0.1 * opts.gap_tol).unwrap_or_else(|| tau.matrix().clone())
        }
        None => tau.matrix().clone(),
    };
    let neg_entropy = neg_entropy_of_spectrum(&sigma.eigenvalues());
    let shift = |unshifted: &HermitianMatrix| unshifted.lincomb(x, tau.matrix(), 1.0 - x);

    let mut oracle = WarmOracle::new(spec.kind, dims, &opts.oracle);
    let mut active = ActiveSet::new(start);
    let mut unshifted = active.combination();
    let mut rho = shift(&unshifted);
    let mut eig = rho.eig();
    let mut value = neg_entropy + cross_entropy(sigma, &eig).expect("shifted iterate is full rank");
    let mut best_lower = f64::NEG_INFINITY;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let mut linmin_certified = true;

    while iterations < opts.max_iters {
        let g = gradient_from_eig(sigma, &eig);
        let lm = oracle.call(&g)?;
        if lm.global_confidence == Confidence::Heuristic {
            linmin_certified = false;
        }
        // tr(G ω̃) for ω̃ = x·atom + (1-x)τ
        let g_trace = g.trace();
        let shifted_atom_value = x * lm.value + (1.0 - x) * g_trace / n as f64;
        let fw_gap = g.trace_product(&rho) - shifted_atom_value;
        gap = fw_gap.max(0.0) + x * lm.value_slack;
        best_lower = best_lower.max(value - gap);
        if gap <= opts.gap_tol {
            converged = true;
            break;
        }
        iterations += 1;

        let atom = lm.atom.matrix().clone();
        let (direction, gamma_max, away) = match opts.variant {
            FwVariant::Classic => (&atom - &unshifted, 1.0, None),
            FwVariant::Pairwise => {
                let (idx, _) = active.away_atom(&g);
                (&atom - &active.atoms[idx], active.weights[idx], Some(idx))
            }
        };
        let shifted_dir = direction.scaled(x);
        let seg = Segment { sigma, neg_entropy, rho: &rho, dir: &shifted_dir };
        let mut gamma = line_search_segment(&seg, gamma_max, opts.line_search_tol);
        let new_value = if gamma > 0.0 { seg.value(gamma) } else { value };
        if !(new_value <= value) {
            gamma = 0.0;
        }
        if gamma == 0.0 {
            // No descent along this direction; the gap is already at the
            // resolution the line search can exploit.
            if fw_gap <= 1e-13 * (1.0 + value.abs()) {
                break;
            }
            if matches!(opts.variant, FwVariant::Pairwise) {
                // Fall back to a plain Frank–Wolfe step.
                let dir = (&atom - &unshifted).scaled(x);
                let seg = Segment { sigma, neg_entropy, rho: &rho, dir: &dir };
                let gm = line_search_segment(&seg, 1.0, opts.line_search_tol);
                if gm > 0.0 && seg.value(gm) <= value {
                    apply_classic(&mut active, &atom, gm);
                } else {
                    break;
                }
            } else {
                break;
            }
        } else {
            match away {
                None => apply_classic(&mut active, &atom, gamma),
                Some(idx) => {
                    active.weights[idx] -= gamma;
                    if gamma >= gamma_max * (1.0 - 1e-12) {
                        active.weights[idx] = 0.0;
                    }
                    match active.index_of(&atom) {
                        Some(j) => active.weights[j] += gamma,
                        None => {
                            active.atoms.push(atom);
                            active.weights.push(gamma);
                        }
                    }
                    active.prune();
                }
            }
        }
        unshifted = active.combination();
        rho = shift(&unshifted);
        eig = rho.eig();
        value = neg_entropy + cross_entropy(sigma, &eig).expect("shifted iterate is full rank");
    }

    let confidence = if linmin_certified { ValueConfidence::Certified } else { confidence_for(spec.kind) };
    let minimizer = DensityMatrix::from_trusted(unshifted, dims);
    Ok(CertifiedValue {
        lower: best_lower.max(0.0).min(value),
        upper: value,
        minimizer,
        fw_gap: gap,
        iterations,
        x,
        confidence,
        converged,
    })
}

fn apply_classic(active: &mut ActiveSet, atom: &HermitianMatrix, gamma: f64) {
    for w in &mut active.weights {
        *w *= 1.0 - gamma;
    }
    match active.index_of(atom) {
        Some(j) => active.weights[j] += gamma,
        None => {
            active.atoms.push(atom.clone());
            active.weights.push(gamma);
        }
    }
    active.prune();
}

/// Certified interval for `E_x(σ)`; `Err(NotConverged)` carries the
/// best-so-far (still sound) interval.
pub fn ree_shifted(sigma: &DensityMatrix, spec: &ConvexSetSpec, opts: &SolverOptions) -> Result<CertifiedValue> {
    solve_shifted(sigma, spec, opts)?.require_converged()
}

/// Widens an interval for `E_x` into one for `E`: `E ∈ [E_x.lower + ln x, E_x.upper]`.
pub(crate) fn unshift(mut cv: CertifiedValue) -> CertifiedValue {
    cv.lower = (cv.lower + cv.x.ln()).max(0.0);
    cv
}

/// Interval for `E(σ)` without the convergence check.
pub fn solve(sigma: &DensityMatrix, kind: SetKind, opts: &SolverOptions) -> Result<CertifiedValue> {
    opts.validate()?;
    let spec = ConvexSetSpec::new(kind, sigma.dims(), opts.x)?;
    Ok(unshift(solve_shifted(sigma, &spec, opts)?))
}

/// Certified interval for `E(σ) = inf_{ρ∈D} S(σ|ρ)` using `opts.x`
/// (the `x` stored in `spec` is ignored).
pub fn ree(sigma: &DensityMatrix, spec: &ConvexSetSpec, opts: &SolverOptions) -> Result<CertifiedValue> {
    if sigma.dims() != spec.dims {
        return Err(Error::DimensionMismatch { expected: spec.dims.total(), found: sigma.dim() });
    }
    solve(sigma, spec.kind, opts)?.require_converged()
}

/// A closest state `ρ̂(σ)`: the first minimizer found under the seeded
/// restart order. Not canonical when minimizers are not unique.
pub fn closest_state(sigma: &DensityMatrix, spec: &ConvexSetSpec, opts: &SolverOptions) -> Result<DensityMatrix> {
    Ok(ree(sigma, spec, opts)?.minimizer)
}

mod interior;

#[cfg(test)]
mod tests;
