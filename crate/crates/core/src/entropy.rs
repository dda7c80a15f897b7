//! Entropic functionals in nats: von Neumann entropy, relative entropy with
//! explicit support handling, `η`, and the continuity bounds built from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{EigenDecomposition, SPECTRAL_FLOOR};
use crate::state::DensityMatrix;

/// Weight of `σ` on a null eigenvector of `ρ` above which `S(σ|ρ) = +∞`.
pub const SUPPORT_WEIGHT_TOL: f64 = 1e-10;

/// Largest trace distance for which the Fannes-type bounds are stated.
pub const FANNES_MAX_DISTANCE: f64 = 1.0 / 3.0;

/// A nonnegative entropy, or the `+∞` marker for a support violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyValue {
    Finite(f64),
    Infinite,
}

impl EntropyValue {
    /// Clips roundoff-level negatives (down to `-1e-9`) to zero.
    fn clipped(v: f64) -> Self {
        if v > -1e-9 {
            Self::Finite(v.max(0.0))
        } else {
            Self::Finite(v)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Self::Finite(_))
    }

    /// `+∞` maps to `f64::INFINITY`.
    pub fn nats(&self) -> f64 {
        match self {
            Self::Finite(v) => *v,
            Self::Infinite => f64::INFINITY,
        }
    }

    pub fn bits(&self) -> f64 {
        self.nats() / std::f64::consts::LN_2
    }
}

/// `Σ λ ln λ` over a spectrum with `0 ln 0 = 0`.
pub(crate) fn neg_entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    eigenvalues.iter().filter(|&&l| l > SPECTRAL_FLOOR).map(|&l| l * l.ln()).sum()
}

/// `S1(σ) = -tr σ ln σ`, in `[0, ln N]`.
pub fn von_neumann_entropy(state: &DensityMatrix) -> EntropyValue {
    EntropyValue::clipped(-neg_entropy_of_spectrum(&state.eigenvalues()))
}

/// `-tr σ ln ρ` given the eigendecomposition of `ρ`, or `None` when `σ`
/// has weight above [`SUPPORT_WEIGHT_TOL`] outside the support of `ρ`.
pub(crate) fn cross_entropy(sigma: &DensityMatrix, rho_eig: &EigenDecomposition) -> Option<f64> {
    let n = sigma.dim();
    let v = &rho_eig.eigenvectors;
    let s = sigma.matrix();
    let mut acc = 0.0;
    for (k, &mu) in rho_eig.eigenvalues.iter().enumerate() {
        // w_k = <v_k|σ|v_k>
        let mut w = 0.0;
        for i in 0..n {
            let vi = v[(i, k)].conj();
            let mut row = num_complex::Complex64::new(0.0, 0.0);
            for j in 0..n {
                row += s[(i, j)] * v[(j, k)];
            }
            w += (vi * row).re;
        }
        if mu <= SPECTRAL_FLOOR {
            if w > SUPPORT_WEIGHT_TOL {
                return None;
            }
            continue;
        }
        acc -= w * mu.ln();
    }
    Some(acc)
}

/// `S(σ|ρ) = tr σ ln σ - tr σ ln ρ`, `+∞` when `supp σ ⊄ supp ρ`.
pub fn relative_entropy(sigma: &DensityMatrix, rho: &DensityMatrix) -> Result<EntropyValue> {
    sigma.check_same_dims(rho)?;
    let neg = neg_entropy_of_spectrum(&sigma.eigenvalues());
    Ok(match cross_entropy(sigma, &rho.matrix().eig()) {
        Some(cross) => EntropyValue::clipped(neg + cross),
        None => EntropyValue::Infinite,
    })
}

/// `η(s) = -s ln s` on `[0, 1]` with `η(0) = 0`.
pub fn eta(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfDomain { name: "s", value: s, domain: "[0, 1]" });
    }
    Ok(if s == 0.0 { 0.0 } else { -s * s.ln() })
}

fn check_distance(t: f64) -> Result<()> {
    if !(0.0..=FANNES_MAX_DISTANCE).contains(&t) {
        return Err(Error::OutOfDomain { name: "T", value: t, domain: "[0, 1/3]" });
    }
    Ok(())
}

/// Fannes: `T ln N + η(T)` for `0 ≤ T ≤ 1/3`.
pub fn fannes_bound(t: f64, n: usize) -> Result<f64> {
    check_distance(t)?;
    Ok(t * (n as f64).ln() + eta(t)?)
}

/// Continuity bound for `E`: `2(T ln N + η(T)) + 4T` for `0 ≤ T ≤ 1/3`.
pub fn theorem_bound(t: f64, n: usize) -> Result<f64> {
    Ok(2.0 * fannes_bound(t, n)? + 4.0 * t)
}
