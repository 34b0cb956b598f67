//! T1 budget: constant-Q dielectric loss, Purcell decay through the
//! asymmetry coupling, and the Purcell limit of a transversely coupled
//! transmon with the same dispersive shift.
//!
//! Inputs are ordinary frequencies in Hz; conversion to angular frequency
//! happens here so every T1 comes out in seconds.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::analytic::SpectrumResult;
use crate::error::CoherenceError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherenceConfig {
    /// Dielectric quality factor.
    pub q_diel: f64,
    /// Readout linewidth κ/2π (Hz).
    pub kappa: f64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            q_diel: 1.1e6,
            kappa: 1.28e6,
        }
    }
}

impl CoherenceConfig {
    pub fn validate(&self) -> Result<(), CoherenceError> {
        positive("q_diel", self.q_diel)?;
        positive("kappa", self.kappa)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub t1_diel: f64,
    pub t1_asymm: f64,
    pub t1_model: f64,
    pub t1_transmon_purcell: f64,
}

fn positive(name: &'static str, value: f64) -> Result<(), CoherenceError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CoherenceError::InvalidInput { name, value })
    }
}

/// `Q / (2π f)`.
pub fn t1_dielectric(omega_q: f64, q_diel: f64) -> Result<f64, CoherenceError> {
    positive("omega_q", omega_q)?;
    positive("q_diel", q_diel)?;
    Ok(q_diel / (2.0 * PI * omega_q))
}

/// Purcell-limited T1 `Δ² / (κ g²)` with all three as angular frequencies.
///
/// Returns `f64::INFINITY` when `g == 0`: no channel, no decay.
pub fn t1_purcell(g: f64, delta: f64, kappa: f64) -> Result<f64, CoherenceError> {
    positive("kappa", kappa)?;
    if delta == 0.0 {
        return Err(CoherenceError::ZeroDetuning);
    }
    if g == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(delta * delta / (2.0 * PI * kappa * g * g))
}

/// Harmonic sum of T1 channels; infinite entries add no rate.
pub fn combine(contributions: &[f64]) -> Result<f64, CoherenceError> {
    if contributions.is_empty() {
        return Err(CoherenceError::EmptyContributions);
    }
    let mut rate = 0.0;
    for &t in contributions {
        if t.is_nan() || t <= 0.0 {
            return Err(CoherenceError::InvalidInput {
                name: "t1",
                value: t,
            });
        }
        rate += 1.0 / t;
    }
    Ok(1.0 / rate)
}

/// Coupling a transmon needs to reach `two_chi_target` at this detuning,
/// from `χ = g² α / (Δ (Δ - α))` with `Δ = ω_q - ω_r`.
pub fn transmon_equivalent_g(
    two_chi_target: f64,
    delta: f64,
    alpha_q: f64,
) -> Result<f64, CoherenceError> {
    let chi = 0.5 * two_chi_target;
    let lever = delta * (delta - alpha_q);
    if alpha_q.is_nan()
        || alpha_q <= 0.0
        || lever.is_nan()
        || lever <= 0.0
        || chi < 0.0
        || !chi.is_finite()
    {
        return Err(CoherenceError::NonInvertible {
            chi,
            delta,
            alpha: alpha_q,
        });
    }
    Ok((chi * lever / alpha_q).sqrt())
}

/// Full budget for one operating point described by an analytic spectrum.
pub fn coherence_report(
    spec: &SpectrumResult,
    cfg: &CoherenceConfig,
) -> Result<CoherenceReport, CoherenceError> {
    cfg.validate()?;
    let delta = spec.delta();
    let t1_diel = t1_dielectric(spec.omega_q_t, cfg.q_diel)?;
    let t1_asymm = t1_purcell(spec.g_asymm, delta, cfg.kappa)?;
    let t1_model = combine(&[t1_diel, t1_asymm])?;
    let g_transmon = transmon_equivalent_g(spec.two_chi_total, delta, spec.alpha_q)?;
    let t1_transmon_purcell = t1_purcell(g_transmon, delta, cfg.kappa)?;
    Ok(CoherenceReport {
        t1_diel,
        t1_asymm,
        t1_model,
        t1_transmon_purcell,
    })
}
