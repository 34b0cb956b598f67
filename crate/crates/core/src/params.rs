//! Physical constants, lumped-element circuit parameters and the energy
//! scales derived from them.
//!
//! Every energy is stored as a frequency in Hz (E/h). Angular frequencies
//! only appear inside the coherence and readout formulas.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::ParamError;

/// Planck constant (J s), exact in CODATA-2018.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge (C), exact in CODATA-2018.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Reduced flux quantum Φ₀/2π = ħ/2e (Wb).
pub const REDUCED_FLUX_QUANTUM: f64 = HBAR / (2.0 * ELECTRON_CHARGE);

/// Below this E_LR/E_J ratio the constraint elimination behind the closed
/// forms stops being accurate.
pub const REGIME_RATIO_MIN: f64 = 1.0;

/// Fixed constants used by every energy formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub planck_h: f64,
    pub reduced_flux_quantum: f64,
    pub electron_charge: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        planck_h: PLANCK,
        reduced_flux_quantum: REDUCED_FLUX_QUANTUM,
        electron_charge: ELECTRON_CHARGE,
    };

    pub fn hbar(&self) -> f64 {
        self.planck_h / (2.0 * PI)
    }
}

/// Raw lumped-element values of the circuit.
///
/// `l_j` is the Josephson inductance of one junction, `l_r` the full linear
/// inductance `2 L1 + L2`, `b = L2 / L_R` the fraction of it inside the
/// junction loop and `d_j = (E_J1 - E_J2) / (E_J1 + E_J2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitParams {
    /// H
    pub l_j: f64,
    /// F
    pub c_j: f64,
    /// H
    pub l_r: f64,
    /// F
    pub c_r: f64,
    pub b: f64,
    #[serde(default)]
    pub d_j: f64,
}

impl CircuitParams {
    /// Fitted values for the symmetric device (first flux-tunable sample).
    pub fn table_one() -> Self {
        CircuitParams {
            l_j: 8.2e-9,
            c_j: 56.88e-15,
            l_r: 0.546e-9,
            c_r: 781.8e-15,
            b: 0.405,
            d_j: 0.0,
        }
    }

    pub fn with_asymmetry(mut self, d_j: f64) -> Self {
        self.d_j = d_j;
        self
    }
}

/// Energy scales of the two modes, all in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeEnergies {
    /// Single-junction Josephson energy (mean of the two junctions).
    pub e_j: f64,
    pub e_lr: f64,
    pub e_cq: f64,
    pub e_cr: f64,
    /// Qubit-mode inductive energy, `2 e_j` (= E_JΣ).
    pub e_jq: f64,
    /// Resonator-mode inductive energy, `e_lr + b²/2 e_j`.
    pub e_jr: f64,
    pub b: f64,
    pub d_j: f64,
}

impl ModeEnergies {
    /// Assemble from the independent scales; the mode inductive energies
    /// are always recomputed so the defining identities hold exactly.
    pub fn from_parts(e_j: f64, e_lr: f64, e_cq: f64, e_cr: f64, b: f64, d_j: f64) -> Self {
        ModeEnergies {
            e_j,
            e_lr,
            e_cq,
            e_cr,
            e_jq: 2.0 * e_j,
            e_jr: e_lr + 0.5 * b * b * e_j,
            b,
            d_j,
        }
    }

    /// Sum of both junction energies, E_JΣ.
    pub fn e_jsigma(&self) -> f64 {
        self.e_jq
    }

    /// Same circuit with the junction pair retuned to a new `E_JΣ` and asymmetry.
    pub fn with_junctions(&self, e_jsigma: f64, d_j: f64) -> Self {
        Self::from_parts(0.5 * e_jsigma, self.e_lr, self.e_cq, self.e_cr, self.b, d_j)
    }

    pub fn with_b(&self, b: f64) -> Self {
        Self::from_parts(self.e_j, self.e_lr, self.e_cq, self.e_cr, b, self.d_j)
    }

    pub fn with_asymmetry(&self, d_j: f64) -> Self {
        Self::from_parts(self.e_j, self.e_lr, self.e_cq, self.e_cr, self.b, d_j)
    }

    /// E_LR / E_J; the closed forms assume this is large.
    pub fn regime_ratio(&self) -> f64 {
        self.e_lr / self.e_j
    }

    pub fn in_perturbative_regime(&self) -> bool {
        self.regime_ratio() > REGIME_RATIO_MIN
    }
}

/// Josephson energy (Hz) of an inductance `l` (H): (Φ₀/2π)² / (l h).
pub fn inductive_energy(l: f64) -> f64 {
    REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / (l * PLANCK)
}

/// Inverse of [`inductive_energy`].
pub fn inductance_from_energy(e: f64) -> f64 {
    REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM / (e * PLANCK)
}

/// Charging energy (Hz) e²/(2C) of a total capacitance `c` (F).
pub fn charging_energy(c: f64) -> f64 {
    ELECTRON_CHARGE * ELECTRON_CHARGE / (2.0 * c * PLANCK)
}

fn check_positive(name: &'static str, value: f64) -> Result<(), ParamError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ParamError::NonPositive { name, value })
    }
}

fn check_params(params: &CircuitParams) -> Result<(), ParamError> {
    check_positive("l_j", params.l_j)?;
    check_positive("c_j", params.c_j)?;
    check_positive("l_r", params.l_r)?;
    check_positive("c_r", params.c_r)?;
    if !(0.0..=1.0).contains(&params.b) {
        return Err(ParamError::OutOfRange {
            name: "b",
            value: params.b,
            range: "[0, 1]",
        });
    }
    if params.d_j.is_nan() || params.d_j.abs() >= 1.0 {
        return Err(ParamError::OutOfRange {
            name: "d_j",
            value: params.d_j,
            range: "(-1, 1)",
        });
    }
    Ok(())
}

/// Derive every energy scale from the lumped elements.
///
/// The qubit charging energy uses the 2 C_J mode capacitance, e²/(4 C_J);
/// the resonator uses C_R + C_J/2.
pub fn derive_energies(params: &CircuitParams) -> Result<ModeEnergies, ParamError> {
    check_params(params)?;
    let e_j = inductive_energy(params.l_j);
    let e_lr = inductive_energy(params.l_r);
    let e_cq = charging_energy(2.0 * params.c_j);
    let e_cr = charging_energy(params.c_r + 0.5 * params.c_j);
    Ok(ModeEnergies::from_parts(
        e_j, e_lr, e_cq, e_cr, params.b, params.d_j,
    ))
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub parameter: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Report every invariant violation and regime warning without failing.
pub fn validate(params: &CircuitParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    for (name, value) in [
        ("l_j", params.l_j),
        ("c_j", params.c_j),
        ("l_r", params.l_r),
        ("c_r", params.c_r),
    ] {
        if !(value.is_finite() && value > 0.0) {
            report.violations.push(Violation {
                parameter: name,
                message: format!("{name} must be positive, got {value}"),
            });
        }
    }
    if !(0.0..=1.0).contains(&params.b) {
        report.violations.push(Violation {
            parameter: "b",
            message: format!("b out of [0,1], got {}", params.b),
        });
    }
    if params.d_j.is_nan() || params.d_j.abs() >= 1.0 {
        report.violations.push(Violation {
            parameter: "d_j",
            message: format!("d_j out of (-1,1), got {}", params.d_j),
        });
    }
    if report.violations.is_empty() {
        if let Ok(en) = derive_energies(params) {
            if !en.in_perturbative_regime() {
                report.warnings.push(format!(
                    "E_LR >> E_J regime violated (E_LR/E_J = {:.3}); perturbative formulas unreliable",
                    en.regime_ratio()
                ));
            }
        }
    }
    report
}
