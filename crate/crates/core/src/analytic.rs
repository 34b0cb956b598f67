//! Closed-form perturbative spectrum of the two-mode circuit.
//!
//! Detuning is always signed, `delta = omega_q - omega_r`, and the
//! interaction convention is `-2 chi n_q n_r` with `chi >= 0`.

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::error::AnalyticError;
use crate::params::{ModeEnergies, ELECTRON_CHARGE, HBAR};

/// Uncoupled mode frequencies (Hz) and impedances (Ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BareModes {
    pub omega_q: f64,
    pub omega_r: f64,
    pub z_q: f64,
    pub z_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Numeric,
}

/// Dressed observables, all in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub omega_q_t: f64,
    pub omega_r_t: f64,
    pub alpha_q: f64,
    /// Cross-Kerr part only.
    pub two_chi: f64,
    pub g_asymm: f64,
    /// Cross-Kerr plus the dispersive contribution of the asymmetry coupling.
    pub two_chi_total: f64,
    pub source: Source,
}

impl SpectrumResult {
    pub fn delta(&self) -> f64 {
        self.omega_q_t - self.omega_r_t
    }
}

/// Coefficients of the small-amplitude constraints `x1 = c1 x4`, `x2 = c2 x3`.
pub fn constraint_coefficients(e_j: f64, e_lr: f64, b: f64) -> Result<(f64, f64), AnalyticError> {
    if !(b > 0.0 && b < 1.0) {
        return Err(AnalyticError::InvalidInductanceRatio(b));
    }
    let c1 = -2.0 * e_j / (2.0 * e_j + 4.0 * e_lr / (1.0 - b));
    let c2 = -(e_j + 2.0 * e_lr / b) / (2.0 * e_j + 4.0 * e_lr / (b * (1.0 - b)));
    Ok((c1, c2))
}

/// Impedance of a mode with charging energy `e_c` and inductive energy `e_l`,
/// `(ħ/e²) sqrt(E_C/E_L)`.
pub fn mode_impedance(e_c: f64, e_l: f64) -> f64 {
    HBAR / (ELECTRON_CHARGE * ELECTRON_CHARGE) * (e_c / e_l).sqrt()
}

pub fn bare_modes(en: &ModeEnergies) -> BareModes {
    BareModes {
        omega_q: (8.0 * en.e_jq * en.e_cq).sqrt(),
        omega_r: (8.0 * en.e_jr * en.e_cr).sqrt(),
        z_q: mode_impedance(en.e_cq, en.e_jq),
        z_r: mode_impedance(en.e_cr, en.e_jr),
    }
}

/// `sqrt(E_CR E_CQ / (b²/2 + E_LR/E_J))`, shared by every cross-Kerr term.
fn cross_kerr_scale(en: &ModeEnergies) -> f64 {
    let b2 = en.b * en.b;
    (en.e_cr * en.e_cq / (0.5 * b2 + en.e_lr / en.e_j)).sqrt()
}

/// Cross-Kerr dispersive shift 2χ (Hz).
pub fn two_chi(en: &ModeEnergies) -> f64 {
    en.b * en.b / SQRT_2 * cross_kerr_scale(en)
}

/// Perturbative dressed spectrum; bare energies are used without iteration.
pub fn dressed_spectrum(en: &ModeEnergies) -> Result<SpectrumResult, AnalyticError> {
    let bare = bare_modes(en);
    let lamb = 0.5 * en.b * en.b * cross_kerr_scale(en);
    let omega_q_t = bare.omega_q - en.e_cq - lamb;
    let omega_r_t = bare.omega_r - lamb;
    let alpha_q = en.e_cq;
    let two_chi = two_chi(en);
    let (g_asymm, two_chi_total) =
        asymmetric_corrections(en, 0.5 * two_chi, omega_q_t - omega_r_t)?;
    Ok(SpectrumResult {
        omega_q_t,
        omega_r_t,
        alpha_q,
        two_chi,
        g_asymm,
        two_chi_total,
        source: Source::Analytic,
    })
}

/// Multiplier taking the cross-Kerr χ to the total χ̃ once the asymmetry
/// coupling is added in the dispersive limit.
///
/// With `delta = omega_q - omega_r` the transverse term contributes
/// `2 d² E_JΣ α / (Δ (Δ - α))`, which is positive on both sides of the
/// straddling region.
pub fn dispersive_correction_factor(
    d_j: f64,
    e_jsigma: f64,
    alpha_q: f64,
    delta: f64,
) -> Result<f64, AnalyticError> {
    if d_j == 0.0 {
        return Ok(1.0);
    }
    let denom = delta * (delta - alpha_q);
    if denom == 0.0 || !denom.is_finite() {
        return Err(AnalyticError::StraddlingResonance {
            delta,
            alpha: alpha_q,
        });
    }
    Ok(1.0 + 2.0 * d_j * d_j * e_jsigma * alpha_q / denom)
}

/// Asymmetry coupling `g = -d_j sqrt(2 χ E_JΣ)` and total shift 2χ̃.
///
/// `chi` is the cross-Kerr χ (half the shift). Everything is in Hz, so
/// E_JΣ enters as a frequency.
pub fn asymmetric_corrections(
    en: &ModeEnergies,
    chi: f64,
    delta: f64,
) -> Result<(f64, f64), AnalyticError> {
    if chi < 0.0 {
        return Err(AnalyticError::NegativeShift(chi));
    }
    if en.d_j == 0.0 {
        return Ok((0.0, 2.0 * chi));
    }
    let e_jsigma = en.e_jsigma();
    let g = -en.d_j * (2.0 * chi * e_jsigma).sqrt();
    let factor = dispersive_correction_factor(en.d_j, e_jsigma, en.e_cq, delta)?;
    Ok((g, 2.0 * chi * factor))
}

/// Strip the asymmetry contribution from a measured total shift, returning
/// the cross-Kerr 2χ.
pub fn invert_chi(
    two_chi_measured: f64,
    delta: f64,
    alpha_q: f64,
    e_jsigma: f64,
    d_j: f64,
) -> Result<f64, AnalyticError> {
    let factor = dispersive_correction_factor(d_j, e_jsigma, alpha_q, delta)?;
    if factor.is_nan() || factor <= 0.0 {
        return Err(AnalyticError::UnphysicalCorrection { factor });
    }
    Ok(two_chi_measured / factor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_energies, CircuitParams};
    use approx::assert_relative_eq;

    fn table_one() -> ModeEnergies {
        derive_energies(&CircuitParams::table_one()).unwrap()
    }

    #[test]
    fn constraints_large_inductive_limit() {
        let (c1, c2) = constraint_coefficients(1.0, 1e12, 0.405).unwrap();
        assert!(c1.abs() < 1e-11);
        assert_relative_eq!(c2, -0.2975, max_relative = 1e-9);
        let (c1, _) = constraint_coefficients(0.0, 3.0, 0.3).unwrap();
        assert_eq!(c1, 0.0);
    }

    #[test]
    fn constraints_by_hand() {
        // e_j = e_lr = 1, b = 1/2: c1 = -2/10, c2 = -5/18
        let (c1, c2) = constraint_coefficients(1.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(c1, -0.2, max_relative = 1e-15);
        assert_relative_eq!(c2, -5.0 / 18.0, max_relative = 1e-15);
        assert!(constraint_coefficients(1.0, 1.0, 0.0).is_err());
        assert!(constraint_coefficients(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bare_modes_table_one() {
        let bare = bare_modes(&table_one());
        assert_relative_eq!(bare.omega_q, 7.369e9, max_relative = 1e-3);
        assert_relative_eq!(bare.omega_r, 7.588e9, max_relative = 1e-3);
    }

    #[test]
    fn bare_mode_scalings() {
        let en = table_one();
        let mut quad = en;
        quad.e_jq *= 4.0;
        assert_eq!(bare_modes(&quad).omega_q, 2.0 * bare_modes(&en).omega_q);
        let mut eq = en;
        eq.e_cq = eq.e_jq;
        assert_relative_eq!(
            bare_modes(&eq).z_q,
            HBAR / (ELECTRON_CHARGE * ELECTRON_CHARGE),
            max_relative = 1e-15
        );
    }

    #[test]
    fn dressed_spectrum_table_one() {
        let s = dressed_spectrum(&table_one()).unwrap();
        assert_relative_eq!(s.omega_q_t, 7.1986e9, max_relative = 1e-3);
        assert_relative_eq!(s.omega_r_t, 7.5863e9, max_relative = 1e-3);
        assert_relative_eq!(s.alpha_q, 170.27e6, max_relative = 1e-3);
        assert_relative_eq!(s.two_chi, 1.904e6, max_relative = 2e-3);
        assert_eq!(s.g_asymm, 0.0);
        assert_eq!(s.two_chi_total, s.two_chi);
        assert_eq!(s.source, Source::Analytic);
    }

    #[test]
    fn zero_b_gives_zero_shift_and_bare_transmon() {
        let en = table_one().with_b(0.0);
        let s = dressed_spectrum(&en).unwrap();
        assert_eq!(s.two_chi, 0.0);
        assert_eq!(s.omega_q_t, (8.0 * en.e_jq * en.e_cq).sqrt() - en.e_cq);
    }

    #[test]
    fn shift_doubles_with_four_times_resonator_charging() {
        let en = table_one();
        let mut quad = en;
        quad.e_cr *= 4.0;
        assert_eq!(two_chi(&quad), 2.0 * two_chi(&en));
    }

    #[test]
    fn b_ratio_closed_form() {
        let en = table_one();
        let r = en.e_lr / en.e_j;
        let (b, bp) = (0.2f64, 0.4f64);
        let ratio = two_chi(&en.with_b(b)) / two_chi(&en.with_b(bp));
        let expected = b * b * (bp * bp / 2.0 + r).sqrt() / (bp * bp * (b * b / 2.0 + r).sqrt());
        assert_relative_eq!(ratio, expected, max_relative = 1e-13);
    }

    #[test]
    fn asymmetry_raises_shift_below_resonator() {
        let en = table_one().with_asymmetry(0.045);
        let chi = 0.5 * two_chi(&en);
        let (g, total) = asymmetric_corrections(&en, chi, -0.398e9).unwrap();
        // 1 + 2 d² E_JΣ α / (Δ (Δ - α)) evaluated by hand: 1 + 0.027492/0.226172
        assert_relative_eq!(total / (2.0 * chi), 1.12155, max_relative = 1e-3);
        assert_relative_eq!(g, -12.40e6, max_relative = 2e-3);
        let (g2, total2) =
            asymmetric_corrections(&en.with_asymmetry(-0.045), chi, -0.398e9).unwrap();
        assert_eq!(total2, total);
        assert_eq!(g2, -g);
    }

    #[test]
    fn symmetric_corrections_are_trivial() {
        let en = table_one();
        assert_eq!(asymmetric_corrections(&en, 1e6, 0.0).unwrap(), (0.0, 2e6));
    }

    #[test]
    fn straddling_is_rejected() {
        let en = table_one().with_asymmetry(0.045);
        assert!(matches!(
            asymmetric_corrections(&en, 1e6, 0.0),
            Err(AnalyticError::StraddlingResonance { .. })
        ));
        assert!(matches!(
            asymmetric_corrections(&en, 1e6, en.e_cq),
            Err(AnalyticError::StraddlingResonance { .. })
        ));
    }

    #[test]
    fn invert_chi_cases() {
        assert_eq!(
            invert_chi(2.2e6, -0.398e9, 170e6, 40e9, 0.0).unwrap(),
            2.2e6
        );
        let en = table_one();
        let out = invert_chi(2.2e6, -0.398e9, en.e_cq, en.e_jsigma(), 0.045).unwrap();
        assert_relative_eq!(out, 2.2e6 / 1.12155, max_relative = 1e-3);
        // inside the straddling region the correction turns negative
        let err = invert_chi(2.2e6, 0.1 * en.e_cq, en.e_cq, en.e_jsigma(), 0.3).unwrap_err();
        assert!(matches!(err, AnalyticError::UnphysicalCorrection { .. }));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn invert_round_trip(d in -0.3f64..0.3, delta in prop_oneof![-3e9f64..-0.3e9, 0.5e9f64..3e9]) {
                let en = table_one().with_asymmetry(d);
                let chi = 0.5 * two_chi(&en);
                let (_, total) = asymmetric_corrections(&en, chi, delta).unwrap();
                let back = invert_chi(total, delta, en.e_cq, en.e_jsigma(), d).unwrap();
                prop_assert!((back / (2.0 * chi) - 1.0).abs() < 1e-12);
            }

            #[test]
            fn shift_monotone_in_b(b in 0.01f64..0.99, step in 1e-3f64..0.01) {
                let en = table_one();
                let hi = (b + step).min(1.0);
                prop_assert!(two_chi(&en.with_b(hi)) > two_chi(&en.with_b(b)));
            }
        }
    }
}
