//! Flux tuning of the junction pair at integer flux quanta and sweeps of the
//! spectrum/coherence pipeline over operating points.
//!
//! With `n` flux quanta in the main loop, a SQUID whose loop is a fraction
//! `a` of that area sees `n a` quanta and its Josephson energy scales by
//! `cos(n π a)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::analytic::{dressed_spectrum, SpectrumResult};
use crate::coherence::{coherence_report, CoherenceConfig, CoherenceReport};
use crate::error::{Error, FluxError};
use crate::params::{derive_energies, CircuitParams, ModeEnergies};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FluxMode {
    /// Both junctions replaced by identical SQUIDs.
    BothSquids,
    /// Junction 2 replaced by a SQUID; junction 1 is fixed.
    OneSquid,
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxConfig {
    pub mode: FluxMode,
    /// Zero-flux Josephson energies (Hz) of junction/SQUID 1 and 2.
    pub e_j1_zero: f64,
    pub e_j2_zero: f64,
    /// SQUID loop area over main loop area.
    pub area_ratio_a: f64,
    /// Flux quanta in the main loop.
    pub n: i64,
}

impl FluxConfig {
    /// Split `E_JΣ` of `en` into the two junction energies via its `d_j`.
    pub fn from_energies(mode: FluxMode, en: &ModeEnergies, area_ratio_a: f64) -> Self {
        let e_js = en.e_jsigma();
        FluxConfig {
            mode,
            e_j1_zero: 0.5 * (1.0 + en.d_j) * e_js,
            e_j2_zero: 0.5 * (1.0 - en.d_j) * e_js,
            area_ratio_a,
            n: 0,
        }
    }

    pub fn at(&self, n: i64) -> Self {
        FluxConfig { n, ..*self }
    }

    pub fn validate(&self) -> Result<(), FluxError> {
        if !(self.e_j1_zero.is_finite() && self.e_j1_zero >= 0.0)
            || !(self.e_j2_zero.is_finite() && self.e_j2_zero >= 0.0)
        {
            return Err(FluxError::InvalidConfig(format!(
                "junction energies must be non-negative, got ({}, {})",
                self.e_j1_zero, self.e_j2_zero
            )));
        }
        if self.mode != FluxMode::Fixed && !(self.area_ratio_a > 0.0 && self.area_ratio_a < 1.0) {
            return Err(FluxError::InvalidConfig(format!(
                "area_ratio_a must lie in (0, 1), got {}",
                self.area_ratio_a
            )));
        }
        Ok(())
    }
}

/// Effective `E_JΣ` (Hz) and asymmetry at the configured flux bias.
pub fn tuned_junctions(cfg: &FluxConfig) -> Result<(f64, f64), FluxError> {
    cfg.validate()?;
    let (e1, e2) = match cfg.mode {
        FluxMode::Fixed => (cfg.e_j1_zero, cfg.e_j2_zero),
        FluxMode::OneSquid => {
            let c = (cfg.n as f64 * PI * cfg.area_ratio_a).cos();
            (cfg.e_j1_zero, cfg.e_j2_zero * c)
        }
        FluxMode::BothSquids => {
            let s = (cfg.n as f64 * PI * cfg.area_ratio_a).cos().abs();
            (cfg.e_j1_zero * s, cfg.e_j2_zero * s)
        }
    };
    let e_jsigma = e1 + e2;
    if e_jsigma.is_nan() || e_jsigma <= 0.0 {
        return Err(FluxError::UnphysicalJunction { n: cfg.n, e_jsigma });
    }
    let d_j = match cfg.mode {
        // identical SQUIDs keep their zero-flux ratio
        FluxMode::BothSquids => (cfg.e_j1_zero - cfg.e_j2_zero) / (cfg.e_j1_zero + cfg.e_j2_zero),
        _ => (e1 - e2) / e_jsigma,
    };
    Ok((e_jsigma, d_j))
}

/// Energies at the flux bias in `cfg`, keeping every non-junction scale of `base`.
pub fn energies_at(base: &ModeEnergies, cfg: &FluxConfig) -> Result<ModeEnergies, FluxError> {
    let (e_jsigma, d_j) = tuned_junctions(cfg)?;
    Ok(base.with_junctions(e_jsigma, d_j))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: i64,
    pub e_jsigma: f64,
    pub d_j: f64,
    pub omega_q_t: f64,
    pub omega_r_t: f64,
    pub delta: f64,
    pub two_chi: f64,
    pub g_asymm: f64,
    pub two_chi_total: f64,
    pub t1_diel: f64,
    pub t1_asymm: f64,
    pub t1_model: f64,
    pub t1_transmon_purcell: f64,
}

impl SweepRow {
    fn new(n: i64, en: &ModeEnergies, s: &SpectrumResult, c: &CoherenceReport) -> Self {
        SweepRow {
            n,
            e_jsigma: en.e_jsigma(),
            d_j: en.d_j,
            omega_q_t: s.omega_q_t,
            omega_r_t: s.omega_r_t,
            delta: s.delta(),
            two_chi: s.two_chi,
            g_asymm: s.g_asymm,
            two_chi_total: s.two_chi_total,
            t1_diel: c.t1_diel,
            t1_asymm: c.t1_asymm,
            t1_model: c.t1_model,
            t1_transmon_purcell: c.t1_transmon_purcell,
        }
    }

    pub fn coherence(&self) -> CoherenceReport {
        CoherenceReport {
            t1_diel: self.t1_diel,
            t1_asymm: self.t1_asymm,
            t1_model: self.t1_model,
            t1_transmon_purcell: self.t1_transmon_purcell,
        }
    }
}

/// One sweep point; a failure is kept in place so the table stays aligned with the bias list.
#[derive(Debug)]
pub struct SweepOutcome {
    pub n: i64,
    pub row: Result<SweepRow, Error>,
}

fn sweep_point(
    base: &ModeEnergies,
    cfg: &FluxConfig,
    n: i64,
    coherence: &CoherenceConfig,
) -> Result<SweepRow, Error> {
    let en = energies_at(base, &cfg.at(n))?;
    let s = dressed_spectrum(&en)?;
    let c = coherence_report(&s, coherence)?;
    Ok(SweepRow::new(n, &en, &s, &c))
}

/// Run tuning → energies → spectrum → asymmetry corrections → coherence for
/// every bias in `n_list`, in order. Rows are evaluated in parallel.
pub fn sweep(
    params: &CircuitParams,
    cfg: &FluxConfig,
    n_list: &[i64],
    coherence: &CoherenceConfig,
) -> Result<Vec<SweepOutcome>, Error> {
    let base = derive_energies(params)?;
    Ok(sweep_energies(&base, cfg, n_list, coherence))
}

pub fn sweep_energies(
    base: &ModeEnergies,
    cfg: &FluxConfig,
    n_list: &[i64],
    coherence: &CoherenceConfig,
) -> Vec<SweepOutcome> {
    n_list
        .par_iter()
        .map(|&n| SweepOutcome {
            n,
            row: sweep_point(base, cfg, n, coherence),
        })
        .collect()
}

/// Observable matched when calibrating an area ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorTarget {
    /// Dressed qubit frequency (Hz).
    QubitFrequency(f64),
    Asymmetry(f64),
}

fn anchor_value(base: &ModeEnergies, cfg: &FluxConfig, target: AnchorTarget) -> Result<f64, Error> {
    let en = energies_at(base, cfg)?;
    Ok(match target {
        AnchorTarget::QubitFrequency(_) => dressed_spectrum(&en.with_asymmetry(0.0))?.omega_q_t,
        AnchorTarget::Asymmetry(_) => en.d_j,
    })
}

fn bisect<F: Fn(f64) -> Result<f64, Error>>(f: F, mut lo: f64, mut hi: f64) -> Result<f64, Error> {
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo.signum() == f_hi.signum() {
        return Err(FluxError::FitFailed(format!("target not bracketed on [{lo}, {hi}]")).into());
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)?.signum() == f_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Area ratio for which the bias `anchor_n` reproduces `target`.
///
/// The search covers the branch where the SQUID response is monotone:
/// `n a` in (0, 1/2) for identical SQUIDs, (0, 1) for a single SQUID.
pub fn fit_area_ratio(
    base: &ModeEnergies,
    cfg: &FluxConfig,
    anchor_n: i64,
    target: AnchorTarget,
) -> Result<f64, Error> {
    if anchor_n == 0 || cfg.mode == FluxMode::Fixed {
        return Err(FluxError::FitFailed(
            "area ratio is unobservable at zero flux or without a SQUID".into(),
        )
        .into());
    }
    // keep E_JΣ positive: a lone SQUID may not swing below -e_j1/e_j2
    let phase_max = match cfg.mode {
        FluxMode::BothSquids => 0.5 * PI,
        _ if cfg.e_j2_zero > cfg.e_j1_zero => (-cfg.e_j1_zero / cfg.e_j2_zero).acos(),
        _ => PI,
    };
    let span = phase_max / (PI * anchor_n.unsigned_abs() as f64);
    let goal = match target {
        AnchorTarget::QubitFrequency(v) | AnchorTarget::Asymmetry(v) => v,
    };
    let eps = 1e-9 * span;
    let upper = (span - eps).min(1.0 - 1e-12);
    bisect(
        |a| {
            let trial = FluxConfig {
                area_ratio_a: a,
                n: anchor_n,
                ..*cfg
            };
            Ok(anchor_value(base, &trial, target)? - goal)
        },
        eps,
        upper,
    )
}

/// Total junction energy whose symmetric dressed qubit sits at `freq`.
pub fn e_jsigma_for_qubit_frequency(base: &ModeEnergies, freq: f64) -> Result<f64, Error> {
    let f = |e_js: f64| -> Result<f64, Error> {
        Ok(dressed_spectrum(&base.with_junctions(e_js, 0.0))?.omega_q_t - freq)
    };
    // ω ≈ sqrt(8 E_JΣ E_C) brackets the root comfortably
    let guess = (freq + base.e_cq).powi(2) / (8.0 * base.e_cq);
    bisect(f, 0.25 * guess, 4.0 * guess)
}

/// Calibrate a single-SQUID device from its zero-flux qubit frequency and
/// asymmetry plus one anchor at bias `anchor_n`.
pub fn calibrate_one_squid(
    base: &ModeEnergies,
    zero_flux_frequency: f64,
    zero_flux_asymmetry: f64,
    anchor_n: i64,
    anchor: AnchorTarget,
) -> Result<FluxConfig, Error> {
    let e_js = e_jsigma_for_qubit_frequency(base, zero_flux_frequency)?;
    let mut cfg = FluxConfig {
        mode: FluxMode::OneSquid,
        e_j1_zero: 0.5 * (1.0 + zero_flux_asymmetry) * e_js,
        e_j2_zero: 0.5 * (1.0 - zero_flux_asymmetry) * e_js,
        area_ratio_a: 0.5,
        n: 0,
    };
    cfg.area_ratio_a = fit_area_ratio(base, &cfg, anchor_n, anchor)?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn table_one() -> ModeEnergies {
        derive_energies(&CircuitParams::table_one()).unwrap()
    }

    fn one_squid(e1: f64, e2: f64, a: f64) -> FluxConfig {
        FluxConfig {
            mode: FluxMode::OneSquid,
            e_j1_zero: e1,
            e_j2_zero: e2,
            area_ratio_a: a,
            n: 0,
        }
    }

    #[test]
    fn zero_flux_is_untuned() {
        let cfg = one_squid(7e9, 13e9, 0.1);
        let (e, d) = tuned_junctions(&cfg).unwrap();
        assert_eq!(e, 20e9);
        assert_relative_eq!(d, -0.3, max_relative = 1e-15);
        let both = FluxConfig {
            mode: FluxMode::BothSquids,
            ..cfg
        };
        assert_eq!(tuned_junctions(&both).unwrap(), (20e9, (7e9 - 13e9) / 20e9));
    }

    #[test]
    fn both_squids_scale_at_nine_quanta() {
        let en = table_one().with_asymmetry(0.045);
        let cfg = FluxConfig::from_energies(FluxMode::BothSquids, &en, 0.068).at(9);
        let (e, d) = tuned_junctions(&cfg).unwrap();
        let s = (9.0 * PI * 0.068f64).cos().abs();
        assert_relative_eq!(s, 0.3447, max_relative = 1e-3);
        assert_relative_eq!(e, s * en.e_jsigma(), max_relative = 1e-14);
        assert_relative_eq!(d, 0.045, max_relative = 1e-12);
    }

    #[test]
    fn one_squid_without_squid_energy_is_fixed() {
        let a = one_squid(10e9, 0.0, 0.3).at(3);
        let fixed = FluxConfig {
            mode: FluxMode::Fixed,
            ..a
        };
        assert_eq!(
            tuned_junctions(&a).unwrap(),
            tuned_junctions(&fixed).unwrap()
        );
    }

    #[test]
    fn squid_tuned_through_zero_is_unphysical() {
        let cfg = FluxConfig {
            mode: FluxMode::BothSquids,
            ..one_squid(10e9, 10e9, 0.25)
        }
        .at(2);
        assert!(tuned_junctions(&cfg).unwrap().0 < 1e-3);
        let cfg = one_squid(1e9, 10e9, 0.25).at(4);
        assert!(matches!(
            tuned_junctions(&cfg),
            Err(FluxError::UnphysicalJunction { .. })
        ));
    }

    #[test]
    fn invalid_area_ratio() {
        assert!(tuned_junctions(&one_squid(1e9, 1e9, 0.0)).is_err());
        assert!(tuned_junctions(&one_squid(1e9, 1e9, 1.0)).is_err());
    }

    #[test]
    fn periodic_in_flux() {
        let cfg = one_squid(10e9, 6e9, 0.25);
        for n in -3..5 {
            let (e0, d0) = tuned_junctions(&cfg.at(n)).unwrap();
            let (e1, d1) = tuned_junctions(&cfg.at(n + 8)).unwrap();
            assert_relative_eq!(e0, e1, max_relative = 1e-12);
            assert_relative_eq!(d0, d1, epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_sweep() {
        let cfg = FluxConfig::from_energies(FluxMode::BothSquids, &table_one(), 0.05);
        let rows = sweep(
            &CircuitParams::table_one(),
            &cfg,
            &[],
            &CoherenceConfig::default(),
        )
        .unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn single_row_matches_pipeline() {
        let p = CircuitParams::table_one().with_asymmetry(0.045);
        let en = derive_energies(&p).unwrap();
        let cfg = FluxConfig::from_energies(FluxMode::BothSquids, &en, 0.05);
        let rows = sweep(&p, &cfg, &[0], &CoherenceConfig::default()).unwrap();
        let row = rows[0].row.as_ref().unwrap();
        let s = dressed_spectrum(&en).unwrap();
        assert_relative_eq!(row.omega_q_t, s.omega_q_t, max_relative = 1e-14);
        assert_relative_eq!(row.two_chi_total, s.two_chi_total, max_relative = 1e-14);
        assert_relative_eq!(row.delta, s.delta(), max_relative = 1e-14);
    }

    #[test]
    fn failed_rows_stay_in_place() {
        let cfg = FluxConfig::from_energies(FluxMode::BothSquids, &table_one(), 0.25);
        let rows = sweep(
            &CircuitParams::table_one(),
            &cfg,
            &[0, 2, 1],
            &CoherenceConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![0, 2, 1]);
        assert!(rows[0].row.is_ok());
        assert!(rows[1].row.is_err());
        assert!(rows[2].row.is_ok());
    }

    #[test]
    fn sweep_is_bit_identical() {
        let p = CircuitParams::table_one().with_asymmetry(0.045);
        let cfg =
            FluxConfig::from_energies(FluxMode::BothSquids, &derive_energies(&p).unwrap(), 0.04);
        let ns: Vec<i64> = (0..10).collect();
        let a = sweep(&p, &cfg, &ns, &CoherenceConfig::default()).unwrap();
        let b = sweep(&p, &cfg, &ns, &CoherenceConfig::default()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.row.as_ref().unwrap(), y.row.as_ref().unwrap());
        }
    }

    /// Bounded scan at 1e-4 resolution; independent of the bisection.
    fn scan_area_ratio(
        base: &ModeEnergies,
        cfg: &FluxConfig,
        n: i64,
        target: AnchorTarget,
        upper: f64,
    ) -> f64 {
        let goal = match target {
            AnchorTarget::QubitFrequency(v) | AnchorTarget::Asymmetry(v) => v,
        };
        let mut best = (f64::INFINITY, 0.0);
        let mut a = 1e-4;
        while a < upper {
            let trial = FluxConfig {
                area_ratio_a: a,
                n,
                ..*cfg
            };
            if let Ok(en) = energies_at(base, &trial) {
                let value = match target {
                    AnchorTarget::QubitFrequency(_) => {
                        dressed_spectrum(&en.with_asymmetry(0.0)).unwrap().omega_q_t
                    }
                    AnchorTarget::Asymmetry(_) => en.d_j,
                };
                if (value - goal).abs() < best.0 {
                    best = ((value - goal).abs(), a);
                }
            }
            a += 1e-4;
        }
        best.1
    }

    #[test]
    fn sample_a_area_ratio_matches_scan() {
        let base = table_one().with_asymmetry(0.045);
        let cfg = FluxConfig::from_energies(FluxMode::BothSquids, &base, 0.068);
        let target = AnchorTarget::QubitFrequency(4.281e9);
        let a = fit_area_ratio(&base, &cfg, 9, target).unwrap();
        let scanned = scan_area_ratio(&base, &cfg, 9, target, 0.5 / 9.0);
        assert!((a - scanned).abs() <= 1e-4, "{a} vs {scanned}");
        let s = dressed_spectrum(
            &energies_at(&base, &cfg.at(9).with_area(a))
                .unwrap()
                .with_asymmetry(0.0),
        )
        .unwrap();
        assert_relative_eq!(s.omega_q_t, 4.281e9, max_relative = 1e-9);
    }

    #[test]
    fn sample_b_calibration() {
        let base = table_one();
        let cfg = calibrate_one_squid(&base, 5.205e9, -0.30, 5, AnchorTarget::Asymmetry(-0.0152))
            .unwrap();
        let (_, d0) = tuned_junctions(&cfg).unwrap();
        assert_relative_eq!(d0, -0.30, max_relative = 1e-12);
        let en0 = energies_at(&base, &cfg).unwrap();
        assert_relative_eq!(
            dressed_spectrum(&en0.with_asymmetry(0.0))
                .unwrap()
                .omega_q_t,
            5.205e9,
            max_relative = 1e-9
        );
        let en5 = energies_at(&base, &cfg.at(5)).unwrap();
        assert!((en5.d_j + 0.0152).abs() < 1e-6);
        let f5 = dressed_spectrum(&en5.with_asymmetry(0.0))
            .unwrap()
            .omega_q_t;
        assert!((f5 / 4.288e9 - 1.0).abs() < 0.03, "{f5}");
        let scanned = scan_area_ratio(&base, &cfg, 5, AnchorTarget::Asymmetry(-0.0152), 0.2);
        assert!((cfg.area_ratio_a - scanned).abs() <= 1e-4);
    }

    impl FluxConfig {
        fn with_area(self, a: f64) -> Self {
            FluxConfig {
                area_ratio_a: a,
                ..self
            }
        }
    }
}
