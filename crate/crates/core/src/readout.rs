//! Dispersive single-shot readout: steady-state reflection off the pulled
//! resonator, shot generation with T1 decay during integration, and the
//! analysis chain (simultaneous bimodal fit, intersection threshold, error
//! decomposition).
//!
//! Frequencies and linewidths are ordinary frequencies in Hz. Resonator
//! pulling follows the `-2 chi n_q n_r` convention: the excited qubit moves
//! the resonator down by `two_chi`.

use nalgebra::{Matrix6, Vector6};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{PI, SQRT_2};
use std::fmt::Write as _;

use crate::error::ReadoutError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReadoutParams {
    /// Resonator frequency with the qubit in its ground state (Hz).
    pub omega_r: f64,
    pub two_chi: f64,
    pub kappa_ext: f64,
    pub kappa_int: f64,
    /// Mean intracavity photon number, averaged over the two qubit states.
    pub nbar: f64,
    /// Integration time (s).
    pub tau: f64,
    /// Qubit relaxation time (s); `inf` disables decay.
    pub t1: f64,
    pub readout_freq: f64,
    /// Probability that a shot prepared in 0 starts in 1.
    #[serde(default)]
    pub thermal_population: f64,
    /// Fraction of the output field that reaches the digitizer, set by the
    /// amplifier chain. Calibrated, not predicted.
    #[serde(default = "unit")]
    pub measurement_efficiency: f64,
}

fn unit() -> f64 {
    1.0
}

impl ReadoutParams {
    pub fn kappa(&self) -> f64 {
        self.kappa_ext + self.kappa_int
    }

    /// Midway between the two pulled resonator frequencies.
    pub fn midpoint_freq(&self) -> f64 {
        self.omega_r - 0.5 * self.two_chi
    }

    /// Pulled resonator frequency for qubit state `s`.
    pub fn pulled(&self, s: u8) -> f64 {
        self.omega_r - f64::from(s) * self.two_chi
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        ReadoutParams { tau, ..*self }
    }

    pub fn validate(&self) -> Result<(), ReadoutError> {
        let bad = |what: String| Err(ReadoutError::InvalidParams(what));
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !finite_pos(self.omega_r) || !finite_pos(self.readout_freq) {
            return bad(format!(
                "frequencies must be positive (omega_r = {}, readout_freq = {})",
                self.omega_r, self.readout_freq
            ));
        }
        if !(self.two_chi.is_finite() && self.two_chi >= 0.0) {
            return bad(format!(
                "two_chi must be non-negative, got {}",
                self.two_chi
            ));
        }
        if !(self.kappa_ext >= 0.0 && self.kappa_int >= 0.0 && finite_pos(self.kappa())) {
            return bad(format!(
                "linewidths must be non-negative with a positive sum (kappa_ext = {}, kappa_int = {})",
                self.kappa_ext, self.kappa_int
            ));
        }
        if !finite_pos(self.nbar) {
            return bad(format!("nbar must be positive, got {}", self.nbar));
        }
        if !finite_pos(self.tau) {
            return bad(format!("tau must be positive, got {}", self.tau));
        }
        if self.t1.is_nan() || self.t1 <= 0.0 {
            return bad(format!("t1 must be positive, got {}", self.t1));
        }
        if !(0.0..=1.0).contains(&self.thermal_population) {
            return bad(format!(
                "thermal_population must lie in [0, 1], got {}",
                self.thermal_population
            ));
        }
        if !(self.measurement_efficiency > 0.0 && self.measurement_efficiency <= 1.0) {
            return bad(format!(
                "measurement_efficiency must lie in (0, 1], got {}",
                self.measurement_efficiency
            ));
        }
        Ok(())
    }
}

/// One-port reflection off a resonator at `omega_r_pulled`.
pub fn reflection_coefficient(
    omega: f64,
    omega_r_pulled: f64,
    kappa_ext: f64,
    kappa_int: f64,
) -> Complex64 {
    let det = Complex64::new(0.0, omega - omega_r_pulled);
    (det + 0.5 * (kappa_int - kappa_ext)) / (det + 0.5 * (kappa_int + kappa_ext))
}

/// Phase (degrees) accumulated by S11 between the two pulled resonances when
/// probing midway, followed continuously through resonance.
///
/// Over-coupled resonators wrap the numerator's phase past ±180°, so the
/// separation exceeds the principal-branch gap. At exactly critical coupling
/// the numerator jumps by π and that jump is taken as the continuous value.
pub fn phase_separation(two_chi: f64, kappa_ext: f64, kappa_int: f64) -> Result<f64, ReadoutError> {
    if !(kappa_ext >= 0.0 && kappa_int >= 0.0 && kappa_ext + kappa_int > 0.0) {
        return Err(ReadoutError::InvalidParams(format!(
            "phase separation needs a positive linewidth (kappa_ext = {kappa_ext}, kappa_int = {kappa_int})"
        )));
    }
    if !(two_chi.is_finite() && two_chi >= 0.0) {
        return Err(ReadoutError::InvalidParams(format!(
            "two_chi must be non-negative, got {two_chi}"
        )));
    }
    let chi = 0.5 * two_chi;
    let a = 0.5 * (kappa_int - kappa_ext);
    let b = 0.5 * (kappa_int + kappa_ext);
    let num = if a < 0.0 {
        2.0 * chi.atan2(a) - 2.0 * PI
    } else if a > 0.0 {
        2.0 * chi.atan2(a)
    } else if chi > 0.0 {
        PI
    } else {
        0.0
    };
    let den = 2.0 * (chi / b).atan();
    Ok((num - den).abs().to_degrees())
}

/// Noiseless pointer positions of the two qubit states along the line joining
/// them, and the per-shot noise, in units of output amplitude over `sqrt(kappa_ext)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pointer {
    pub m0: f64,
    pub m1: f64,
    pub sigma: f64,
}

impl Pointer {
    pub fn snr(&self) -> f64 {
        (self.m1 - self.m0).abs() / (2.0 * self.sigma)
    }
}

/// Coherent-state pointer model with uniform integration weights.
///
/// The drive is set so the intracavity population averaged over the two qubit
/// states equals `nbar`; the noise is vacuum noise degraded by the measurement
/// efficiency.
pub fn pointer(p: &ReadoutParams) -> Result<Pointer, ReadoutError> {
    p.validate()?;
    if p.kappa_ext == 0.0 {
        return Err(ReadoutError::InvalidParams(
            "kappa_ext = 0: no signal leaves the resonator".into(),
        ));
    }
    let w = 2.0 * PI;
    let (ke, k) = (w * p.kappa_ext, w * p.kappa());
    let fill = |s: u8| {
        let d = w * (p.readout_freq - p.pulled(s));
        ke / (d * d + 0.25 * k * k)
    };
    let drive = (p.nbar / (0.5 * (fill(0) + fill(1)))).sqrt();
    let out = |s: u8| {
        reflection_coefficient(p.readout_freq, p.pulled(s), p.kappa_ext, p.kappa_int) * drive
            / ke.sqrt()
    };
    let (a0, a1) = (out(0), out(1));
    let sep = (a1 - a0).norm();
    let axis = if sep > 0.0 {
        (a1 - a0) / sep
    } else {
        Complex64::new(1.0, 0.0)
    };
    let proj = |a: Complex64| (a * axis.conj()).re;
    Ok(Pointer {
        m0: proj(a0),
        m1: proj(a1),
        sigma: 0.5 / (p.measurement_efficiency * ke * p.tau).sqrt(),
    })
}

/// Integrated, projected single-shot records for one prepared state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotSet {
    pub prepared_state: u8,
    pub values: Vec<f64>,
    /// Absent for imported measurement records.
    pub seed: Option<u64>,
    pub params: Option<ReadoutParams>,
}

fn shot_rng(seed: u64, prepared: u8, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8] = prepared;
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

fn one_shot(ptr: &Pointer, p: &ReadoutParams, prepared: u8, seed: u64, index: u64) -> f64 {
    let mut rng = shot_rng(seed, prepared, index);
    // fixed draw order per shot, whatever the branch
    let u_thermal: f64 = rng.random();
    let u_decay: f64 = rng.random();
    let z: f64 = rng.sample(StandardNormal);
    let excited = prepared == 1 || u_thermal < p.thermal_population;
    let mean = if excited {
        let t = -p.t1 * (-u_decay).ln_1p();
        if t < p.tau {
            (t * ptr.m1 + (p.tau - t) * ptr.m0) / p.tau
        } else {
            ptr.m1
        }
    } else {
        ptr.m0
    };
    mean + ptr.sigma * z
}

/// Generate `n_shots` records. Each shot has its own counter-keyed stream, so
/// the result does not depend on how the work is split across threads.
pub fn simulate_shots(
    p: &ReadoutParams,
    prepared: u8,
    n_shots: usize,
    seed: u64,
) -> Result<ShotSet, ReadoutError> {
    if prepared > 1 {
        return Err(ReadoutError::InvalidParams(format!(
            "prepared state must be 0 or 1, got {prepared}"
        )));
    }
    if n_shots == 0 {
        return Err(ReadoutError::InvalidParams(
            "n_shots must be at least 1".into(),
        ));
    }
    let ptr = pointer(p)?;
    let values = (0..n_shots as u64)
        .into_par_iter()
        .map(|i| one_shot(&ptr, p, prepared, seed, i))
        .collect();
    Ok(ShotSet {
        prepared_state: prepared,
        values,
        seed: Some(seed),
        params: Some(*p),
    })
}

const PARAM_KEYS: [&str; 10] = [
    "omega_r",
    "two_chi",
    "kappa_ext",
    "kappa_int",
    "nbar",
    "tau",
    "t1",
    "readout_freq",
    "thermal_population",
    "measurement_efficiency",
];

fn param_values(p: &ReadoutParams) -> [f64; 10] {
    [
        p.omega_r,
        p.two_chi,
        p.kappa_ext,
        p.kappa_int,
        p.nbar,
        p.tau,
        p.t1,
        p.readout_freq,
        p.thermal_population,
        p.measurement_efficiency,
    ]
}

impl ShotSet {
    pub fn from_values(prepared_state: u8, values: Vec<f64>) -> Self {
        ShotSet {
            prepared_state,
            values,
            seed: None,
            params: None,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `# key = value` metadata, a `value` header, then one record per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(24 * self.values.len() + 512);
        let _ = writeln!(s, "# prepared_state = {}", self.prepared_state);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed = {seed}");
        }
        if let Some(p) = &self.params {
            for (k, v) in PARAM_KEYS.iter().zip(param_values(p)) {
                let _ = writeln!(s, "# {k} = {v}");
            }
        }
        s.push_str("value\n");
        for v in &self.values {
            let _ = writeln!(s, "{v}");
        }
        s
    }

    /// Parse a shot file. Files without a `prepared_state` entry take
    /// `prepared`; a file that names a different state is rejected. Comment
    /// lines that are not `key = value` pairs are ignored.
    pub fn from_csv(text: &str, prepared: Option<u8>) -> Result<Self, ReadoutError> {
        let err = |line: usize, message: String| ReadoutError::Csv { line, message };
        let mut file_state = None;
        let mut seed = None;
        let mut fields: [Option<f64>; 10] = [None; 10];
        let mut header_seen = false;
        let mut values = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                if header_seen {
                    return Err(err(line_no, "metadata after the header row".into()));
                }
                let Some((k, v)) = meta.split_once('=') else {
                    continue;
                };
                let (k, v) = (k.trim(), v.trim());
                match k {
                    "prepared_state" => match v {
                        "0" => file_state = Some(0),
                        "1" => file_state = Some(1),
                        _ => {
                            return Err(err(
                                line_no,
                                format!("prepared_state must be 0 or 1, got `{v}`"),
                            ))
                        }
                    },
                    "seed" => {
                        seed = Some(
                            v.parse::<u64>()
                                .map_err(|e| err(line_no, format!("seed: {e}")))?,
                        )
                    }
                    _ => {
                        if let Some(j) = PARAM_KEYS.iter().position(|&p| p == k) {
                            fields[j] = Some(
                                v.parse::<f64>()
                                    .map_err(|e| err(line_no, format!("{k}: {e}")))?,
                            );
                        } else {
                            return Err(err(line_no, format!("unknown metadata key `{k}`")));
                        }
                    }
                }
                continue;
            }
            if !header_seen {
                if line != "value" {
                    return Err(err(
                        line_no,
                        format!("expected header `value`, got `{line}`"),
                    ));
                }
                header_seen = true;
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|e| err(line_no, format!("`{line}`: {e}")))?;
            if !v.is_finite() {
                return Err(err(line_no, format!("non-finite value `{line}`")));
            }
            values.push(v);
        }
        if !header_seen {
            return Err(err(0, "missing `value` header".into()));
        }
        let prepared_state = match (file_state, prepared) {
            (Some(f), Some(p)) if f != p => {
                return Err(err(
                    0,
                    format!("file holds state {f} but state {p} was expected"),
                ))
            }
            (Some(s), _) | (None, Some(s)) => s,
            (None, None) => return Err(err(0, "prepared_state not given".into())),
        };
        let params = if fields.iter().all(Option::is_none) {
            None
        } else if fields.iter().all(Option::is_some) {
            let f = fields.map(Option::unwrap);
            Some(ReadoutParams {
                omega_r: f[0],
                two_chi: f[1],
                kappa_ext: f[2],
                kappa_int: f[3],
                nbar: f[4],
                tau: f[5],
                t1: f[6],
                readout_freq: f[7],
                thermal_population: f[8],
                measurement_efficiency: f[9],
            })
        } else {
            let missing: Vec<_> = PARAM_KEYS
                .iter()
                .zip(&fields)
                .filter(|(_, f)| f.is_none())
                .map(|(k, _)| *k)
                .collect();
            return Err(err(
                0,
                format!(
                    "incomplete readout parameters, missing {}",
                    missing.join(", ")
                ),
            ));
        };
        Ok(ShotSet {
            prepared_state,
            values,
            seed,
            params,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixtureFit {
    pub mu0: f64,
    pub mu1: f64,
    pub sigma0: f64,
    pub sigma1: f64,
    pub a0: f64,
    pub a1: f64,
    /// L2 norm of the stacked density residuals.
    pub residual_norm: f64,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 500;
const STEP_TOL: f64 = 1e-8;
const COST_TOL: f64 = 1e-12;

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Upper tail of the standard normal.
fn q_tail(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let v = if x.len() > 1 {
        x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (m, v)
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Shared-edge histograms of both shot sets, normalized to densities.
struct Histograms {
    edges: Vec<f64>,
    dens0: Vec<f64>,
    dens1: Vec<f64>,
}

impl Histograms {
    fn new(pooled_sorted: &[f64], x0: &[f64], x1: &[f64]) -> Self {
        let n = pooled_sorted.len();
        let (lo, hi) = (pooled_sorted[0], pooled_sorted[n - 1]);
        let range = (hi - lo).max(f64::MIN_POSITIVE);
        let iqr = quantile(pooled_sorted, 0.75) - quantile(pooled_sorted, 0.25);
        let fd = 2.0 * iqr / (n as f64).cbrt();
        let width = if fd > 0.0 {
            fd
        } else {
            range / (n as f64).sqrt()
        };
        let bins = ((range / width).ceil() as usize).clamp(8, 2000);
        let w = range / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * w).collect();
        let density = |x: &[f64]| {
            let mut counts = vec![0.0; bins];
            for &v in x {
                let k = (((v - lo) / w) as usize).min(bins - 1);
                counts[k] += 1.0;
            }
            let norm = 1.0 / (x.len() as f64 * w);
            counts.into_iter().map(|c| c * norm).collect::<Vec<_>>()
        };
        Histograms {
            dens0: density(x0),
            dens1: density(x1),
            edges,
        }
    }

    fn bins(&self) -> usize {
        self.dens0.len()
    }
}

/// Parameter vector order: μ0, μ1, σ0, σ1, A0, A1.
type Params = Vector6<f64>;

/// Bin-averaged normal density and its derivatives in (μ, σ).
fn bin_terms(edges: &[f64], k: usize, mu: f64, sigma: f64) -> (f64, f64, f64) {
    let w = edges[k + 1] - edges[k];
    let (za, zb) = ((edges[k] - mu) / sigma, (edges[k + 1] - mu) / sigma);
    let (pa, pb) = (normal_pdf(za), normal_pdf(zb));
    let g = (normal_cdf(zb) - normal_cdf(za)) / w;
    let dmu = -(pb - pa) / (sigma * w);
    let dsigma = -(zb * pb - za * pa) / (sigma * w);
    (g, dmu, dsigma)
}

/// Residuals stacked as [state 0 bins, state 1 bins] and, optionally, the
/// normal-equation pieces `JᵀJ` and `Jᵀr`.
fn evaluate(h: &Histograms, p: &Params, with_jacobian: bool) -> (f64, Matrix6<f64>, Vector6<f64>) {
    let mut cost = 0.0;
    let mut jtj = Matrix6::zeros();
    let mut jtr = Vector6::zeros();
    for k in 0..h.bins() {
        let (g0, d0m, d0s) = bin_terms(&h.edges, k, p[0], p[2]);
        let (g1, d1m, d1s) = bin_terms(&h.edges, k, p[1], p[3]);
        let (a0, a1) = (p[4], p[5]);
        let r0 = a0 * g0 + (1.0 - a0) * g1 - h.dens0[k];
        let r1 = (1.0 - a1) * g0 + a1 * g1 - h.dens1[k];
        cost += r0 * r0 + r1 * r1;
        if with_jacobian {
            let j0 = Vector6::new(
                a0 * d0m,
                (1.0 - a0) * d1m,
                a0 * d0s,
                (1.0 - a0) * d1s,
                g0 - g1,
                0.0,
            );
            let j1 = Vector6::new(
                (1.0 - a1) * d0m,
                a1 * d1m,
                (1.0 - a1) * d0s,
                a1 * d1s,
                0.0,
                g1 - g0,
            );
            jtj += j0 * j0.transpose() + j1 * j1.transpose();
            jtr += j0 * r0 + j1 * r1;
        }
    }
    (cost, jtj, jtr)
}

fn project(mut p: Params) -> Params {
    p[4] = p[4].clamp(0.0, 1.0);
    p[5] = p[5].clamp(0.0, 1.0);
    p
}

/// Simultaneous least-squares fit of
/// `A0 N(μ0, σ0) + (1 - A0) N(μ1, σ1)` to the state-0 histogram and
/// `(1 - A1) N(μ0, σ0) + A1 N(μ1, σ1)` to the state-1 histogram.
///
/// Levenberg–Marquardt with Marquardt diagonal scaling; weights are kept in
/// [0, 1] by projection and steps that make a width non-positive are rejected.
pub fn fit_double_gaussian(
    shots0: &ShotSet,
    shots1: &ShotSet,
) -> Result<GaussianMixtureFit, ReadoutError> {
    let (x0, x1) = (&shots0.values, &shots1.values);
    if x0.len() < 2 || x1.len() < 2 {
        return Err(ReadoutError::DegenerateClusters);
    }
    let (m0, v0) = mean_var(x0);
    let (m1, v1) = mean_var(x1);
    if (m1 - m0).abs() <= 3.0 * (v0 / x0.len() as f64 + v1 / x1.len() as f64).sqrt() {
        return Err(ReadoutError::DegenerateClusters);
    }

    let mut pooled: Vec<f64> = x0.iter().chain(x1).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let hist = Histograms::new(&pooled, x0, x1);

    let (q25, q75) = (quantile(&pooled, 0.25), quantile(&pooled, 0.75));
    let (mu0, mu1) = if m0 <= m1 { (q25, q75) } else { (q75, q25) };
    let mid = 0.5 * (q25 + q75);
    let side_sd = |lower: bool| {
        let side: Vec<f64> = pooled
            .iter()
            .copied()
            .filter(|&v| (v < mid) == lower)
            .collect();
        if side.len() < 2 {
            (hi_lo_spread(&pooled)).max(f64::MIN_POSITIVE)
        } else {
            mean_var(&side).1.sqrt().max(f64::MIN_POSITIVE)
        }
    };
    let (s_low, s_high) = (side_sd(true), side_sd(false));
    let (s0, s1) = if m0 <= m1 {
        (s_low, s_high)
    } else {
        (s_high, s_low)
    };
    let mut p = Params::new(mu0, mu1, s0, s1, 0.95, 0.95);

    let (mut cost, mut jtj, mut jtr) = evaluate(&hist, &p, true);
    let mut lambda = 1e-3;
    for iter in 1..=MAX_ITERATIONS {
        // a weight pinned at a bound with the gradient pushing outward is held
        // fixed for this step; projecting a free step instead zig-zags
        let pinned = |i: usize| (p[i] <= 0.0 && jtr[i] > 0.0) || (p[i] >= 1.0 && jtr[i] < 0.0);
        let mut rhs = jtr;
        let mut accepted = None;
        while lambda < 1e16 {
            let mut lhs = jtj;
            let floor = 1e-12 * jtj.diagonal().max();
            for i in 0..6 {
                lhs[(i, i)] += lambda * jtj[(i, i)].max(floor);
            }
            for i in (4..6).filter(|&i| pinned(i)) {
                lhs.row_mut(i).fill(0.0);
                lhs.column_mut(i).fill(0.0);
                lhs[(i, i)] = 1.0;
                rhs[i] = 0.0;
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let trial = project(p - chol.solve(&rhs));
            if trial[2] <= 0.0 || trial[3] <= 0.0 || !trial.iter().all(|v| v.is_finite()) {
                lambda *= 4.0;
                continue;
            }
            let (c, _, _) = evaluate(&hist, &trial, false);
            if c < cost {
                lambda /= 3.0;
                accepted = Some((trial, c));
                break;
            }
            lambda *= 4.0;
        }
        // no downhill step at any damping: the minimum is reached
        let Some((trial, c)) = accepted else {
            return finish(&p, cost, iter);
        };
        let step = (trial - p).norm();
        let drop = cost - c;
        p = trial;
        (cost, jtj, jtr) = evaluate(&hist, &p, true);
        if step <= STEP_TOL * (p.norm() + STEP_TOL) || drop <= COST_TOL * c {
            return finish(&p, cost, iter);
        }
    }
    Err(ReadoutError::NonConvergence {
        iterations: MAX_ITERATIONS,
        residual: cost.sqrt(),
    })
}

fn hi_lo_spread(sorted: &[f64]) -> f64 {
    sorted[sorted.len() - 1] - sorted[0]
}

fn finish(p: &Params, cost: f64, iterations: usize) -> Result<GaussianMixtureFit, ReadoutError> {
    let fit = GaussianMixtureFit {
        mu0: p[0],
        mu1: p[1],
        sigma0: p[2],
        sigma1: p[3],
        a0: p[4],
        a1: p[5],
        residual_norm: cost.sqrt(),
        iterations,
    };
    if (fit.mu1 - fit.mu0).abs() <= 1e-9 * (fit.sigma0 + fit.sigma1) {
        return Err(ReadoutError::DegenerateClusters);
    }
    Ok(fit)
}

/// Crossing of the unit-weight normals `N(μ0, σ0)` and `N(μ1, σ1)` that lies
/// between the means.
pub fn threshold(fit: &GaussianMixtureFit) -> Result<f64, ReadoutError> {
    let (m0, m1, s0, s1) = (fit.mu0, fit.mu1, fit.sigma0, fit.sigma1);
    if m0 == m1 || !(s0 > 0.0 && s1 > 0.0) {
        return Err(ReadoutError::NoThresholdRoot);
    }
    if s0 == s1 {
        return Ok(0.5 * (m0 + m1));
    }
    // (x-m0)²/s0² - (x-m1)²/s1² + 2 ln(s0/s1) = 0
    let (w0, w1) = (1.0 / (s0 * s0), 1.0 / (s1 * s1));
    let a = w0 - w1;
    let b = -2.0 * (m0 * w0 - m1 * w1);
    let c = m0 * m0 * w0 - m1 * m1 * w1 + 2.0 * (s0 / s1).ln();
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(ReadoutError::NoThresholdRoot);
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (lo, hi) = (m0.min(m1), m0.max(m1));
    let mut roots = [q / a, if q != 0.0 { c / q } else { f64::NAN }];
    roots.sort_by(f64::total_cmp);
    roots
        .into_iter()
        .find(|&x| x > lo && x < hi)
        .ok_or(ReadoutError::NoThresholdRoot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub threshold: f64,
    /// P(0|1): prepared 1, assigned 0.
    pub p01: f64,
    /// P(1|0).
    pub p10: f64,
    pub fidelity: f64,
    /// Overlap error of the fitted single Gaussians across the threshold.
    pub eps_id: f64,
    pub eps_01: f64,
    pub eps_10: f64,
    /// Too few shots for the statistics to mean anything.
    pub degenerate: bool,
}

fn assignment_errors(shots0: &ShotSet, shots1: &ShotSet, thr: f64, one_above: bool) -> (f64, f64) {
    let says_one = |v: f64| if one_above { v > thr } else { v < thr };
    let frac = |s: &ShotSet, want_one: bool| {
        if s.is_empty() {
            return 0.0;
        }
        s.values
            .iter()
            .filter(|&&v| says_one(v) == want_one)
            .count() as f64
            / s.len() as f64
    };
    (frac(shots1, false), frac(shots0, true))
}

/// Empirical assignment errors at `thr` plus their split into Gaussian
/// overlap and residual (preparation, mixing, decay) parts.
pub fn fidelity_report(
    shots0: &ShotSet,
    shots1: &ShotSet,
    fit: &GaussianMixtureFit,
    thr: f64,
) -> FidelityReport {
    let one_above = fit.mu1 > fit.mu0;
    let (p01, p10) = assignment_errors(shots0, shots1, thr, one_above);
    let tail0 = q_tail((thr - fit.mu0).abs() / fit.sigma0);
    let tail1 = q_tail((fit.mu1 - thr).abs() / fit.sigma1);
    let fidelity = 1.0 - 0.5 * (p01 + p10);
    debug_assert_eq!(fidelity, 1.0 - (p01 + p10) / 2.0);
    FidelityReport {
        threshold: thr,
        p01,
        p10,
        fidelity,
        eps_id: tail0 + tail1,
        eps_01: (p01 - tail1).max(0.0),
        eps_10: (p10 - tail0).max(0.0),
        degenerate: shots0.len() < 2 || shots1.len() < 2,
    }
}

/// Fit, threshold and report in one call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub fit: GaussianMixtureFit,
    pub report: FidelityReport,
}

pub fn analyze(shots0: &ShotSet, shots1: &ShotSet) -> Result<Analysis, ReadoutError> {
    let fit = fit_double_gaussian(shots0, shots1)?;
    let thr = threshold(&fit)?;
    Ok(Analysis {
        fit,
        report: fidelity_report(shots0, shots1, &fit, thr),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationRow {
    pub tau: f64,
    pub fidelity: f64,
    pub eps_id: f64,
    pub eps_01: f64,
    pub eps_10: f64,
    pub degenerate: bool,
}

/// Report without a usable fit: threshold midway between the sample means,
/// empirical errors only.
fn fallback_row(tau: f64, shots0: &ShotSet, shots1: &ShotSet) -> IntegrationRow {
    let mean = |s: &ShotSet| s.values.iter().sum::<f64>() / s.len() as f64;
    let (m0, m1) = (mean(shots0), mean(shots1));
    let (p01, p10) = assignment_errors(shots0, shots1, 0.5 * (m0 + m1), m1 > m0);
    IntegrationRow {
        tau,
        fidelity: 1.0 - 0.5 * (p01 + p10),
        eps_id: f64::NAN,
        eps_01: f64::NAN,
        eps_10: f64::NAN,
        degenerate: true,
    }
}

/// Simulate and analyze at every integration time. All rows share `seed`, so
/// neighbouring rows differ by the integration time rather than by sampling
/// noise. Rows whose fit fails are kept and flagged degenerate.
pub fn error_vs_integration(
    p: &ReadoutParams,
    tau_list: &[f64],
    n_shots: usize,
    seed: u64,
) -> Result<Vec<IntegrationRow>, ReadoutError> {
    p.validate()?;
    tau_list
        .par_iter()
        .map(|&tau| {
            let q = p.with_tau(tau);
            let s0 = simulate_shots(&q, 0, n_shots, seed)?;
            let s1 = simulate_shots(&q, 1, n_shots, seed)?;
            Ok(match analyze(&s0, &s1) {
                Ok(a) => IntegrationRow {
                    tau,
                    fidelity: a.report.fidelity,
                    eps_id: a.report.eps_id,
                    eps_01: a.report.eps_01,
                    eps_10: a.report.eps_10,
                    degenerate: a.report.degenerate,
                },
                Err(_) => fallback_row(tau, &s0, &s1),
            })
        })
        .collect()
}
