//! Exact diagonalization of the truncated quartic two-mode Hamiltonian.
//!
//! Each mode is represented in the Fock basis of its own quadratic part, so
//! with the nonlinear terms switched off the spectrum is exactly harmonic.
//! The zero-point energy of that quadratic part is dropped along with the
//! `-E_JΣ` constant.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::analytic::{bare_modes, Source, SpectrumResult};
use crate::error::NumericError;
use crate::params::ModeEnergies;

pub const MIN_LEVELS: usize = 4;

/// Number of Fock levels kept per mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub n_q: usize,
    pub n_r: usize,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { n_q: 12, n_r: 12 }
    }
}

impl Truncation {
    pub fn new(n_q: usize, n_r: usize) -> Result<Self, NumericError> {
        let t = Truncation { n_q, n_r };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<(), NumericError> {
        if self.n_q < MIN_LEVELS || self.n_r < MIN_LEVELS {
            return Err(NumericError::TruncationTooSmall {
                n_q: self.n_q,
                n_r: self.n_r,
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.n_q * self.n_r
    }

    pub fn index(&self, i_q: usize, i_r: usize) -> usize {
        i_q * self.n_r + i_r
    }

    pub fn label(&self, index: usize) -> (usize, usize) {
        (index / self.n_r, index % self.n_r)
    }
}

/// Which groups of terms enter the Hamiltonian; all on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Terms {
    pub self_quartic: bool,
    pub cross_kerr: bool,
    pub asymmetry: bool,
}

impl Default for Terms {
    fn default() -> Self {
        Terms {
            self_quartic: true,
            cross_kerr: true,
            asymmetry: true,
        }
    }
}

impl Terms {
    pub fn harmonic() -> Self {
        Terms {
            self_quartic: false,
            cross_kerr: false,
            asymmetry: false,
        }
    }
}

/// Dense real symmetric Hamiltonian in Hz over the product Fock basis.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub trunc: Truncation,
    pub entries: DMatrix<f64>,
    /// Matrix element of the asymmetry coupling between single excitations.
    pub transverse_coupling: f64,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.trunc.dim()
    }

    /// Largest |H_ij - H_ji| relative to the largest entry.
    pub fn max_asymmetry(&self) -> f64 {
        let scale = self.entries.amax();
        let diff = (&self.entries - self.entries.transpose()).amax();
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

/// Operators of one mode with `H0 = 4 E_C n² + (E_L/2) φ²`.
struct ModeOps {
    phi: DMatrix<f64>,
    phi2: DMatrix<f64>,
    phi4: DMatrix<f64>,
    n2: DMatrix<f64>,
}

impl ModeOps {
    fn new(levels: usize, e_c: f64, e_l: f64) -> Self {
        // build with headroom so the truncated powers carry exact matrix elements
        let big = levels + 4;
        let xi = (2.0 * e_c / e_l).powf(0.25);
        let nu = 0.5 * (e_l / (2.0 * e_c)).powf(0.25);
        let mut lower = DMatrix::<f64>::zeros(big, big);
        for k in 1..big {
            lower[(k - 1, k)] = (k as f64).sqrt();
        }
        let raise = lower.transpose();
        let phi = (&lower + &raise) * xi;
        // n = i nu (a† - a); n² = -nu² (a† - a)²
        let skew = &raise - &lower;
        let n2 = -(&skew * &skew) * (nu * nu);
        let phi2 = &phi * &phi;
        let phi4 = &phi2 * &phi2;
        let cut = |m: &DMatrix<f64>| m.view((0, 0), (levels, levels)).into_owned();
        ModeOps {
            phi: cut(&phi),
            phi2: cut(&phi2),
            phi4: cut(&phi4),
            n2: cut(&n2),
        }
    }
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn check_energy(name: &'static str, value: f64) -> Result<(), NumericError> {
    // beyond ~1e18 Hz the matrix entries lose the MHz-scale shifts entirely
    if !value.is_finite() || value.abs() > 1e18 {
        return Err(NumericError::EnergyScale { name, value });
    }
    Ok(())
}

pub fn build_hamiltonian(
    en: &ModeEnergies,
    trunc: Truncation,
) -> Result<HamiltonianMatrix, NumericError> {
    build_hamiltonian_with(en, trunc, Terms::default())
}

/// Assemble
/// `4E_CQ n_q² + E_JQ/2 φ_q² - E_JΣ/24 φ_q⁴ + 4E_CR n_r² + E_JR/2 φ_r²
///  - b⁴/384 E_JΣ φ_r⁴ - b²/16 E_JΣ φ_q² φ_r² - d_j b/2 E_JΣ φ_q φ_r`.
pub fn build_hamiltonian_with(
    en: &ModeEnergies,
    trunc: Truncation,
    terms: Terms,
) -> Result<HamiltonianMatrix, NumericError> {
    trunc.check()?;
    for (name, value) in [
        ("e_cq", en.e_cq),
        ("e_cr", en.e_cr),
        ("e_jq", en.e_jq),
        ("e_jr", en.e_jr),
    ] {
        check_energy(name, value)?;
        if value <= 0.0 {
            return Err(NumericError::EnergyScale { name, value });
        }
    }
    let e_jsigma = en.e_jsigma();
    let b = en.b;
    let q = ModeOps::new(trunc.n_q, en.e_cq, en.e_jq);
    let r = ModeOps::new(trunc.n_r, en.e_cr, en.e_jr);
    let id_q = DMatrix::<f64>::identity(trunc.n_q, trunc.n_q);
    let id_r = DMatrix::<f64>::identity(trunc.n_r, trunc.n_r);

    let mut h_q = &q.n2 * (4.0 * en.e_cq) + &q.phi2 * (0.5 * en.e_jq);
    let mut h_r = &r.n2 * (4.0 * en.e_cr) + &r.phi2 * (0.5 * en.e_jr);
    if terms.self_quartic {
        h_q -= &q.phi4 * (e_jsigma / 24.0);
        h_r -= &r.phi4 * (b.powi(4) / 384.0 * e_jsigma);
    }
    let bare = bare_modes(en);
    h_q -= &id_q * (0.5 * bare.omega_q);
    h_r -= &id_r * (0.5 * bare.omega_r);

    let mut h = kron(&h_q, &id_r) + kron(&id_q, &h_r);
    if terms.cross_kerr && b != 0.0 {
        h -= kron(&q.phi2, &r.phi2) * (b * b / 16.0 * e_jsigma);
    }
    let mut transverse = 0.0;
    if terms.asymmetry && en.d_j != 0.0 && b != 0.0 {
        let coeff = en.d_j * 0.5 * b * e_jsigma;
        h -= kron(&q.phi, &r.phi) * coeff;
        transverse = -coeff * q.phi[(0, 1)] * r.phi[(0, 1)];
    }
    let entries = (&h + h.transpose()) * 0.5;
    Ok(HamiltonianMatrix {
        trunc,
        entries,
        transverse_coupling: transverse,
    })
}

/// Eigenvalues ascending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub const RESIDUAL_TOL: f64 = 1e-8;

pub fn eigensolve(h: &DMatrix<f64>) -> Result<Eigenpairs, NumericError> {
    let n = h.nrows();
    let norm = h.norm();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 10_000).ok_or(
        NumericError::Convergence {
            residual: f64::INFINITY,
            bound: RESIDUAL_TOL * norm,
        },
    )?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    let bound = RESIDUAL_TOL * norm.max(f64::MIN_POSITIVE);
    let hv = h * &vectors;
    for (k, &lambda) in values.iter().enumerate() {
        let residual = (hv.column(k) - vectors.column(k) * lambda).norm();
        if residual > bound {
            return Err(NumericError::Convergence { residual, bound });
        }
    }
    Ok(Eigenpairs { values, vectors })
}

/// Dressed levels with m_q <= 2 and m_r <= 1.
pub const REQUIRED_LABELS: [(usize, usize); 6] = [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LabeledLevel {
    pub energy: f64,
    /// |<bare|dressed>|²
    pub overlap: f64,
    pub eigen_index: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LabeledSpectrum {
    pub levels: BTreeMap<(usize, usize), LabeledLevel>,
    pub transverse_coupling: f64,
}

impl LabeledSpectrum {
    pub fn energy(&self, m_q: usize, m_r: usize) -> Option<f64> {
        self.levels.get(&(m_q, m_r)).map(|l| l.energy)
    }
}

/// Acceptance thresholds for dressed-state labels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelPolicy {
    pub min_overlap: f64,
    /// Required gap between the best and runner-up eigenvector overlap.
    /// Two resonant bare states mix 50/50 and each still clears 0.5, so the
    /// overlap floor alone never flags them.
    pub min_margin: f64,
}

impl Default for LabelPolicy {
    fn default() -> Self {
        LabelPolicy {
            min_overlap: 0.5,
            min_margin: 0.2,
        }
    }
}

const TIE: f64 = 1e-9;

pub fn label_states(
    pairs: &Eigenpairs,
    trunc: Truncation,
    transverse_coupling: f64,
) -> Result<LabeledSpectrum, NumericError> {
    label_states_with(pairs, trunc, transverse_coupling, LabelPolicy::default())
}

/// Greedy assignment of bare labels to eigenvectors by descending overlap.
pub fn label_states_with(
    pairs: &Eigenpairs,
    trunc: Truncation,
    transverse_coupling: f64,
    policy: LabelPolicy,
) -> Result<LabeledSpectrum, NumericError> {
    let dim = pairs.values.len();
    let mut candidates: Vec<((usize, usize), usize, f64)> = Vec::new();
    let mut margins = BTreeMap::new();
    for &label in REQUIRED_LABELS.iter() {
        let row = trunc.index(label.0, label.1);
        let mut best = 0.0f64;
        let mut second = 0.0f64;
        for j in 0..dim {
            let ov = pairs.vectors[(row, j)].powi(2);
            candidates.push((label, j, ov));
            if ov > best {
                second = best;
                best = ov;
            } else if ov > second {
                second = ov;
            }
        }
        margins.insert(label, best - second);
    }
    candidates.sort_by(|a, b| {
        if (a.2 - b.2).abs() < TIE {
            a.1.cmp(&b.1)
        } else {
            b.2.total_cmp(&a.2)
        }
    });
    let mut levels = BTreeMap::new();
    let mut taken = vec![false; dim];
    for (label, j, ov) in candidates {
        if levels.contains_key(&label) || taken[j] {
            continue;
        }
        taken[j] = true;
        levels.insert(
            label,
            LabeledLevel {
                energy: pairs.values[j],
                overlap: ov,
                eigen_index: j,
            },
        );
        if levels.len() == REQUIRED_LABELS.len() {
            break;
        }
    }
    for &label in REQUIRED_LABELS.iter() {
        let level = levels[&label];
        let margin = margins[&label];
        if level.overlap < policy.min_overlap || margin < policy.min_margin {
            return Err(NumericError::AmbiguousLabeling {
                m_q: label.0,
                m_r: label.1,
                overlap: level.overlap,
                margin,
            });
        }
    }
    Ok(LabeledSpectrum {
        levels,
        transverse_coupling,
    })
}

/// Observables from dressed level differences; `two_chi` here includes every
/// coupling channel present in the Hamiltonian.
pub fn extract_observables(ls: &LabeledSpectrum) -> Result<SpectrumResult, NumericError> {
    let get = |m_q: usize, m_r: usize| {
        ls.energy(m_q, m_r).ok_or(NumericError::AmbiguousLabeling {
            m_q,
            m_r,
            overlap: 0.0,
            margin: 0.0,
        })
    };
    let e00 = get(0, 0)?;
    let e10 = get(1, 0)?;
    let e20 = get(2, 0)?;
    let e01 = get(0, 1)?;
    let e11 = get(1, 1)?;
    let omega_q_t = e10 - e00;
    let omega_r_t = e01 - e00;
    let alpha_q = omega_q_t - (e20 - e10);
    let two_chi = e10 + e01 - e11 - e00;
    Ok(SpectrumResult {
        omega_q_t,
        omega_r_t,
        alpha_q,
        two_chi,
        g_asymm: ls.transverse_coupling,
        two_chi_total: two_chi,
        source: Source::Numeric,
    })
}

/// Build, diagonalize, label and extract in one call.
pub fn numeric_spectrum(
    en: &ModeEnergies,
    trunc: Truncation,
) -> Result<SpectrumResult, NumericError> {
    let h = build_hamiltonian(en, trunc)?;
    let pairs = eigensolve(&h.entries)?;
    let ls = label_states(&pairs, trunc, h.transverse_coupling)?;
    extract_observables(&ls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{self, dressed_spectrum};
    use crate::params::{derive_energies, CircuitParams};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn table_one() -> ModeEnergies {
        derive_energies(&CircuitParams::table_one()).unwrap()
    }

    #[test]
    fn truncation_minimum() {
        assert!(Truncation::new(3, 10).is_err());
        assert!(build_hamiltonian(&table_one(), Truncation { n_q: 4, n_r: 2 }).is_err());
        let t = Truncation::new(5, 7).unwrap();
        for k in 0..t.dim() {
            let (a, b) = t.label(k);
            assert_eq!(t.index(a, b), k);
        }
    }

    #[test]
    fn rejects_overflow_energies() {
        let mut en = table_one();
        en.e_jr = f64::INFINITY;
        assert!(matches!(
            build_hamiltonian(&en, Truncation::default()),
            Err(NumericError::EnergyScale { .. })
        ));
    }

    #[test]
    fn uncoupled_when_b_zero() {
        let en = table_one().with_b(0.0);
        let t = Truncation::new(6, 5).unwrap();
        let h = build_hamiltonian(&en, t).unwrap();
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                let (qi, ri) = t.label(i);
                let (qj, rj) = t.label(j);
                if qi != qj && ri != rj {
                    assert_eq!(h.entries[(i, j)], 0.0);
                }
            }
        }
        // the qubit keeps its own quartic term, so only the resonator factor is exact
        let pairs = eigensolve(&h.entries).unwrap();
        let ls = label_states(&pairs, t, 0.0).unwrap();
        for level in ls.levels.values() {
            assert!(level.overlap > 0.99);
        }
        let h = build_hamiltonian_with(&en, t, Terms::harmonic()).unwrap();
        let pairs = eigensolve(&h.entries).unwrap();
        let ls = label_states(&pairs, t, 0.0).unwrap();
        for level in ls.levels.values() {
            assert_relative_eq!(level.overlap, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn harmonic_limit_is_exact() {
        let en = table_one();
        let t = Truncation::new(6, 6).unwrap();
        let h = build_hamiltonian_with(&en, t, Terms::harmonic()).unwrap();
        let bare = bare_modes(&en);
        let pairs = eigensolve(&h.entries).unwrap();
        let mut expected: Vec<f64> = (0..t.n_q)
            .flat_map(|m| (0..t.n_r).map(move |k| (m, k)))
            .map(|(m, k)| m as f64 * bare.omega_q + k as f64 * bare.omega_r)
            .collect();
        expected.sort_by(f64::total_cmp);
        for (got, want) in pairs.values.iter().zip(&expected) {
            assert!(
                (got - want).abs() < 1e-9 * bare.omega_q * 10.0,
                "{got} vs {want}"
            );
        }
        let ls = label_states(&pairs, t, 0.0).unwrap();
        let s = extract_observables(&ls).unwrap();
        assert!(s.alpha_q.abs() < 1e-4);
        assert!(s.two_chi.abs() < 1e-4);
    }

    #[test]
    fn symmetric_to_tolerance() {
        let en = table_one().with_asymmetry(0.045);
        let h = build_hamiltonian(&en, Truncation::default()).unwrap();
        assert!(h.max_asymmetry() <= 1e-9);
    }

    #[test]
    fn resonator_parity_blocks_vanish_without_asymmetry() {
        let en = table_one();
        let t = Truncation::new(8, 8).unwrap();
        let h = build_hamiltonian(&en, t).unwrap();
        for i in 0..t.dim() {
            for j in 0..t.dim() {
                let (qi, ri) = t.label(i);
                let (qj, rj) = t.label(j);
                if (ri + rj) % 2 == 1 || (qi + qj) % 2 == 1 {
                    assert_eq!(h.entries[(i, j)], 0.0, "({qi},{ri}) ({qj},{rj})");
                }
            }
        }
    }

    #[test]
    fn eigensolve_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = eigensolve(&m).unwrap();
        assert_relative_eq!(p.values[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(p.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigensolve_diagonal() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, -1.0, 2.0]));
        let p = eigensolve(&m).unwrap();
        assert_eq!(p.values, vec![-1.0, 2.0, 3.0]);
        for k in 0..3 {
            assert_relative_eq!(p.vectors.column(k).amax(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn eigensolve_random_reconstruction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = DMatrix::<f64>::from_fn(20, 20, |_, _| rng.random_range(-1.0..1.0));
        let h = (&a + a.transpose()) * 0.5;
        let p = eigensolve(&h).unwrap();
        let lambda = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(p.values.clone()));
        let recon = &p.vectors * lambda * p.vectors.transpose();
        assert!((recon - &h).norm() <= 1e-8 * h.norm());
        let gram = p.vectors.transpose() * &p.vectors;
        assert!((gram - DMatrix::<f64>::identity(20, 20)).amax() <= 1e-8);
        assert!(p.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn table_one_labels_are_clean() {
        let en = table_one();
        let t = Truncation::default();
        let h = build_hamiltonian(&en, t).unwrap();
        let pairs = eigensolve(&h.entries).unwrap();
        let ls = label_states(&pairs, t, h.transverse_coupling).unwrap();
        for level in ls.levels.values() {
            assert!(level.overlap > 0.9, "{level:?}");
        }
    }

    #[test]
    fn numeric_matches_analytic_shift() {
        let en = table_one();
        let ana = dressed_spectrum(&en).unwrap();
        let num = numeric_spectrum(&en, Truncation::default()).unwrap();
        assert!(((num.two_chi - ana.two_chi) / num.two_chi).abs() < 0.10);
        assert_eq!(num.source, Source::Numeric);
        let num10 = numeric_spectrum(&en, Truncation::new(10, 10).unwrap()).unwrap();
        let num14 = numeric_spectrum(&en, Truncation::new(14, 14).unwrap()).unwrap();
        for (a, b) in [
            (num10.two_chi, num14.two_chi),
            (num10.omega_q_t, num14.omega_q_t),
            (num10.alpha_q, num14.alpha_q),
        ] {
            assert!(((a - b) / b).abs() < 0.01);
        }
    }

    #[test]
    fn asymmetry_adds_to_numeric_shift() {
        let en = table_one();
        let sym = numeric_spectrum(&en, Truncation::default()).unwrap();
        let asym = numeric_spectrum(&en.with_asymmetry(0.045), Truncation::default()).unwrap();
        assert!(asym.two_chi > sym.two_chi);
        // transverse matrix element equals -d sqrt(2 chi E_JΣ) of the closed form
        let chi = 0.5 * analytic::two_chi(&en);
        assert_relative_eq!(
            asym.g_asymm,
            -0.045 * (2.0 * chi * en.e_jsigma()).sqrt(),
            max_relative = 1e-12
        );
        // and the dispersive correction follows the Δ(Δ-α) form within a few percent
        let ana = dressed_spectrum(&en.with_asymmetry(0.045)).unwrap();
        let ratio_num = asym.two_chi / sym.two_chi;
        let ratio_ana = ana.two_chi_total / ana.two_chi;
        assert!(
            (ratio_num - ratio_ana).abs() < 0.03,
            "{ratio_num} vs {ratio_ana}"
        );
    }

    #[test]
    fn zero_b_numeric_shift_vanishes() {
        let s = numeric_spectrum(&table_one().with_b(0.0), Truncation::default()).unwrap();
        assert!(s.two_chi.abs() < 1e3);
    }

    #[test]
    fn resonance_is_ambiguous() {
        // retune E_JΣ until the dressed qubit sits on the resonator
        let base = table_one().with_asymmetry(0.045);
        let t = Truncation::new(8, 8).unwrap();
        let detuning = |e_js: f64| {
            let en = base.with_junctions(e_js, 0.045);
            let h = build_hamiltonian_with(
                &en,
                t,
                Terms {
                    asymmetry: false,
                    ..Terms::default()
                },
            )
            .unwrap();
            let p = eigensolve(&h.entries).unwrap();
            let ls = label_states(&p, t, 0.0).unwrap();
            let s = extract_observables(&ls).unwrap();
            s.omega_q_t - s.omega_r_t
        };
        let (mut lo, mut hi) = (base.e_jsigma(), 1.5 * base.e_jsigma());
        assert!(detuning(lo) < 0.0 && detuning(hi) > 0.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if detuning(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let en = base.with_junctions(0.5 * (lo + hi), 0.045);
        let h = build_hamiltonian(&en, t).unwrap();
        let p = eigensolve(&h.entries).unwrap();
        let err = label_states(&p, t, h.transverse_coupling).unwrap_err();
        assert!(
            matches!(err, NumericError::AmbiguousLabeling { .. }),
            "{err:?}"
        );
    }
}
