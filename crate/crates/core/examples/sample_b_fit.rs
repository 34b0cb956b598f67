//! Single-SQUID device: calibrate the junction energies from the zero-flux
//! qubit frequency and asymmetry, fit the SQUID area ratio to the asymmetry
//! extracted at five quanta, then follow asymmetry and T1 over flux.
//!
//! cargo run --example sample_b_fit

use quantromon::coherence::CoherenceConfig;
use quantromon::flux::{calibrate_one_squid, sweep_energies, AnchorTarget};
use quantromon::params::{derive_energies, CircuitParams};

fn main() -> quantromon::Result<()> {
    let base = derive_energies(&CircuitParams::table_one())?;
    let flux = calibrate_one_squid(&base, 5.205e9, -0.30, 5, AnchorTarget::Asymmetry(-0.0152))?;
    println!(
        "E_J1 = {:.3} GHz, E_J2 = {:.3} GHz, a = {:.5}",
        flux.e_j1_zero / 1e9,
        flux.e_j2_zero / 1e9,
        flux.area_ratio_a
    );

    let coherence = CoherenceConfig {
        q_diel: 1.61e6,
        kappa: 25.6e6,
    };
    let n_list: Vec<i64> = (0..=7).collect();
    println!(
        "{:>2} {:>9} {:>8} {:>11} {:>12} {:>8}",
        "n", "f_q GHz", "d_j %", "g MHz", "T1_asymm us", "T1 us"
    );
    for out in sweep_energies(&base, &flux, &n_list, &coherence) {
        match out.row {
            Ok(r) => println!(
                "{:>2} {:>9.4} {:>8.2} {:>11.3} {:>12.1} {:>8.2}",
                r.n,
                r.omega_q_t / 1e9,
                100.0 * r.d_j,
                r.g_asymm / 1e6,
                r.t1_asymm * 1e6,
                r.t1_model * 1e6
            ),
            Err(e) => println!("{:>2} {e}", out.n),
        }
    }
    Ok(())
}
