//! T1 budget per operating point, and the Purcell limit a transversely
//! coupled transmon would have at the same dispersive shift.
//!
//! cargo run --example t1_model

use quantromon::coherence::CoherenceConfig;
use quantromon::flux::{fit_area_ratio, sweep_energies, AnchorTarget, FluxConfig, FluxMode};
use quantromon::params::{derive_energies, CircuitParams};

fn main() -> quantromon::Result<()> {
    let base = derive_energies(&CircuitParams::table_one().with_asymmetry(0.045))?;
    let mut flux = FluxConfig::from_energies(FluxMode::BothSquids, &base, 0.5);
    flux.area_ratio_a = fit_area_ratio(&base, &flux, 9, AnchorTarget::QubitFrequency(4.281e9))?;
    let coherence = CoherenceConfig {
        q_diel: 1.1e6,
        kappa: 1.28e6,
    };

    println!(
        "{:>2} {:>9} {:>10} {:>12} {:>10} {:>14}",
        "n", "f_q GHz", "T1_diel us", "T1_asymm us", "T1 us", "transmon us"
    );
    let n_list: Vec<i64> = (0..=9).collect();
    for out in sweep_energies(&base, &flux, &n_list, &coherence) {
        let r = out.row?;
        println!(
            "{:>2} {:>9.4} {:>10.2} {:>12.1} {:>10.2} {:>14.2}",
            r.n,
            r.omega_q_t / 1e9,
            r.t1_diel * 1e6,
            r.t1_asymm * 1e6,
            r.t1_model * 1e6,
            r.t1_transmon_purcell * 1e6
        );
    }
    Ok(())
}
