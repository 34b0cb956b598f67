//! Dispersive shift against detuning while two identical SQUIDs tune the
//! qubit down in integer flux steps.
//!
//! cargo run --example chi_sweep

use quantromon::coherence::CoherenceConfig;
use quantromon::flux::{fit_area_ratio, sweep_energies, AnchorTarget, FluxConfig, FluxMode};
use quantromon::params::{derive_energies, CircuitParams};

fn main() -> quantromon::Result<()> {
    let base = derive_energies(&CircuitParams::table_one().with_asymmetry(0.045))?;
    let mut flux = FluxConfig::from_energies(FluxMode::BothSquids, &base, 0.5);
    // pin the area ratio to the qubit frequency measured nine quanta out
    flux.area_ratio_a = fit_area_ratio(&base, &flux, 9, AnchorTarget::QubitFrequency(4.281e9))?;
    println!("area ratio a = {:.5}", flux.area_ratio_a);

    let n_list: Vec<i64> = (0..=9).collect();
    println!(
        "{:>2} {:>10} {:>10} {:>10} {:>10}",
        "n", "f_q GHz", "delta GHz", "2chi MHz", "2chi~ MHz"
    );
    for out in sweep_energies(&base, &flux, &n_list, &CoherenceConfig::default()) {
        let r = out.row?;
        println!(
            "{:>2} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            r.n,
            r.omega_q_t / 1e9,
            r.delta / 1e9,
            r.two_chi / 1e6,
            r.two_chi_total / 1e6
        );
    }
    Ok(())
}
