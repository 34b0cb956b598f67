//! Simulated single-shot readout: histograms for both prepared states, the
//! simultaneous double-Gaussian fit, and the error split against
//! integration time.
//!
//! cargo run --release --example readout_sim

use quantromon::readout::{analyze, error_vs_integration, pointer, simulate_shots, ReadoutParams};

fn main() -> quantromon::Result<()> {
    let p = ReadoutParams {
        omega_r: 7.5e9,
        two_chi: 1.37e6,
        kappa_ext: 0.90e6,
        kappa_int: 0.38e6,
        nbar: 30.0,
        tau: 1.8e-6,
        t1: 37e-6,
        readout_freq: 7.5e9 - 0.685e6,
        thermal_population: 0.006,
        measurement_efficiency: 0.0135,
    };
    let ptr = pointer(&p)?;
    println!(
        "pointer m0 {:.3}  m1 {:.3}  sigma {:.3}  SNR {:.2}",
        ptr.m0,
        ptr.m1,
        ptr.sigma,
        ptr.snr()
    );

    let s0 = simulate_shots(&p, 0, 50_000, 7)?;
    let s1 = simulate_shots(&p, 1, 50_000, 7)?;
    let a = analyze(&s0, &s1)?;
    let (f, r) = (a.fit, a.report);
    println!(
        "fit: mu0 {:.3} mu1 {:.3} sigma0 {:.3} sigma1 {:.3} A0 {:.4} A1 {:.4} ({} iterations)",
        f.mu0, f.mu1, f.sigma0, f.sigma1, f.a0, f.a1, f.iterations
    );
    println!(
        "F = {:.2}%  eps_id {:.2}%  eps_01 {:.2}%  eps_10 {:.2}%  threshold {:.3}",
        100.0 * r.fidelity,
        100.0 * r.eps_id,
        100.0 * r.eps_01,
        100.0 * r.eps_10,
        r.threshold
    );

    let taus = [0.2e-6, 0.6e-6, 1.0e-6, 1.4e-6, 1.8e-6, 2.4e-6, 3.0e-6];
    println!(
        "\n{:>7} {:>8} {:>8} {:>8} {:>8}",
        "tau us", "F %", "id %", "01 %", "10 %"
    );
    for row in error_vs_integration(&p, &taus, 20_000, 7)? {
        println!(
            "{:>7.1} {:>8.2} {:>8.3} {:>8.3} {:>8.3}",
            row.tau * 1e6,
            100.0 * row.fidelity,
            100.0 * row.eps_id,
            100.0 * row.eps_01,
            100.0 * row.eps_10
        );
    }
    Ok(())
}
