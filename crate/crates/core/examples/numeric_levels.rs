//! Build the truncated Hamiltonian, diagonalize it and show how dressed
//! levels are matched to bare product states.
//!
//! cargo run --example numeric_levels

use quantromon::numeric::{
    build_hamiltonian, eigensolve, extract_observables, label_states, Truncation,
};
use quantromon::params::{derive_energies, CircuitParams};

fn main() -> quantromon::Result<()> {
    let en = derive_energies(&CircuitParams::table_one().with_asymmetry(0.045))?;
    let trunc = Truncation::new(10, 10)?;
    let h = build_hamiltonian(&en, trunc)?;
    println!(
        "dimension {}, asymmetry coupling {:.2} MHz",
        h.dim(),
        h.transverse_coupling / 1e6
    );

    let pairs = eigensolve(&h.entries)?;
    let labeled = label_states(&pairs, trunc, h.transverse_coupling)?;
    let e00 = labeled.energy(0, 0).unwrap_or_default();
    for (&(m_q, m_r), level) in &labeled.levels {
        println!(
            "|{m_q},{m_r}>  E - E00 = {:>9.4} GHz  overlap {:.4}",
            (level.energy - e00) / 1e9,
            level.overlap
        );
    }
    let s = extract_observables(&labeled)?;
    println!(
        "2chi = {:.4} MHz, alpha = {:.2} MHz",
        s.two_chi / 1e6,
        s.alpha_q / 1e6
    );
    Ok(())
}
