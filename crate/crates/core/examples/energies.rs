//! Energy scales of the fitted device and the regime check.
//!
//! cargo run --example energies

use quantromon::params::{derive_energies, validate, CircuitParams};

fn main() -> quantromon::Result<()> {
    let circuit = CircuitParams::table_one();
    let en = derive_energies(&circuit)?;

    println!("E_J   = {:10.4} GHz", en.e_j / 1e9);
    println!("E_LR  = {:10.4} GHz", en.e_lr / 1e9);
    println!("E_CQ  = {:10.4} MHz", en.e_cq / 1e6);
    println!("E_CR  = {:10.4} MHz", en.e_cr / 1e6);
    println!("E_JQ  = {:10.4} GHz", en.e_jq / 1e9);
    println!("E_JR  = {:10.4} GHz", en.e_jr / 1e9);
    println!("E_LR / E_J = {:.2}", en.regime_ratio());

    // a resonator inductor too large for the perturbative treatment
    let soft = CircuitParams {
        l_r: 2.0 * circuit.l_j * 1.1,
        ..circuit
    };
    for w in validate(&soft).warnings {
        println!("warning: {w}");
    }
    Ok(())
}
