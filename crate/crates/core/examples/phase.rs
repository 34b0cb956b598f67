//! Reflection phase between the two pulled resonances, followed through
//! resonance, for several coupling regimes.
//!
//! cargo run --example phase

use quantromon::readout::{phase_separation, reflection_coefficient};

fn main() -> quantromon::Result<()> {
    let (two_chi, ke, ki) = (1.37e6, 0.90e6, 0.38e6);
    let sep = phase_separation(two_chi, ke, ki)?;
    let s = reflection_coefficient(0.5 * two_chi, 0.0, ke, ki);
    println!(
        "principal-branch phase at +chi: {:.2} deg",
        s.arg().to_degrees()
    );
    println!("continuous separation:          {sep:.2} deg");

    println!("\n{:>10} {:>10} {:>10}", "ke/ki", "2chi MHz", "sep deg");
    for ratio in [0.5, 1.0, 2.37, 10.0] {
        let ki = 1.28e6 / (1.0 + ratio);
        let ke = 1.28e6 - ki;
        for two_chi in [0.5e6, 1.37e6, 4e6] {
            println!(
                "{ratio:>10.2} {:>10.2} {:>10.2}",
                two_chi / 1e6,
                phase_separation(two_chi, ke, ki)?
            );
        }
    }
    Ok(())
}
