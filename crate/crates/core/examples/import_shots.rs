//! Analyze externally recorded shots: write two CSV shot files without any
//! simulation metadata, read them back and run the same fit and report.
//!
//! cargo run --example import_shots

use quantromon::readout::{analyze, ShotSet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> quantromon::Result<()> {
    let dir = std::env::temp_dir().join("quantromon-import");
    std::fs::create_dir_all(&dir)?;

    // stand-in for a digitizer dump: one integrated value per line
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (state, mean) in [(0u8, -1.0), (1u8, 1.0)] {
        let noise = Normal::new(mean, 0.45).expect("valid normal");
        let mut text = String::from("# recorded 2026-01-01, 1.8 us window\nvalue\n");
        for _ in 0..20_000 {
            text.push_str(&format!("{}\n", noise.sample(&mut rng)));
        }
        std::fs::write(dir.join(format!("state{state}.csv")), text)?;
    }

    let load = |s: u8| -> quantromon::Result<ShotSet> {
        let text = std::fs::read_to_string(dir.join(format!("state{s}.csv")))?;
        Ok(ShotSet::from_csv(&text, Some(s))?)
    };
    let a = analyze(&load(0)?, &load(1)?)?;
    println!("threshold {:.4}", a.report.threshold);
    println!(
        "F = {:.3}%, overlap error {:.3}%",
        100.0 * a.report.fidelity,
        100.0 * a.report.eps_id
    );
    Ok(())
}
