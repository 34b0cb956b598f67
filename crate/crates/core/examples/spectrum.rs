//! Closed-form spectrum next to exact diagonalization of the truncated
//! two-mode Hamiltonian.
//!
//! cargo run --example spectrum

use quantromon::analytic::{bare_modes, dressed_spectrum};
use quantromon::numeric::{numeric_spectrum, Truncation};
use quantromon::params::{derive_energies, CircuitParams};

fn main() -> quantromon::Result<()> {
    let en = derive_energies(&CircuitParams::table_one())?;
    let bare = bare_modes(&en);
    println!(
        "bare:     omega_q {:.4} GHz  omega_r {:.4} GHz",
        bare.omega_q / 1e9,
        bare.omega_r / 1e9
    );

    let a = dressed_spectrum(&en)?;
    println!(
        "analytic: omega_q {:.4} GHz  omega_r {:.4} GHz  alpha {:.2} MHz  2chi {:.4} MHz",
        a.omega_q_t / 1e9,
        a.omega_r_t / 1e9,
        a.alpha_q / 1e6,
        a.two_chi / 1e6
    );

    for n in [8, 10, 12, 14] {
        let s = numeric_spectrum(&en, Truncation::new(n, n)?)?;
        println!(
            "numeric {n:>2}x{n:<2} omega_q {:.4} GHz  omega_r {:.4} GHz  alpha {:.2} MHz  2chi {:.4} MHz",
            s.omega_q_t / 1e9,
            s.omega_r_t / 1e9,
            s.alpha_q / 1e6,
            s.two_chi / 1e6
        );
    }

    // the asymmetry coupling adds a transverse contribution to the shift
    let asym = en.with_asymmetry(0.045);
    let a = dressed_spectrum(&asym)?;
    let n = numeric_spectrum(&asym, Truncation::default())?;
    println!(
        "d_j = 0.045: g {:.2} MHz, 2chi_total analytic {:.4} MHz, numeric {:.4} MHz",
        a.g_asymm / 1e6,
        a.two_chi_total / 1e6,
        n.two_chi_total / 1e6
    );
    Ok(())
}
