//! Decoding thresholds of the repeat-accumulate code families.
//!
//! Computes the iterative-decoding threshold of the plain (RA) and irregular
//! (IRA) protographs at rates 1/2, 2/3, and 4/5 over Z_7. The threshold is
//! the largest noise deviation, in units of the coding lattice scale, whose
//! equivalent discrete channel still drives the decoder's information
//! trajectory to convergence. The irregular family dominates the plain one
//! at every rate. Each threshold is also mapped to the SNR at which the
//! reference three-user channel reaches that deviation.
//!
//! Run with: cargo run --release --example ldpc_threshold

use qcof::coeffopt::best_equation;
use qcof::lattice::Modulation;
use qcof::ldpc::{check_merge, exit_threshold, ira_base, ra_base, unit_scheme_family, BaseMatrix};
use qcof::rate::db_to_linear;

fn equivalent_snr_db(p: u64, sigma: f64) -> f64 {
    let h = [1.0, 0.75, -std::f64::consts::SQRT_2];
    let norm = |snr_db: f64| {
        let snr = db_to_linear(snr_db);
        best_equation(snr, &h).sigma2.sqrt() / Modulation::new(p, snr).kappa()
    };
    let (mut lo, mut hi) = (-20.0, 80.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if norm(mid) > sigma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn main() {
    let p = 7u64;
    let rates: [(u32, u32); 3] = [(1, 2), (2, 3), (4, 5)];
    println!(
        "{:>7} {:>6} {:>16} {:>14}",
        "family", "rate", "threshold_sigma", "equiv_snr_db"
    );
    for (name, make) in [
        ("ra", Box::new(|n, d| ra_base(n, d).unwrap()) as Box<dyn Fn(u32, u32) -> BaseMatrix>),
        ("ira", Box::new(|n, d| check_merge(&ira_base(), n, d).unwrap())),
    ] {
        for (num, den) in rates {
            let base = make(num, den);
            let threshold = exit_threshold(&base, p, unit_scheme_family(p));
            println!(
                "{:>7} {:>6} {:>16.4} {:>14.2}",
                name,
                format!("{num}/{den}"),
                threshold,
                equivalent_snr_db(p, threshold)
            );
        }
    }
}
