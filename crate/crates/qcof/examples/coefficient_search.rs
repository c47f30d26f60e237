//! Integer coefficient search for the best decodable combination.
//!
//! The relay picks the integer vector a that minimizes the effective noise
//! variance after MMSE scaling. The search reduces the underlying lattice
//! basis and then enumerates short vectors; this example cross-checks the
//! winner against a plain box scan and lists the runner-up candidates in
//! order of increasing noise.
//!
//! Run with: cargo run --release --example coefficient_search

use qcof::coeffopt::{best_equation, enumerate_candidates, optimal_noise_variance};
use qcof::rate::db_to_linear;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let snr = db_to_linear(20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let h: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
    println!("gains: {h:?}, snr = 20 dB");

    let best = best_equation(snr, &h);
    println!(
        "search result:   a = {:?}, alpha = {:.4}, sigma^2 = {:.6}",
        best.a, best.alpha, best.sigma2
    );

    // Independent oracle: scan every integer vector in a box.
    let span = 8i64;
    let mut brute = (vec![0i64; 4], f64::INFINITY);
    for a0 in -span..=span {
        for a1 in -span..=span {
            for a2 in -span..=span {
                for a3 in -span..=span {
                    let a = [a0, a1, a2, a3];
                    if a.iter().all(|&x| x == 0) {
                        continue;
                    }
                    let v = optimal_noise_variance(snr, &h, &a);
                    if v < brute.1 {
                        brute = (a.to_vec(), v);
                    }
                }
            }
        }
    }
    println!(
        "box scan result: a = {:?}, sigma^2 = {:.6}",
        brute.0, brute.1
    );
    assert!((best.sigma2 - brute.1).abs() < 1e-9 * brute.1);

    println!("\ntop candidates by noise variance:");
    for (i, eq) in enumerate_candidates(snr, &h, 8).iter().enumerate() {
        println!("{:>3}: a = {:?}, sigma^2 = {:.6}", i + 1, eq.a, eq.sigma2);
    }
}
