//! Equivalent discrete channel of the quantized relay front end.
//!
//! Simulates the full analog path for one relay: three users modulate random
//! codewords onto the scaled integer lattice with dithers, the relay scales
//! its noisy superposition, removes the dithers, and quantizes back to field
//! symbols. The difference between what the relay sees and the intended
//! integer combination is the equivalent channel noise. Its empirical
//! distribution is compared against the two model distributions: the exact
//! one (self-interference plus Gaussian, folded onto the field) and the
//! Gaussian approximation.
//!
//! Run with: cargo run --release --example noise_model

use qcof::channel::{
    combine_codewords, exact_noise_pmf, effective_noise_pmf, mac_output, receiver_front_end,
    transmit,
};
use qcof::coeffopt::best_equation;
use qcof::field::PrimeField;
use qcof::lattice::Modulation;
use qcof::rate::db_to_linear;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let p = 7u64;
    let n = 200_000usize;
    let snr_db = 15.0;
    let h = [1.0, 0.75, -std::f64::consts::SQRT_2];

    let snr = db_to_linear(snr_db);
    let field = PrimeField::new(p);
    let scheme = Modulation::new(p, snr);
    let eq = best_equation(snr, &h);
    println!("p = {p}, snr = {snr_db} dB, gains {h:?}");
    println!(
        "best equation: a = {:?}, alpha = {:.4}, sigma_eps^2 = {:.4}",
        eq.a, eq.alpha, eq.sigma2
    );

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let words: Vec<Vec<u64>> = (0..3)
        .map(|_| (0..n).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    let dithers: Vec<Vec<f64>> = (0..3)
        .map(|_| (0..n).map(|_| scheme.random_dither(&mut rng)).collect())
        .collect();
    let signals: Vec<Vec<f64>> = words
        .iter()
        .zip(dithers.iter())
        .map(|(w, d)| transmit(&scheme, w, d))
        .collect();
    let y = mac_output(&h, &signals, &mut rng);
    let received = receiver_front_end(&scheme, &y, &dithers, &eq.a, eq.alpha);

    // Histogram of received minus the intended combination.
    let target = combine_codewords(field, &eq.a, &words);
    let mut counts = vec![0u64; p as usize];
    for (u, c) in received.iter().zip(target.iter()) {
        counts[field.sub(*u, *c) as usize] += 1;
    }

    let exact = exact_noise_pmf(&scheme, &h, &eq.a, eq.alpha);
    let gauss = effective_noise_pmf(&scheme, eq.sigma2.sqrt());
    println!("{:>6} {:>10} {:>10} {:>10}", "z", "empirical", "exact", "gauss");
    let mut tv_exact = 0.0;
    let mut tv_gauss = 0.0;
    for z in 0..p as usize {
        let emp = counts[z] as f64 / n as f64;
        tv_exact += (emp - exact.probs()[z]).abs();
        tv_gauss += (emp - gauss.probs()[z]).abs();
        println!(
            "{:>6} {:>10.5} {:>10.5} {:>10.5}",
            z,
            emp,
            exact.probs()[z],
            gauss.probs()[z]
        );
    }
    println!("total variation to exact model: {:.5}", tv_exact / 2.0);
    println!("total variation to gaussian model: {:.5}", tv_gauss / 2.0);
}
