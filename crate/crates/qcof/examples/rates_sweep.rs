//! Achievable-rate sweep over SNR for several field sizes.
//!
//! For a fixed three-user channel, prints the quantized compute-and-forward
//! rate next to the unquantized benchmark at each SNR. Two effects are
//! visible: small fields saturate at log2(p) bits once the noise entropy
//! vanishes, and the quantized rate tracks the benchmark from below with a
//! fraction-of-a-bit gap before saturation.
//!
//! Run with: cargo run --release --example rates_sweep

use qcof::rate::{cof_benchmark_rate, computation_rate, db_to_linear, NoiseModel};

fn main() {
    let h = [1.0, 0.75, -std::f64::consts::SQRT_2];
    let ps = [3u64, 7, 17, 251];

    println!("channel gains: {h:?}");
    print!("{:>8} {:>10}", "snr_db", "benchmark");
    for p in ps {
        print!(" {:>9}", format!("p={p}"));
    }
    println!();

    for snr_db in (0..=40).step_by(5) {
        let snr = db_to_linear(snr_db as f64);
        print!(
            "{:>8} {:>10.4}",
            snr_db,
            cof_benchmark_rate(&h, snr)
        );
        for p in ps {
            let point = computation_rate(&h, snr, p, NoiseModel::Gaussian);
            print!(" {:>9.4}", point.rate_bits);
        }
        println!();
    }

    // The saturation ceiling for each field size.
    print!("{:>8} {:>10}", "ceiling", "");
    for p in ps {
        print!(" {:>9.4}", (p as f64).log2());
    }
    println!();
}
