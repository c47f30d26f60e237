//! Encoding and belief-propagation decoding of a lifted code.
//!
//! Lifts the rate-1/2 repeat-accumulate protograph to a few thousand symbols
//! over Z_7, encodes random messages, pushes the codewords through the
//! equivalent discrete channel at a noise level half a bit inside capacity
//! for the code rate, and decodes. Every frame at this backoff should come
//! back clean within a few dozen iterations.
//!
//! Run with: cargo run --release --example ldpc_decode

use qcof::channel::effective_noise_pmf;
use qcof::lattice::Modulation;
use qcof::ldpc::{bp_decode, lift, ra_base, DecodeOutcome};
use qcof::rate::entropy_bits;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let p = 7u64;
    let base = ra_base(1, 2).unwrap();
    let code = lift(&base, p, 2048, 11).unwrap();
    println!(
        "lifted code: n = {}, k = {}, {} checks",
        code.n(),
        code.k(),
        code.n_checks()
    );

    // Noise level leaving half a bit of rate headroom below capacity.
    let rate_bits = code.k() as f64 / code.n() as f64 * (p as f64).log2();
    let target_entropy = (p as f64).log2() - rate_bits - 0.5;
    let scheme = Modulation::from_kappa(p, 1.0);
    let (mut lo, mut hi) = (1e-4, 2.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if entropy_bits(effective_noise_pmf(&scheme, mid).probs()) < target_entropy {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let sigma = 0.5 * (lo + hi);
    let pmf = effective_noise_pmf(&scheme, sigma);
    println!(
        "operating at sigma = {:.4} ({}b of headroom, channel entropy {:.4}b)",
        sigma, 0.5, target_entropy
    );

    let field = code.field();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for frame in 0..5 {
        let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..p)).collect();
        let c = code.encode(&w);
        assert!(code.parity_check(&c));
        let received: Vec<u64> = c
            .iter()
            .map(|&ci| field.add(ci, pmf.sample(&mut rng)))
            .collect();
        let flipped = received
            .iter()
            .zip(c.iter())
            .filter(|(r, c)| r != c)
            .count();
        match bp_decode(&code, &received, pmf.probs(), 200) {
            DecodeOutcome::Decoded { codeword, iterations } => {
                let ok = codeword == c;
                println!(
                    "frame {frame}: {flipped} corrupted symbols, decoded in {iterations} iterations, exact = {ok}"
                );
            }
            DecodeOutcome::Failed { iterations, unsatisfied } => {
                println!(
                    "frame {frame}: {flipped} corrupted symbols, failed after {iterations} iterations ({unsatisfied} checks unsatisfied)"
                );
            }
        }
    }
}
