//! Fast invariant suite for sanity-checking a build.
//!
//! Each check is a reduced version of a property the test suite verifies in
//! full: exhaustive at small sizes, Monte Carlo at trimmed sample counts.
//! The whole suite finishes in seconds and reports one pass/fail line per
//! check with elapsed time. A fault-injection hook deliberately corrupts the
//! symbol-to-point map so the failure path itself can be exercised.

use crate::channel::{
    combine_codewords, exact_noise_pmf, mac_output, receiver_front_end, transmit,
};
use crate::coeffopt::{best_equation, optimal_noise_variance};
use crate::field::PrimeField;
use crate::lattice::Modulation;
use crate::ldpc::{bp_decode, check_merge, ira_base, lift, ra_base, DecodeOutcome};
use crate::rate::db_to_linear;
use crate::wyner::sweep;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Outcome of one selftest check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    /// Short name of the property checked.
    pub name: &'static str,
    /// Whether the check passed.
    pub passed: bool,
    /// One-line diagnostic, filled on failure.
    pub detail: String,
    /// Elapsed wall time in seconds.
    pub seconds: f64,
}

/// Fault-injection switches for exercising the failure path.
#[derive(Clone, Copy, Debug, Default)]
pub struct Faults {
    /// Corrupts the symbol-to-constellation map inside the combination
    /// check, which must make that check fail.
    pub corrupt_modulation_map: bool,
}

fn timed<F: FnOnce() -> Result<(), String>>(name: &'static str, body: F) -> CheckResult {
    let start = Instant::now();
    let outcome = body();
    let seconds = start.elapsed().as_secs_f64();
    match outcome {
        Ok(()) => CheckResult {
            name,
            passed: true,
            detail: String::new(),
            seconds,
        },
        Err(detail) => CheckResult {
            name,
            passed: false,
            detail,
            seconds,
        },
    }
}

/// Integer combinations of constellation points demodulate to the matching
/// field combination, exhaustively at small sizes.
fn check_combination_lemma(corrupt: bool) -> CheckResult {
    timed("combination-lemma", move || {
        for p in [2u64, 3, 5] {
            let field = PrimeField::new(p);
            let scheme = Modulation::from_kappa(p, 1.0);
            let span = p as i64;
            for a0 in -span..=span {
                for a1 in -span..=span {
                    for u0 in 0..p {
                        for u1 in 0..p {
                            let point = |u: u64| {
                                let mut x = scheme.modulate(u);
                                if corrupt && u == 1 {
                                    x += 1.0;
                                }
                                x
                            };
                            let s = a0 as f64 * point(u0) + a1 as f64 * point(u1);
                            let got = scheme.demodulate(scheme.mod_shaping(s));
                            let expect = field.add(
                                field.mul(field.reduce(a0), u0),
                                field.mul(field.reduce(a1), u1),
                            );
                            if got != expect {
                                return Err(format!(
                                    "p={p} a=({a0},{a1}) u=({u0},{u1}): got {got}, expected {expect}"
                                ));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    })
}

/// Modulation and demodulation invert each other and ties round up.
fn check_quantizer() -> CheckResult {
    timed("quantizer-round-trip", || {
        let scheme = Modulation::from_kappa(7, 2.0);
        for u in 0..7 {
            let back = scheme.demodulate(scheme.modulate(u));
            if back != u {
                return Err(format!("symbol {u} round-tripped to {back}"));
            }
        }
        // Half-integer boundary rounds toward the larger label.
        if scheme.quantize_coding(1.0) != 2.0 {
            return Err("tie at half cell did not round up".into());
        }
        Ok(())
    })
}

/// The lattice search returns the same minimum as a brute-force box scan.
fn check_coefficient_search() -> CheckResult {
    timed("coefficient-search-oracle", || {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let snr = db_to_linear(10.0);
        for trial in 0..20 {
            let h: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let best = best_equation(snr, &h);
            let mut brute = f64::INFINITY;
            for a0 in -5i64..=5 {
                for a1 in -5i64..=5 {
                    for a2 in -5i64..=5 {
                        if a0 == 0 && a1 == 0 && a2 == 0 {
                            continue;
                        }
                        let v = optimal_noise_variance(snr, &h, &[a0, a1, a2]);
                        if v < brute {
                            brute = v;
                        }
                    }
                }
            }
            if (best.sigma2 - brute).abs() > 1e-9 * brute.max(1.0) {
                return Err(format!(
                    "trial {trial}: search found {}, brute force {brute}",
                    best.sigma2
                ));
            }
        }
        Ok(())
    })
}

/// The simulated front end's equivalent noise matches the model pmf.
fn check_pipeline_noise() -> CheckResult {
    timed("pipeline-noise-model", || {
        let p = 7u64;
        let n = 20_000usize;
        let h = [1.0, 0.75, -std::f64::consts::SQRT_2];
        let snr = db_to_linear(15.0);
        let field = PrimeField::new(p);
        let scheme = Modulation::new(p, snr);
        let eq = best_equation(snr, &h);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
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
        let target = combine_codewords(field, &eq.a, &words);
        let mut counts = vec![0.0f64; p as usize];
        for (u, c) in received.iter().zip(target.iter()) {
            counts[field.sub(*u, *c) as usize] += 1.0;
        }
        let model = exact_noise_pmf(&scheme, &h, &eq.a, eq.alpha);
        let tv: f64 = counts
            .iter()
            .zip(model.probs().iter())
            .map(|(c, m)| (c / n as f64 - m).abs())
            .sum::<f64>()
            / 2.0;
        if tv > 0.03 {
            return Err(format!("total variation {tv:.4} exceeds 0.03"));
        }
        Ok(())
    })
}

/// Every encoded word satisfies all parity checks, for both code families.
fn check_ldpc_parity() -> CheckResult {
    timed("ldpc-encode-parity", || {
        let bases = [ra_base(1, 2).unwrap(), check_merge(&ira_base(), 2, 3).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for base in &bases {
            let code = lift(base, 7, 32, 5).map_err(|e| e.to_string())?;
            for _ in 0..50 {
                let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..7)).collect();
                let c = code.encode(&w);
                if !code.parity_check(&c) {
                    return Err("encoded word violates a parity check".into());
                }
            }
        }
        Ok(())
    })
}

/// A noiseless observation decodes in a single iteration.
fn check_ldpc_noiseless() -> CheckResult {
    timed("ldpc-noiseless-decode", || {
        let code = lift(&ra_base(1, 2).unwrap(), 7, 64, 3).unwrap();
        let w: Vec<u64> = (0..code.k()).map(|i| (i as u64 * 3 + 1) % 7).collect();
        let c = code.encode(&w);
        let mut channel = vec![1e-12; 7];
        channel[0] = 1.0;
        match bp_decode(&code, &c, &channel, 10) {
            DecodeOutcome::Decoded {
                codeword,
                iterations,
            } => {
                if iterations != 1 {
                    return Err(format!("took {iterations} iterations"));
                }
                if codeword != c {
                    return Err("decoded a different codeword".into());
                }
                Ok(())
            }
            DecodeOutcome::Failed { .. } => Err("decoder failed on a clean word".into()),
        }
    })
}

/// Cellular-array rates respect the link cap and the power-allocation
/// optimum dominates the equal-power schedule.
fn check_wyner_rates() -> CheckResult {
    timed("cellular-rate-caps", || {
        let points = sweep(&[0.0, 0.5, 1.0], 15.0, 7, 2.0, 1, None);
        for pt in &points {
            if pt.rate_qcof > 2.0 + 1e-12 {
                return Err(format!("rate {} above the link cap", pt.rate_qcof));
            }
            if pt.rate_qcof_pa < pt.rate_qcof - 1e-9 {
                return Err("power allocation fell below equal power".into());
            }
        }
        Ok(())
    })
}

/// Field arithmetic identities hold exhaustively at small sizes.
fn check_field() -> CheckResult {
    timed("field-arithmetic", || {
        for p in [2u64, 3, 7, 17] {
            let field = PrimeField::new(p);
            for a in 1..p {
                let inv = field.inv(a);
                if field.mul(a, inv) != 1 {
                    return Err(format!("inverse of {a} mod {p} is wrong"));
                }
            }
            for a in 0..p {
                if field.sub(field.add(a, 1), 1) != a {
                    return Err("add/sub mismatch".into());
                }
            }
        }
        Ok(())
    })
}

/// Runs the whole suite and returns one result per check.
pub fn run_selftest(faults: Faults) -> Vec<CheckResult> {
    vec![
        check_field(),
        check_combination_lemma(faults.corrupt_modulation_map),
        check_quantizer(),
        check_coefficient_search(),
        check_pipeline_noise(),
        check_ldpc_parity(),
        check_ldpc_noiseless(),
        check_wyner_rates(),
    ]
}

/// Formats results as one `[PASS]`/`[FAIL]` line per check.
pub fn format_report(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        out.push_str(&format!("[{status}] {} ({:.0} ms)", r.name, r.seconds * 1e3));
        if !r.detail.is_empty() {
            out.push_str(&format!(": {}", r.detail));
        }
        out.push('\n');
    }
    out
}
