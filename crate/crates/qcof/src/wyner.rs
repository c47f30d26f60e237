//! End-to-end simulation of a linear cellular array.
//!
//! L single-antenna users sit in a ring of L cells; relay l hears its own
//! user at unit gain and the two neighbors at gain gamma (indices mod L).
//! Users share one linear code over Z_p. Each relay runs the quantized front
//! end, picks an integer equation for its three local gains, decodes the
//! resulting codeword combination with belief propagation, and forwards it
//! over a rate-limited link. A central processor stacks the L forwarded rows
//! and solves for the user messages by Gaussian elimination; a frame succeeds
//! when every relay decoded correctly and the stacked system has full rank.
//!
//! The alternating power schedule splits users by index parity: in even
//! slots odd users transmit at power beta P and even users at (2 - beta) P,
//! and the roles swap every slot, so each user meets its power constraint on
//! average. beta = 1 disables the schedule.

use crate::channel::{
    effective_noise_pmf, exact_noise_pmf, mac_output, receiver_front_end, transmit, NoisePmf,
};
use crate::coeffopt::{best_equation, enumerate_candidates, Equation};
use crate::field::PrimeField;
use crate::lattice::Modulation;
use crate::ldpc::{BpDecoder, LiftedCode};
use crate::rate::{
    cof_benchmark_rate, db_to_linear, entropy_bits, pa_wyner_rate, wyner_rate, NoiseModel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Belief propagation iteration cap at each relay.
const MAX_BP_ITER: usize = 200;
/// Monte Carlo stops once this many frame errors have been seen.
const FER_ERROR_STOP: usize = 50;
/// Frames dispatched per parallel batch, fixed so that reported counts do
/// not depend on the worker count.
const FER_CHUNK: usize = 32;
/// Candidate equations tried per relay during rank repair.
const REPAIR_CANDIDATES: usize = 24;

/// Parameters of one cellular-array operating point.
#[derive(Clone)]
pub struct WynerConfig<'a> {
    /// Number of users, equal to the number of relays. At least 3.
    pub users: usize,
    /// Inter-cell gain in [0, 1].
    pub gamma: f64,
    /// Transmit signal-to-noise ratio in dB.
    pub snr_db: f64,
    /// Capacity of each relay-to-processor link in bits per symbol.
    pub r0_bits: f64,
    /// Power split of the alternating schedule in [0, 1]; 1 = equal power.
    pub beta: f64,
    /// Error distribution fed to the relay decoders.
    pub noise_model: NoiseModel,
    /// The linear code shared by all users.
    pub code: &'a LiftedCode,
    /// Root seed; frames derive their own streams from it.
    pub seed: u64,
}

impl WynerConfig<'_> {
    fn validate(&self) {
        assert!(self.users >= 3, "the three-tap model needs at least 3 cells");
        assert!((0.0..=1.0).contains(&self.gamma), "gamma must lie in [0, 1]");
        assert!((0.0..=1.0).contains(&self.beta), "beta must lie in [0, 1]");
        assert!(self.r0_bits >= 0.0, "link rate must be nonnegative");
        assert!(
            self.code_rate_bits() <= self.r0_bits + 1e-9,
            "code rate exceeds the forwarding link rate"
        );
    }

    /// Field size of the shared code.
    pub fn p(&self) -> u64 {
        self.code.p()
    }

    /// Rate of the shared code in bits per symbol.
    pub fn code_rate_bits(&self) -> f64 {
        let code = self.code;
        code.k() as f64 / code.n() as f64 * (code.p() as f64).log2()
    }
}

/// Transmit amplitude of a user in a given slot under the power schedule.
fn slot_amplitude(beta: f64, user: usize, slot: usize) -> f64 {
    if (user + slot) % 2 == 1 {
        beta.sqrt()
    } else {
        (2.0 - beta).sqrt()
    }
}

/// One relay's chosen equation: local gains, integer coefficients with their
/// scaling, and the corresponding row of the global system over Z_p.
#[derive(Clone, Debug, PartialEq)]
pub struct RelayEquation {
    /// Relay index.
    pub relay: usize,
    /// Local gains toward (left neighbor, own user, right neighbor).
    pub gains: Vec<f64>,
    /// The integer combining vector on those three taps.
    pub equation: Equation,
    /// Length-L row placing the reduced coefficients on the tap support.
    pub row: Vec<u64>,
}

fn relay_row(field: PrimeField, users: usize, relay: usize, a: &[i64]) -> Vec<u64> {
    assert!(a.len() == 3, "equations act on three taps");
    let mut row = vec![0u64; users];
    row[(relay + users - 1) % users] = field.reduce(a[0]);
    row[relay] = field.reduce(a[1]);
    row[(relay + 1) % users] = field.reduce(a[2]);
    row
}

/// Builds every relay's locally optimal equation for the given slot.
///
/// Relay l sees the users (l - 1, l, l + 1) mod L through the gains
/// (gamma a, a, gamma a) scaled by the slot's power schedule, and picks the
/// integer vector minimizing its analog noise variance.
pub fn build_system(config: &WynerConfig, slot: usize) -> Vec<RelayEquation> {
    config.validate();
    let l = config.users;
    let snr = db_to_linear(config.snr_db);
    let field = config.code.field();
    (0..l)
        .map(|r| {
            let prev = (r + l - 1) % l;
            let next = (r + 1) % l;
            let gains = vec![
                config.gamma * slot_amplitude(config.beta, prev, slot),
                slot_amplitude(config.beta, r, slot),
                config.gamma * slot_amplitude(config.beta, next, slot),
            ];
            let equation = best_equation(snr, &gains);
            let row = relay_row(field, l, r, &equation.a);
            RelayEquation {
                relay: r,
                gains,
                equation,
                row,
            }
        })
        .collect()
}

/// Rank of the stacked relay system over Z_p.
pub fn system_rank(field: PrimeField, equations: &[RelayEquation]) -> usize {
    let rows: Vec<Vec<u64>> = equations.iter().map(|e| e.row.clone()).collect();
    field.rank(&rows)
}

/// Swaps dependent relay rows for next-best candidates until the system has
/// full rank or the candidate budget is exhausted.
///
/// Candidates come from the same enumeration as the optimum, in nondecreasing
/// noise-variance order, so no relay ends up below its optimal variance. When
/// full rank cannot be reached the original system is returned unchanged; the
/// reported rank is the diagnostic.
pub fn rank_repair(
    config: &WynerConfig,
    equations: &[RelayEquation],
) -> (Vec<RelayEquation>, usize) {
    let field = config.code.field();
    let l = config.users;
    let snr = db_to_linear(config.snr_db);
    let original_rank = system_rank(field, equations);
    if original_rank == l {
        return (equations.to_vec(), original_rank);
    }
    let mut current = equations.to_vec();
    let mut rank = original_rank;
    loop {
        let before = rank;
        for r in 0..l {
            if rank == l {
                break;
            }
            // A relay is swappable only if its row adds nothing to the span
            // of the other rows.
            let others: Vec<Vec<u64>> = current
                .iter()
                .filter(|e| e.relay != r)
                .map(|e| e.row.clone())
                .collect();
            if field.rank(&others) < rank {
                continue;
            }
            let candidates = enumerate_candidates(snr, &current[r].gains, REPAIR_CANDIDATES);
            for cand in candidates {
                if cand.a == current[r].equation.a {
                    continue;
                }
                let row = relay_row(field, l, r, &cand.a);
                let mut trial = others.clone();
                trial.push(row.clone());
                let trial_rank = field.rank(&trial);
                if trial_rank > rank {
                    current[r].equation = cand;
                    current[r].row = row;
                    rank = trial_rank;
                    break;
                }
            }
        }
        if rank == l || rank == before {
            break;
        }
    }
    if rank < l {
        return (equations.to_vec(), original_rank);
    }
    (current, rank)
}

/// Noise distribution a relay's decoder assumes for its equation.
fn relay_pmf(config: &WynerConfig, scheme: &Modulation, eq: &RelayEquation) -> NoisePmf {
    match config.noise_model {
        NoiseModel::Gaussian => effective_noise_pmf(scheme, eq.equation.sigma2.sqrt()),
        NoiseModel::Exact => {
            exact_noise_pmf(scheme, &eq.gains, &eq.equation.a, eq.equation.alpha)
        }
    }
}

/// Smallest per-relay achievable rate (bits per symbol) under the chosen
/// equations; the regime above it is where frame errors are expected.
pub fn min_relay_rate_bits(config: &WynerConfig, equations: &[RelayEquation]) -> f64 {
    let snr = db_to_linear(config.snr_db);
    let scheme = Modulation::new(config.p(), snr);
    let log_p = (config.p() as f64).log2();
    equations
        .iter()
        .map(|eq| {
            let pmf = relay_pmf(config, &scheme, eq);
            (log_p - entropy_bits(pmf.probs())).max(0.0)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Outcome of one simulated frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameResult {
    /// Whether each relay's decoder converged to a codeword.
    pub relay_decoded: Vec<bool>,
    /// Rank of the stacked system that was used.
    pub rank: usize,
    /// The per-relay equations in effect for this frame's slot.
    pub equations: Vec<RelayEquation>,
    /// Recovered per-user messages, when elimination was possible.
    pub recovered: Option<Vec<Vec<u64>>>,
    /// True when the recovered messages equal the transmitted ones.
    pub success: bool,
}

/// Solves the stacked relay system for the per-user messages.
///
/// Takes one decoded combination per relay; returns the message vectors read
/// off the information positions of the solved codewords, or `None` when the
/// system is singular.
pub fn central_recovery(
    code: &LiftedCode,
    equations: &[RelayEquation],
    combinations: &[Vec<u64>],
) -> Option<Vec<Vec<u64>>> {
    assert!(equations.len() == combinations.len(), "one combination per relay");
    let field = code.field();
    let rows: Vec<Vec<u64>> = equations.iter().map(|e| e.row.clone()).collect();
    let solved = field.solve(&rows, combinations)?;
    let info = code.info_positions();
    Some(
        solved
            .iter()
            .map(|codeword| info.iter().map(|&i| codeword[i]).collect())
            .collect(),
    )
}

fn frame_seed(seed: u64, frame: u64) -> u64 {
    let mut x = seed ^ frame.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Simulates one frame end to end.
///
/// Draws fresh messages and dithers, transmits through the ring, runs every
/// relay's quantized front end and decoder, and attempts central recovery.
/// The slot of the power schedule alternates with the frame index.
pub fn run_frame(config: &WynerConfig, frame: u64) -> FrameResult {
    config.validate();
    let slot = (frame % 2) as usize;
    let built = build_system(config, slot);
    let (equations, rank) = rank_repair(config, &built);
    run_frame_with(config, &equations, rank, frame)
}

fn run_frame_with(
    config: &WynerConfig,
    equations: &[RelayEquation],
    rank: usize,
    frame: u64,
) -> FrameResult {
    let code = config.code;
    let field = code.field();
    let l = config.users;
    let p = code.p();
    let n = code.n();
    let k = code.k();
    let snr = db_to_linear(config.snr_db);
    let scheme = Modulation::new(p, snr);
    let mut rng = ChaCha8Rng::seed_from_u64(frame_seed(config.seed, frame));

    let messages: Vec<Vec<u64>> = (0..l)
        .map(|_| (0..k).map(|_| rng.gen_range(0..p)).collect())
        .collect();
    let codewords: Vec<Vec<u64>> = messages.iter().map(|w| code.encode(w)).collect();
    let dithers: Vec<Vec<f64>> = (0..l)
        .map(|_| (0..n).map(|_| scheme.random_dither(&mut rng)).collect())
        .collect();
    let signals: Vec<Vec<f64>> = codewords
        .iter()
        .zip(dithers.iter())
        .map(|(c, d)| transmit(&scheme, c, d))
        .collect();

    let mut relay_decoded = vec![false; l];
    let mut combinations: Vec<Vec<u64>> = vec![Vec::new(); l];
    for eq in equations {
        let r = eq.relay;
        let prev = (r + l - 1) % l;
        let next = (r + 1) % l;
        let local_signals = vec![
            signals[prev].clone(),
            signals[r].clone(),
            signals[next].clone(),
        ];
        let local_dithers = vec![
            dithers[prev].clone(),
            dithers[r].clone(),
            dithers[next].clone(),
        ];
        let y = mac_output(&eq.gains, &local_signals, &mut rng);
        let received =
            receiver_front_end(&scheme, &y, &local_dithers, &eq.equation.a, eq.equation.alpha);
        let pmf = relay_pmf(config, &scheme, eq);
        let mut decoder = BpDecoder::new(code);
        let outcome = decoder.decode(&received, pmf.probs(), MAX_BP_ITER);
        if let crate::ldpc::DecodeOutcome::Decoded { codeword, .. } = outcome {
            relay_decoded[r] = true;
            combinations[r] = codeword;
        }
    }

    let mut recovered = None;
    let mut success = false;
    if rank == l && relay_decoded.iter().all(|&d| d) {
        if let Some(msgs) = central_recovery(code, equations, &combinations) {
            success = msgs == messages;
            recovered = Some(msgs);
        }
    }
    let _ = field;
    FrameResult {
        relay_decoded,
        rank,
        equations: equations.to_vec(),
        recovered,
        success,
    }
}

/// Monte Carlo frame error rate at one operating point.
///
/// Runs frames in fixed-size parallel batches until the error target or the
/// frame cap is hit; the processed frame count is therefore deterministic.
pub fn simulate_fer(config: &WynerConfig, max_frames: usize) -> (f64, usize) {
    config.validate();
    assert!(max_frames > 0, "simulation needs at least one frame");
    // Equations depend only on the slot parity, so build both once.
    let systems: Vec<(Vec<RelayEquation>, usize)> = (0..2)
        .map(|slot| {
            let built = build_system(config, slot);
            rank_repair(config, &built)
        })
        .collect();
    let mut errors = 0usize;
    let mut frames = 0usize;
    while frames < max_frames && errors < FER_ERROR_STOP {
        let end = (frames + FER_CHUNK).min(max_frames);
        let batch: usize = (frames as u64..end as u64)
            .into_par_iter()
            .map(|f| {
                let (eqs, rank) = &systems[(f % 2) as usize];
                usize::from(!run_frame_with(config, eqs, *rank, f).success)
            })
            .sum();
        errors += batch;
        frames = end;
    }
    (errors as f64 / frames as f64, frames)
}

/// Monte Carlo settings for the simulated leg of a sweep.
#[derive(Clone)]
pub struct SimSettings<'a> {
    /// The shared code; its field size must match the sweep's p.
    pub code: &'a LiftedCode,
    /// Ring size.
    pub users: usize,
    /// Power split used by the simulated schedule.
    pub beta: f64,
    /// Error distribution fed to the relay decoders.
    pub noise_model: NoiseModel,
    /// Frame cap per grid point.
    pub max_frames: usize,
}

/// One row of a sweep: analytic rates and, when simulated, the measured
/// frame error rate (NaN otherwise).
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub gamma: f64,
    pub snr_db: f64,
    pub p: u64,
    pub r0: f64,
    pub beta_star: f64,
    pub rate_qcof: f64,
    pub rate_qcof_pa: f64,
    pub rate_cof: f64,
    pub fer: f64,
    pub frames: usize,
    pub seed: u64,
}

/// CSV column names matching [`SweepPoint::csv_row`].
pub const SWEEP_CSV_HEADER: &str =
    "gamma,snr_db,p,r0,beta_star,rate_qcof,rate_qcof_pa,rate_cof,fer,frames,seed";

impl SweepPoint {
    /// Formats the point as one CSV row; an unsimulated fer prints empty.
    pub fn csv_row(&self) -> String {
        let fer = if self.fer.is_nan() {
            String::new()
        } else {
            format!("{:.6}", self.fer)
        };
        format!(
            "{:.6},{:.6},{},{:.6},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            self.gamma,
            self.snr_db,
            self.p,
            self.r0,
            self.beta_star,
            self.rate_qcof,
            self.rate_qcof_pa,
            self.rate_cof,
            fer,
            self.frames,
            self.seed
        )
    }
}

/// Sweeps the inter-cell gain: analytic per-user rates with and without the
/// power schedule, the unquantized benchmark, and optionally a simulated
/// frame error rate per grid point. Deterministic given the seed.
pub fn sweep(
    gammas: &[f64],
    snr_db: f64,
    p: u64,
    r0: f64,
    seed: u64,
    sim: Option<&SimSettings>,
) -> Vec<SweepPoint> {
    assert!(!gammas.is_empty(), "sweep grid is empty");
    let snr = db_to_linear(snr_db);
    gammas
        .iter()
        .map(|&gamma| {
            let rate_qcof = wyner_rate(gamma, snr, p, r0);
            let (rate_qcof_pa, beta_star) = pa_wyner_rate(gamma, snr, p, r0);
            let rate_cof = cof_benchmark_rate(&[gamma, 1.0, gamma], snr).min(r0);
            let (fer, frames) = match sim {
                None => (f64::NAN, 0),
                Some(settings) => {
                    assert!(settings.code.p() == p, "simulation code field must match p");
                    let config = WynerConfig {
                        users: settings.users,
                        gamma,
                        snr_db,
                        r0_bits: r0,
                        beta: settings.beta,
                        noise_model: settings.noise_model,
                        code: settings.code,
                        seed,
                    };
                    simulate_fer(&config, settings.max_frames)
                }
            };
            SweepPoint {
                gamma,
                snr_db,
                p,
                r0,
                beta_star,
                rate_qcof,
                rate_qcof_pa,
                rate_cof,
                fer,
                frames,
                seed,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::combine_codewords;
    use crate::coeffopt::{mmse_alpha, optimal_noise_variance};
    use crate::ldpc::{lift, ra_base};

    fn test_code(z: usize) -> LiftedCode {
        lift(&ra_base(1, 2).unwrap(), 7, z, 11).unwrap()
    }

    fn config<'a>(code: &'a LiftedCode, users: usize, gamma: f64, snr_db: f64) -> WynerConfig<'a> {
        WynerConfig {
            users,
            gamma,
            snr_db,
            r0_bits: 3.0,
            beta: 1.0,
            noise_model: NoiseModel::Gaussian,
            code,
            seed: 7,
        }
    }

    #[test]
    fn power_schedule_averages_to_unit() {
        for beta in [0.0, 0.3, 0.7, 1.0] {
            for user in 0..5 {
                let p0 = slot_amplitude(beta, user, 0).powi(2);
                let p1 = slot_amplitude(beta, user, 1).powi(2);
                assert!((0.5 * (p0 + p1) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_coupling_yields_a_diagonal_full_rank_system() {
        let code = test_code(8);
        let cfg = config(&code, 5, 0.0, 15.0);
        let eqs = build_system(&cfg, 0);
        for eq in &eqs {
            assert_eq!(eq.equation.a, vec![0, 1, 0]);
            for (j, &x) in eq.row.iter().enumerate() {
                if j == eq.relay {
                    assert!(x != 0);
                } else {
                    assert_eq!(x, 0);
                }
            }
        }
        assert_eq!(system_rank(code.field(), &eqs), 5);
    }

    #[test]
    fn equal_power_relays_share_one_equation() {
        let code = test_code(8);
        let cfg = config(&code, 6, 0.5, 15.0);
        let eqs = build_system(&cfg, 0);
        for eq in &eqs[1..] {
            assert_eq!(eq.equation.a, eqs[0].equation.a);
            assert_eq!(eq.gains, eqs[0].gains);
        }
        // The shared optimum here is a = (1, 2, 1); its circulant polynomial
        // (x + 1)^2 shares the root -1 with x^6 - 1 over Z_7, so the banded
        // system is naturally rank deficient and repair must fix it.
        assert_eq!(eqs[0].equation.a, vec![1, 2, 1]);
        assert_eq!(system_rank(code.field(), &eqs), 5);
        let (repaired, rank) = rank_repair(&cfg, &eqs);
        assert_eq!(rank, 6);
        let swapped = (0..6)
            .filter(|&r| repaired[r].equation.a != eqs[r].equation.a)
            .count();
        assert!(swapped >= 1);
    }

    #[test]
    fn three_cell_system_has_full_rank_at_moderate_coupling() {
        let code = test_code(8);
        let cfg = config(&code, 3, 0.5, 15.0);
        let eqs = build_system(&cfg, 0);
        assert_eq!(system_rank(code.field(), &eqs), 3);
    }

    #[test]
    fn rank_repair_leaves_full_rank_systems_alone() {
        let code = test_code(8);
        let cfg = config(&code, 3, 0.5, 15.0);
        let eqs = build_system(&cfg, 0);
        let (repaired, rank) = rank_repair(&cfg, &eqs);
        assert_eq!(rank, 3);
        assert_eq!(repaired, eqs);
    }

    #[test]
    fn rank_repair_restores_a_forced_degeneracy() {
        let code = test_code(8);
        let cfg = config(&code, 6, 0.0, 20.0);
        let snr = db_to_linear(20.0);
        let mut eqs = build_system(&cfg, 0);
        // Force relays 0 and 1 onto equations whose global rows coincide.
        let field = code.field();
        for (relay, a) in [(0usize, vec![0i64, 1, 1]), (1usize, vec![1i64, 1, 0])] {
            let alpha = mmse_alpha(snr, &eqs[relay].gains, &a);
            let sigma2 = optimal_noise_variance(snr, &eqs[relay].gains, &a);
            eqs[relay].row = relay_row(field, 6, relay, &a);
            eqs[relay].equation = Equation { a, alpha, sigma2 };
        }
        assert_eq!(system_rank(field, &eqs), 5);
        let (repaired, rank) = rank_repair(&cfg, &eqs);
        assert_eq!(rank, 6);
        let changed: Vec<usize> = (0..6)
            .filter(|&r| repaired[r].equation.a != eqs[r].equation.a)
            .collect();
        assert_eq!(changed.len(), 1, "exactly one relay should be swapped");
        // The adopted equation never beats the relay's true optimum.
        let r = changed[0];
        let optimum = best_equation(snr, &repaired[r].gains).sigma2;
        assert!(repaired[r].equation.sigma2 >= optimum - 1e-12);
    }

    #[test]
    fn observed_combination_follows_the_channel_law() {
        // System-level restatement of the front-end equivalence: the relay's
        // quantized output minus the target combination is distributed like
        // the model pmf.
        let code = test_code(1024);
        let cfg = WynerConfig {
            beta: 0.8,
            ..config(&code, 4, 0.4, 12.0)
        };
        let eqs = build_system(&cfg, 0);
        let eq = &eqs[0];
        let p = code.p();
        let n = code.n();
        let snr = db_to_linear(cfg.snr_db);
        let scheme = Modulation::new(p, snr);
        let field = code.field();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let codewords: Vec<Vec<u64>> = (0..3)
            .map(|_| {
                let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..p)).collect();
                code.encode(&w)
            })
            .collect();
        let dithers: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| scheme.random_dither(&mut rng)).collect())
            .collect();
        let signals: Vec<Vec<f64>> = codewords
            .iter()
            .zip(dithers.iter())
            .map(|(c, d)| transmit(&scheme, c, d))
            .collect();
        let y = mac_output(&eq.gains, &signals, &mut rng);
        let received =
            receiver_front_end(&scheme, &y, &dithers, &eq.equation.a, eq.equation.alpha);
        let target = combine_codewords(field, &eq.equation.a, &codewords);
        let mut counts = vec![0.0f64; p as usize];
        for (u, c) in received.iter().zip(target.iter()) {
            counts[field.sub(*u, *c) as usize] += 1.0;
        }
        let model = exact_noise_pmf(&scheme, &eq.gains, &eq.equation.a, eq.equation.alpha);
        let tv: f64 = counts
            .iter()
            .zip(model.probs().iter())
            .map(|(c, m)| (c / n as f64 - m).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.05, "empirical noise deviates from the model, tv = {tv}");
    }

    #[test]
    fn isolated_cells_recover_at_high_snr() {
        let code = test_code(32);
        let cfg = config(&code, 3, 0.0, 30.0);
        for frame in 0..3 {
            let result = run_frame(&cfg, frame);
            assert_eq!(result.rank, 3);
            assert!(result.relay_decoded.iter().all(|&d| d));
            assert!(result.success, "frame {frame} failed");
            assert!(result.recovered.is_some());
        }
    }

    #[test]
    fn frame_replay_is_deterministic() {
        let code = test_code(32);
        let cfg = config(&code, 3, 0.3, 18.0);
        let a = run_frame(&cfg, 5);
        let b = run_frame(&cfg, 5);
        assert_eq!(a, b);
    }

    #[test]
    fn corrupted_relay_row_breaks_recovery() {
        let code = test_code(32);
        let cfg = config(&code, 3, 0.0, 30.0);
        let eqs = build_system(&cfg, 0);
        let field = code.field();
        let p = code.p();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let messages: Vec<Vec<u64>> = (0..3)
            .map(|_| (0..code.k()).map(|_| rng.gen_range(0..p)).collect())
            .collect();
        let codewords: Vec<Vec<u64>> = messages.iter().map(|w| code.encode(w)).collect();
        let mut combinations: Vec<Vec<u64>> = eqs
            .iter()
            .map(|eq| {
                let coeffs: Vec<i64> = eq.row.iter().map(|&x| x as i64).collect();
                combine_codewords(field, &coeffs, &codewords)
            })
            .collect();
        let clean = central_recovery(&code, &eqs, &combinations).unwrap();
        assert_eq!(clean, messages);
        // One corrupted forwarded symbol must surface as a message mismatch.
        combinations[0][0] = field.add(combinations[0][0], 1);
        let dirty = central_recovery(&code, &eqs, &combinations).unwrap();
        assert_ne!(dirty, messages);
    }

    #[test]
    fn sweep_caps_rates_and_reports_pa_gain() {
        let points = sweep(&[0.0, 0.3, 0.6], 15.0, 7, 2.0, 9, None);
        assert_eq!(points.len(), 3);
        for pt in &points {
            assert!(pt.rate_qcof <= 2.0 + 1e-12);
            assert!(pt.rate_cof <= 2.0 + 1e-12);
            assert!(pt.rate_qcof_pa >= pt.rate_qcof - 1e-9);
            assert!(pt.fer.is_nan());
            assert_eq!(pt.frames, 0);
            assert_eq!(pt.csv_row().split(',').count(), 11);
        }
    }

    #[test]
    fn simulated_sweep_point_sees_no_errors_at_high_snr() {
        let code = test_code(32);
        let sim = SimSettings {
            code: &code,
            users: 3,
            beta: 1.0,
            noise_model: NoiseModel::Gaussian,
            max_frames: 8,
        };
        let points = sweep(&[0.0], 25.0, 7, 2.0, 5, Some(&sim));
        assert_eq!(points.len(), 1);
        assert_eq!(points[0].frames, 8);
        assert_eq!(points[0].fer, 0.0);
    }
}
