//! Achievable-rate evaluation.
//!
//! A relay that decodes an integer combination over Z_p sees a discrete
//! additive channel whose capacity-style rate is `log2 p - H(z)`, with z the
//! equivalent noise symbol. This module evaluates that rate for the best
//! integer equation, the unquantized compute-and-forward benchmark
//! `1/2 log2+(SNR / sigma^2)`, and the linear cellular array rates built from
//! the gain vector (gamma, 1, gamma), with and without alternating power
//! allocation.

use crate::channel::{effective_noise_pmf, exact_noise_pmf};
use crate::coeffopt::{best_equation, Equation};
use crate::lattice::Modulation;

/// Which error distribution feeds the rate computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseModel {
    /// Gaussian fit with the matching variance; the standard choice.
    Gaussian,
    /// Full uniform-plus-Gaussian mixture, integrated numerically.
    Exact,
}

/// A rate evaluation at one (channel, SNR, p) operating point.
#[derive(Clone, Debug)]
pub struct RatePoint {
    pub snr_db: f64,
    pub p: u64,
    pub rate_bits: f64,
    pub equation: Equation,
    pub noise_entropy_bits: f64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Shannon entropy of a pmf in bits, with 0 log 0 = 0.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &q in probs {
        assert!((-1e-12..=1.0 + 1e-12).contains(&q), "not a probability: {}", q);
        if q > 0.0 {
            h -= q * q.log2();
        }
    }
    h.max(0.0)
}

/// Computation rate of the best integer equation at gains h: log2 p minus the
/// entropy of the equivalent discrete noise.
pub fn computation_rate(h: &[f64], snr: f64, p: u64, model: NoiseModel) -> RatePoint {
    assert!(snr > 0.0);
    let equation = best_equation(snr, h);
    let scheme = Modulation::new(p, snr);
    let pmf = match model {
        NoiseModel::Gaussian => effective_noise_pmf(&scheme, equation.sigma2.sqrt()),
        NoiseModel::Exact => exact_noise_pmf(&scheme, h, &equation.a, equation.alpha),
    };
    let noise_entropy_bits = entropy_bits(pmf.probs());
    let rate_bits = ((p as f64).log2() - noise_entropy_bits).max(0.0);
    RatePoint {
        snr_db: linear_to_db(snr),
        p,
        rate_bits,
        equation,
        noise_entropy_bits,
    }
}

/// Unquantized compute-and-forward benchmark: 1/2 log2+(SNR / sigma^2) at the
/// same minimizing equation.
pub fn cof_benchmark_rate(h: &[f64], snr: f64) -> f64 {
    assert!(snr > 0.0);
    let equation = best_equation(snr, h);
    0.5 * (snr / equation.sigma2).log2().max(0.0)
}

/// Rate of the cellular array at inter-cell gain gamma: the relay decodes the
/// best equation over gains (gamma, 1, gamma) and forwards it over a backhaul
/// of capacity r0.
pub fn wyner_rate(gamma: f64, snr: f64, p: u64, r0: f64) -> f64 {
    assert!((0.0..=1.0).contains(&gamma));
    assert!(r0 >= 0.0);
    let h = [gamma, 1.0, gamma];
    let point = computation_rate(&h, snr, p, NoiseModel::Gaussian);
    point.rate_bits.min(r0)
}

fn pa_rate_at_beta(gamma: f64, snr: f64, p: u64, beta: f64) -> f64 {
    // Odd cells transmit at power beta P, even cells at (2 - beta) P; the two
    // relay classes then see these effective gain vectors.
    let h_odd = [
        gamma * (2.0 - beta).sqrt(),
        beta.sqrt(),
        gamma * (2.0 - beta).sqrt(),
    ];
    let h_even = [
        gamma * beta.sqrt(),
        (2.0 - beta).sqrt(),
        gamma * beta.sqrt(),
    ];
    let r_odd = computation_rate(&h_odd, snr, p, NoiseModel::Gaussian).rate_bits;
    let r_even = computation_rate(&h_even, snr, p, NoiseModel::Gaussian).rate_bits;
    r_odd.min(r_even)
}

/// Cellular-array rate with alternating power allocation: optimizes the power
/// split beta over [0, 1] (grid step 0.01, then refined to 0.001 around the
/// best point). Returns the rate and the best beta.
pub fn pa_wyner_rate(gamma: f64, snr: f64, p: u64, r0: f64) -> (f64, f64) {
    assert!((0.0..=1.0).contains(&gamma));
    assert!(r0 >= 0.0);
    let mut best_beta = 1.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=100 {
        let beta = i as f64 / 100.0;
        let r = pa_rate_at_beta(gamma, snr, p, beta);
        if r > best {
            best = r;
            best_beta = beta;
        }
    }
    let lo = (best_beta - 0.01).max(0.0);
    let hi = (best_beta + 0.01).min(1.0);
    let steps = ((hi - lo) / 0.001).round() as usize;
    for i in 0..=steps {
        let beta = lo + i as f64 * 0.001;
        let r = pa_rate_at_beta(gamma, snr, p, beta);
        if r > best {
            best = r;
            best_beta = beta;
        }
    }
    (best.min(r0), best_beta)
}
