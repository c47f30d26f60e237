//! Symbol-level sum-product decoding.
//!
//! Messages are full probability vectors over Z_p. Variable nodes multiply
//! incoming beliefs pointwise with the channel prior; check nodes convolve
//! the coefficient-adjusted beliefs cyclically. Convolutions run directly
//! for small fields and through a length-p Fourier transform for large ones.
//! Hard decisions are tested against the parity checks after every variable
//! pass, so a noiseless word is accepted in one iteration.

use crate::ldpc::lift::LiftedCode;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Largest field decoded with direct convolutions.
const DIRECT_CONV_LIMIT: u64 = 17;

/// Result of a belief-propagation decode attempt.
#[derive(Debug, Clone, PartialEq)]
pub enum DecodeOutcome {
    /// A codeword satisfying every check, with the iteration that found it.
    Decoded { codeword: Vec<u64>, iterations: usize },
    /// No codeword found; reports the final count of violated checks.
    Failed { iterations: usize, unsatisfied: usize },
}

impl DecodeOutcome {
    /// True when decoding produced a valid codeword.
    pub fn is_decoded(&self) -> bool {
        matches!(self, DecodeOutcome::Decoded { .. })
    }
}

struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Reusable decoder state for one code.
pub struct BpDecoder<'a> {
    code: &'a LiftedCode,
    p: usize,
    edge_coeff: Vec<u64>,
    edge_inv: Vec<u64>,
    check_start: Vec<usize>,
    var_edges: Vec<Vec<u32>>,
    msg_vc: Vec<f64>,
    msg_cv: Vec<f64>,
    posterior: Vec<f64>,
    hard: Vec<u64>,
    fft: Option<FftPair>,
}

impl<'a> BpDecoder<'a> {
    /// Prepares edge tables and transform plans for `code`.
    pub fn new(code: &'a LiftedCode) -> Self {
        let p = code.p() as usize;
        let field = code.field();
        let n = code.n();
        let mut edge_var = Vec::new();
        let mut edge_coeff = Vec::new();
        let mut edge_inv = Vec::new();
        let mut check_start = Vec::with_capacity(code.row_entries().len() + 1);
        let mut var_edges: Vec<Vec<u32>> = vec![Vec::new(); n];
        check_start.push(0);
        for row in code.row_entries() {
            for &(v, coeff) in row {
                var_edges[v].push(edge_var.len() as u32);
                edge_var.push(v);
                edge_coeff.push(coeff);
                edge_inv.push(field.inv(coeff));
            }
            check_start.push(edge_var.len());
        }
        let edges = edge_var.len();
        let fft = if code.p() > DIRECT_CONV_LIMIT {
            let mut planner = FftPlanner::new();
            Some(FftPair {
                forward: planner.plan_fft_forward(p),
                inverse: planner.plan_fft_inverse(p),
            })
        } else {
            None
        };
        BpDecoder {
            code,
            p,
            edge_coeff,
            edge_inv,
            check_start,
            var_edges,
            msg_vc: vec![0.0; edges * p],
            msg_cv: vec![0.0; edges * p],
            posterior: vec![0.0; n * p],
            hard: vec![0; n],
            fft,
        }
    }

    /// Runs sum-product decoding of a received word under a channel noise
    /// distribution `channel[z] = P(noise = z)`.
    pub fn decode(&mut self, received: &[u64], channel: &[f64], max_iter: usize) -> DecodeOutcome {
        assert!(max_iter >= 1, "need at least one iteration");
        let priors = self.priors(received, channel);
        let p = self.p;
        self.msg_cv.fill(1.0 / p as f64);
        for it in 1..=max_iter {
            self.variable_pass(&priors);
            self.hard_decision();
            let unsatisfied = self.code.unsatisfied_checks(&self.hard);
            if unsatisfied == 0 {
                return DecodeOutcome::Decoded { codeword: self.hard.clone(), iterations: it };
            }
            if it == max_iter {
                return DecodeOutcome::Failed { iterations: it, unsatisfied };
            }
            self.check_pass();
        }
        unreachable!("loop always returns");
    }

    /// Runs a fixed number of full iterations and returns the per-symbol
    /// posterior distributions, without early stopping.
    pub fn posteriors(&mut self, received: &[u64], channel: &[f64], iterations: usize) -> Vec<Vec<f64>> {
        let priors = self.priors(received, channel);
        let p = self.p;
        self.msg_cv.fill(1.0 / p as f64);
        for _ in 0..iterations {
            self.variable_pass(&priors);
            self.check_pass();
        }
        self.variable_pass(&priors);
        (0..self.code.n())
            .map(|v| self.posterior[v * p..(v + 1) * p].to_vec())
            .collect()
    }

    fn priors(&self, received: &[u64], channel: &[f64]) -> Vec<f64> {
        let p = self.p;
        let n = self.code.n();
        assert_eq!(received.len(), n, "received word length must equal n");
        assert_eq!(channel.len(), p, "channel distribution must have p entries");
        assert!(channel.iter().all(|&x| x >= 0.0 && x.is_finite()));
        let total: f64 = channel.iter().sum();
        assert!(total > 0.0, "channel distribution must have positive mass");
        let mut priors = vec![0.0; n * p];
        for v in 0..n {
            let u = received[v] as usize;
            assert!(u < p, "received symbols must lie in Z_p");
            for x in 0..p {
                // P(sym = x | received u) is proportional to P(noise = u - x).
                priors[v * p + x] = channel[(u + p - x) % p] / total;
            }
        }
        priors
    }

    fn variable_pass(&mut self, priors: &[f64]) {
        let p = self.p;
        let mut pre: Vec<f64> = Vec::new();
        let mut out = vec![0.0; p];
        for v in 0..self.code.n() {
            let edges = &self.var_edges[v];
            let d = edges.len();
            pre.resize((d + 1) * p, 0.0);
            pre[..p].copy_from_slice(&priors[v * p..(v + 1) * p]);
            for (k, &e) in edges.iter().enumerate() {
                let e = e as usize;
                for x in 0..p {
                    pre[(k + 1) * p + x] = pre[k * p + x] * self.msg_cv[e * p + x];
                }
            }
            normalize(&mut pre[d * p..(d + 1) * p]);
            self.posterior[v * p..(v + 1) * p].copy_from_slice(&pre[d * p..(d + 1) * p]);
            // Leave-one-out products via a running suffix.
            let mut suf = vec![1.0; p];
            for (k, &e) in edges.iter().enumerate().rev() {
                let e = e as usize;
                for x in 0..p {
                    out[x] = pre[k * p + x] * suf[x];
                }
                normalize(&mut out);
                self.msg_vc[e * p..(e + 1) * p].copy_from_slice(&out);
                for x in 0..p {
                    suf[x] *= self.msg_cv[e * p + x];
                }
            }
        }
    }

    fn hard_decision(&mut self) {
        let p = self.p;
        for v in 0..self.code.n() {
            let post = &self.posterior[v * p..(v + 1) * p];
            let mut best = 0usize;
            for x in 1..p {
                if post[x] > post[best] {
                    best = x;
                }
            }
            self.hard[v] = best as u64;
        }
    }

    fn check_pass(&mut self) {
        if self.fft.is_some() {
            self.check_pass_fft();
        } else {
            self.check_pass_direct();
        }
    }

    /// Direct cyclic convolutions, O(d p^2) per check.
    fn check_pass_direct(&mut self) {
        let p = self.p;
        let m = self.check_start.len() - 1;
        let mut t: Vec<f64> = Vec::new();
        let mut pre: Vec<f64> = Vec::new();
        let mut suf: Vec<f64> = Vec::new();
        let mut combined = vec![0.0; p];
        for c in 0..m {
            let (start, end) = (self.check_start[c], self.check_start[c + 1]);
            let d = end - start;
            if d == 0 {
                continue;
            }
            t.resize(d * p, 0.0);
            for (k, e) in (start..end).enumerate() {
                // Belief about h_e * x: permute by the inverse coefficient.
                let inv = self.edge_inv[e];
                for y in 0..p {
                    let src = (inv as usize * y) % p;
                    t[k * p + y] = self.msg_vc[e * p + src];
                }
            }
            pre.resize((d + 1) * p, 0.0);
            suf.resize((d + 1) * p, 0.0);
            pre[..p].fill(0.0);
            pre[0] = 1.0;
            for k in 0..d {
                let (lo, hi) = pre.split_at_mut((k + 1) * p);
                cyclic_conv(&lo[k * p..(k + 1) * p], &t[k * p..(k + 1) * p], &mut hi[..p]);
            }
            suf[d * p..(d + 1) * p].fill(0.0);
            suf[d * p] = 1.0;
            for k in (0..d).rev() {
                let (lo, hi) = suf.split_at_mut((k + 1) * p);
                cyclic_conv(&hi[..p], &t[k * p..(k + 1) * p], &mut lo[k * p..(k + 1) * p]);
            }
            for (k, e) in (start..end).enumerate() {
                cyclic_conv(&pre[k * p..(k + 1) * p], &suf[(k + 1) * p..(k + 2) * p], &mut combined);
                // S is the belief about the sum of the other terms; the check
                // forces h_e x = -S.
                let h = self.edge_coeff[e] as usize;
                let out = &mut self.msg_cv[e * p..(e + 1) * p];
                for x in 0..p {
                    let target = (p - h * x % p) % p;
                    out[x] = combined[target];
                }
                normalize(out);
            }
        }
    }

    /// Fourier-domain convolutions, O(d p log p) per check.
    fn check_pass_fft(&mut self) {
        let p = self.p;
        let fft = self.fft.as_ref().unwrap();
        let m = self.check_start.len() - 1;
        let zero = Complex::new(0.0, 0.0);
        let one = Complex::new(1.0, 0.0);
        let mut tf: Vec<Complex<f64>> = Vec::new();
        let mut pre: Vec<Complex<f64>> = Vec::new();
        let mut suf: Vec<Complex<f64>> = Vec::new();
        let mut work = vec![zero; p];
        for c in 0..m {
            let (start, end) = (self.check_start[c], self.check_start[c + 1]);
            let d = end - start;
            if d == 0 {
                continue;
            }
            tf.resize(d * p, zero);
            for (k, e) in (start..end).enumerate() {
                let inv = self.edge_inv[e];
                for y in 0..p {
                    let src = (inv as usize * y) % p;
                    tf[k * p + y] = Complex::new(self.msg_vc[e * p + src], 0.0);
                }
                fft.forward.process(&mut tf[k * p..(k + 1) * p]);
            }
            pre.resize((d + 1) * p, zero);
            suf.resize((d + 1) * p, zero);
            pre[..p].fill(one);
            for k in 0..d {
                for x in 0..p {
                    pre[(k + 1) * p + x] = pre[k * p + x] * tf[k * p + x];
                }
            }
            suf[d * p..(d + 1) * p].fill(one);
            for k in (0..d).rev() {
                for x in 0..p {
                    suf[k * p + x] = suf[(k + 1) * p + x] * tf[k * p + x];
                }
            }
            for (k, e) in (start..end).enumerate() {
                for x in 0..p {
                    work[x] = pre[k * p + x] * suf[(k + 1) * p + x];
                }
                fft.inverse.process(&mut work);
                let h = self.edge_coeff[e] as usize;
                let out = &mut self.msg_cv[e * p..(e + 1) * p];
                for x in 0..p {
                    let target = (p - h * x % p) % p;
                    out[x] = work[target].re.max(0.0);
                }
                normalize(out);
            }
        }
    }
}

fn normalize(v: &mut [f64]) {
    let mut total = 0.0;
    for x in v.iter_mut() {
        if !x.is_finite() || *x < 0.0 {
            *x = 0.0;
        }
        total += *x;
    }
    if total > 0.0 {
        for x in v.iter_mut() {
            *x /= total;
        }
    } else {
        let u = 1.0 / v.len() as f64;
        v.fill(u);
    }
}

fn cyclic_conv(a: &[f64], b: &[f64], out: &mut [f64]) {
    let p = a.len();
    out.fill(0.0);
    for (y, &av) in a.iter().enumerate() {
        if av == 0.0 {
            continue;
        }
        for (w, &bv) in b.iter().enumerate() {
            let x = y + w;
            let x = if x >= p { x - p } else { x };
            out[x] += av * bv;
        }
    }
}

/// One-shot sum-product decode of `received` under `channel`.
pub fn bp_decode(
    code: &LiftedCode,
    received: &[u64],
    channel: &[f64],
    max_iter: usize,
) -> DecodeOutcome {
    BpDecoder::new(code).decode(received, channel, max_iter)
}

/// Per-symbol posteriors after a fixed number of iterations.
pub fn bp_posteriors(
    code: &LiftedCode,
    received: &[u64],
    channel: &[f64],
    iterations: usize,
) -> Vec<Vec<f64>> {
    BpDecoder::new(code).posteriors(received, channel, iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::effective_noise_pmf;
    use crate::field::PrimeField;
    use crate::lattice::Modulation;
    use crate::ldpc::base::ra_base;
    use crate::ldpc::lift::lift;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn sample_pmf(probs: &[f64], rng: &mut StdRng) -> u64 {
        let mut t = rng.gen::<f64>();
        for (i, &q) in probs.iter().enumerate() {
            t -= q;
            if t <= 0.0 {
                return i as u64;
            }
        }
        (probs.len() - 1) as u64
    }

    fn brute_posteriors(
        p: u64,
        rows: &[Vec<(usize, u64)>],
        n: usize,
        received: &[u64],
        channel: &[f64],
    ) -> Vec<Vec<f64>> {
        let f = PrimeField::new(p);
        let mut post = vec![vec![0.0; p as usize]; n];
        let mut x = vec![0u64; n];
        loop {
            let valid = rows.iter().all(|row| {
                let mut acc = 0;
                for &(v, coeff) in row {
                    acc = f.add(acc, f.mul(coeff, x[v]));
                }
                acc == 0
            });
            if valid {
                let mut weight = 1.0;
                for i in 0..n {
                    weight *= channel[((received[i] + p - x[i]) % p) as usize];
                }
                for i in 0..n {
                    post[i][x[i] as usize] += weight;
                }
            }
            // Odometer over Z_p^n.
            let mut pos = 0;
            loop {
                if pos == n {
                    for row in post.iter_mut() {
                        let total: f64 = row.iter().sum();
                        for q in row.iter_mut() {
                            *q /= total;
                        }
                    }
                    return post;
                }
                x[pos] += 1;
                if x[pos] < p {
                    break;
                }
                x[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn noiseless_word_accepted_in_one_iteration() {
        let base = ra_base(1, 2).unwrap();
        let code = lift(&base, 7, 16, 2).unwrap();
        let mut channel = vec![0.0; 7];
        channel[0] = 1.0;
        let mut rng = StdRng::seed_from_u64(3);
        let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..7)).collect();
        let c = code.encode(&w);
        match bp_decode(&code, &c, &channel, 50) {
            DecodeOutcome::Decoded { codeword, iterations } => {
                assert_eq!(codeword, c);
                assert_eq!(iterations, 1);
            }
            DecodeOutcome::Failed { .. } => panic!("noiseless decode failed"),
        }
    }

    #[test]
    fn tree_posteriors_match_enumeration() {
        // A cycle-free check matrix over Z_5.
        let rows = vec![
            vec![(0, 1u64), (1, 2), (2, 3)],
            vec![(2, 4), (3, 1), (4, 2)],
        ];
        let code = LiftedCode::from_rows(5, 5, rows.clone());
        let channel = vec![0.5, 0.2, 0.1, 0.1, 0.1];
        let received = vec![1, 4, 0, 2, 3];
        let exact = brute_posteriors(5, &rows, 5, &received, &channel);
        let bp = bp_posteriors(&code, &received, &channel, 10);
        for (a, b) in bp.iter().zip(exact.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-9, "posterior mismatch: {x} vs {y}");
            }
        }
    }

    #[test]
    fn tree_posteriors_match_enumeration_large_prime() {
        // Exercises the Fourier check pass (p > 17) on a small tree.
        let rows = vec![vec![(0, 3u64), (1, 7)], vec![(1, 1), (2, 18)]];
        let code = LiftedCode::from_rows(19, 3, rows.clone());
        let mut channel = vec![0.0; 19];
        let mut rng = StdRng::seed_from_u64(4);
        let mut total = 0.0;
        for q in channel.iter_mut() {
            *q = rng.gen::<f64>();
            total += *q;
        }
        for q in channel.iter_mut() {
            *q /= total;
        }
        let received = vec![5, 11, 2];
        let exact = brute_posteriors(19, &rows, 3, &received, &channel);
        let bp = bp_posteriors(&code, &received, &channel, 8);
        for (a, b) in bp.iter().zip(exact.iter()) {
            for (x, y) in a.iter().zip(b.iter()) {
                assert!((x - y).abs() < 1e-9, "posterior mismatch: {x} vs {y}");
            }
        }
    }

    #[test]
    fn moderate_noise_is_corrected() {
        let base = ra_base(1, 2).unwrap();
        let code = lift(&base, 7, 256, 5).unwrap();
        let scheme = Modulation::from_kappa(7, 1.0);
        let pmf = effective_noise_pmf(&scheme, 0.22);
        let mut rng = StdRng::seed_from_u64(11);
        let field = code.field();
        for trial in 0..5 {
            let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..7)).collect();
            let c = code.encode(&w);
            let received: Vec<u64> = c
                .iter()
                .map(|&x| field.add(x, sample_pmf(pmf.probs(), &mut rng)))
                .collect();
            let outcome = bp_decode(&code, &received, pmf.probs(), 100);
            match outcome {
                DecodeOutcome::Decoded { codeword, .. } => assert_eq!(codeword, c),
                DecodeOutcome::Failed { .. } => panic!("decode failed on trial {trial}"),
            }
        }
    }

    #[test]
    fn hopeless_noise_reports_failure() {
        let base = ra_base(1, 2).unwrap();
        let code = lift(&base, 7, 64, 6).unwrap();
        let scheme = Modulation::from_kappa(7, 1.0);
        // Noise far above the decoding threshold of the rate-1/2 family.
        let pmf = effective_noise_pmf(&scheme, 1.2);
        let mut rng = StdRng::seed_from_u64(13);
        let field = code.field();
        let w: Vec<u64> = (0..code.k()).map(|_| rng.gen_range(0..7)).collect();
        let c = code.encode(&w);
        let received: Vec<u64> = c
            .iter()
            .map(|&x| field.add(x, sample_pmf(pmf.probs(), &mut rng)))
            .collect();
        match bp_decode(&code, &received, pmf.probs(), 20) {
            DecodeOutcome::Decoded { .. } => panic!("noise above threshold should not decode"),
            DecodeOutcome::Failed { iterations, unsatisfied } => {
                assert_eq!(iterations, 20);
                assert!(unsatisfied > 0);
            }
        }
    }
}
