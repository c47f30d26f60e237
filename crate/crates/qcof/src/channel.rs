//! The transmit pipeline, the Gaussian multiple access channel, the quantized
//! receiver front end, and the equivalent discrete additive channel.
//!
//! Each of L users sends a dithered constellation point. A relay observing
//! the superposition scales by alpha, subtracts the integer-weighted dithers,
//! and collapses the result to a field symbol. The output then behaves like
//! the intended combination of the transmitted symbols plus a discrete noise
//! term `z`, whose distribution is available in two forms:
//!
//! * [`effective_noise_pmf`] treats the analog error as a Gaussian with the
//!   matching variance and folds its density into the quantizer cells;
//! * [`exact_noise_pmf`] uses the true error density, the convolution of L
//!   uniform self-interference terms with the scaled receiver noise, and
//!   integrates it numerically over every cell.

use crate::field::PrimeField;
use crate::lattice::Modulation;
use rand::Rng;
use std::f64::consts::{PI, SQRT_2};

/// Draws a standard normal variate (Box-Muller).
pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Discrete distribution of the equivalent channel noise over Z_p.
#[derive(Clone, Debug)]
pub struct NoisePmf {
    probs: Vec<f64>,
    sigma_eps: f64,
}

impl NoisePmf {
    fn from_raw(mut probs: Vec<f64>, sigma_eps: f64) -> Self {
        for p in probs.iter_mut() {
            assert!(*p > -1e-9, "cell mass went negative: {}", p);
            if *p < 0.0 {
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-8, "cell masses sum to {}", sum);
        for p in probs.iter_mut() {
            *p /= sum;
        }
        NoisePmf { probs, sigma_eps }
    }

    /// Probability of each symbol, indexed by the canonical representative.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Standard deviation of the analog error the pmf was derived from.
    pub fn sigma_eps(&self) -> f64 {
        self.sigma_eps
    }

    /// Draws one symbol by inverting the cumulative distribution.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let mut t = rng.gen::<f64>();
        for (i, &q) in self.probs.iter().enumerate() {
            t -= q;
            if t <= 0.0 {
                return i as u64;
            }
        }
        (self.probs.len() - 1) as u64
    }
}

/// Maps a codeword to channel inputs under the given dither sequence.
pub fn transmit(scheme: &Modulation, codeword: &[u64], dither: &[f64]) -> Vec<f64> {
    assert!(codeword.len() == dither.len(), "lengths must match");
    codeword
        .iter()
        .zip(dither.iter())
        .map(|(&c, &d)| scheme.transmit(c, d))
        .collect()
}

/// Noiseless superposition sum_l h_l x_l of the users' signals.
pub fn superimpose(h: &[f64], x: &[Vec<f64>]) -> Vec<f64> {
    assert!(h.len() == x.len(), "one gain per user");
    assert!(!x.is_empty());
    let n = x[0].len();
    let mut y = vec![0.0; n];
    for (hl, xl) in h.iter().zip(x.iter()) {
        assert!(xl.len() == n, "signal lengths must match");
        for (yi, &xi) in y.iter_mut().zip(xl.iter()) {
            *yi += hl * xi;
        }
    }
    y
}

/// Multiple access channel output: superposition plus unit-variance Gaussian
/// noise.
pub fn mac_output<R: Rng>(h: &[f64], x: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
    let mut y = superimpose(h, x);
    for yi in y.iter_mut() {
        *yi += standard_normal(rng);
    }
    y
}

/// Quantized receiver front end: scales the observation, removes the integer
/// combination of the dithers, and collapses each sample to a field symbol.
pub fn receiver_front_end(
    scheme: &Modulation,
    y: &[f64],
    dithers: &[Vec<f64>],
    a: &[i64],
    alpha: f64,
) -> Vec<u64> {
    assert!(dithers.len() == a.len(), "one coefficient per user");
    y.iter()
        .enumerate()
        .map(|(i, &yi)| {
            let mut s = alpha * yi;
            for (al, dl) in a.iter().zip(dithers.iter()) {
                s -= *al as f64 * dl[i];
            }
            scheme.quantize_to_symbol(s)
        })
        .collect()
}

/// The combination of codewords a relay aims to decode: sum_l (a_l mod p) c_l
/// over Z_p, applied per position.
pub fn combine_codewords(field: PrimeField, a: &[i64], codewords: &[Vec<u64>]) -> Vec<u64> {
    assert!(a.len() == codewords.len(), "one coefficient per codeword");
    assert!(!codewords.is_empty());
    let n = codewords[0].len();
    let mut out = vec![0u64; n];
    for (al, cl) in a.iter().zip(codewords.iter()) {
        assert!(cl.len() == n, "codeword lengths must match");
        let ql = field.reduce(*al);
        for (oi, &ci) in out.iter_mut().zip(cl.iter()) {
            *oi = field.add(*oi, field.mul(ql, ci));
        }
    }
    out
}

/// Variance of the analog error at a relay: SNR * ||alpha h - a||^2 + alpha^2.
pub fn noise_variance(snr: f64, h: &[f64], a: &[i64], alpha: f64) -> f64 {
    assert!(h.len() == a.len(), "dimension mismatch");
    assert!(snr > 0.0);
    let mismatch: f64 = h
        .iter()
        .zip(a.iter())
        .map(|(&hl, &al)| {
            let d = alpha * hl - al as f64;
            d * d
        })
        .sum();
    snr * mismatch + alpha * alpha
}

/// Gaussian probability mass on the interval [lo, hi) for N(0, sigma^2),
/// evaluated through erf or erfc so that far tails keep relative accuracy.
fn normal_cell_mass(lo: f64, hi: f64, sigma: f64) -> f64 {
    debug_assert!(lo <= hi);
    let a = lo / (sigma * SQRT_2);
    let b = hi / (sigma * SQRT_2);
    if a >= 0.0 {
        0.5 * (libm::erfc(a) - libm::erfc(b))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b) - libm::erfc(-a))
    } else {
        0.5 * (libm::erf(b) - libm::erf(a))
    }
}

/// Noise pmf under the Gaussian approximation: fold a N(0, sigma_eps^2)
/// density into the quantizer cells of each symbol label.
pub fn effective_noise_pmf(scheme: &Modulation, sigma_eps: f64) -> NoisePmf {
    assert!(sigma_eps > 0.0, "noise deviation must be positive");
    let p = scheme.field().order();
    let kappa = scheme.kappa();
    let period = kappa * p as f64;
    // Beyond this many folds the remaining mass is far below the truncation
    // threshold of 1e-15 per term.
    let fold_cap = (12.0 * sigma_eps / period).ceil() as i64 + 2;
    let mut probs = vec![0.0; p as usize];
    for u in 0..p {
        let j = scheme.field().centered(u) as f64;
        let mut total = 0.0;
        let mut k = 0i64;
        loop {
            let up = cell_mass_at(j + (k * p as i64) as f64, kappa, sigma_eps);
            let down = if k == 0 {
                0.0
            } else {
                cell_mass_at(j - (k * p as i64) as f64, kappa, sigma_eps)
            };
            total += up + down;
            if (up < 1e-15 && down < 1e-15 && k >= 1) || k > fold_cap {
                break;
            }
            k += 1;
        }
        probs[u as usize] = total;
    }
    NoisePmf::from_raw(probs, sigma_eps)
}

fn cell_mass_at(label: f64, kappa: f64, sigma: f64) -> f64 {
    normal_cell_mass(kappa * (label - 0.5), kappa * (label + 0.5), sigma)
}

/// Density and distribution function of a sum of independent uniforms on
/// [-w_l, w_l], by inclusion-exclusion over the corner shifts. Piecewise
/// polynomial of degree L-1 with breakpoints at the 2^L signed width sums.
struct UniformSum {
    w: Vec<f64>,
    density_norm: f64,
    cdf_norm: f64,
}

fn positive_power(x: f64, k: usize) -> f64 {
    if x > 0.0 {
        x.powi(k as i32)
    } else {
        0.0
    }
}

impl UniformSum {
    fn new(w: Vec<f64>) -> Self {
        assert!(!w.is_empty() && w.len() <= 24, "unsupported component count");
        assert!(w.iter().all(|&x| x > 0.0));
        let volume: f64 = w.iter().map(|&x| 2.0 * x).product();
        let l = w.len();
        let factorial = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        UniformSum {
            w,
            density_norm: factorial(l - 1) * volume,
            cdf_norm: factorial(l) * volume,
        }
    }

    fn corner_sum(&self, t: f64, mask: usize) -> f64 {
        let mut s = t;
        for (l, &wl) in self.w.iter().enumerate() {
            if mask >> l & 1 == 1 {
                s -= wl;
            } else {
                s += wl;
            }
        }
        s
    }

    fn density(&self, t: f64) -> f64 {
        let l = self.w.len();
        let mut acc = 0.0;
        for mask in 0..1usize << l {
            let term = positive_power(self.corner_sum(t, mask), l - 1);
            if mask.count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        (acc / self.density_norm).max(0.0)
    }

    fn cdf(&self, t: f64) -> f64 {
        let l = self.w.len();
        let mut acc = 0.0;
        for mask in 0..1usize << l {
            let term = positive_power(self.corner_sum(t, mask), l);
            if mask.count_ones() % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        (acc / self.cdf_norm).clamp(0.0, 1.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let l = self.w.len();
        let mut pts: Vec<f64> = (0..1usize << l).map(|m| self.corner_sum(0.0, m)).collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        pts
    }

    fn half_support(&self) -> f64 {
        self.w.iter().sum()
    }
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Integrates f over [a, b] splitting at the supplied interior points, with
/// adaptive refinement inside each piece.
fn integrate_piecewise(f: &impl Fn(f64) -> f64, a: f64, b: f64, splits: &[f64], tol: f64) -> f64 {
    assert!(a <= b);
    if a == b {
        return 0.0;
    }
    let mut edges = vec![a];
    for &s in splits {
        if s > a && s < b {
            edges.push(s);
        }
    }
    edges.push(b);
    edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for win in edges.windows(2) {
        let (lo, hi) = (win[0], win[1]);
        if hi - lo < 1e-300 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = simpson(lo, hi, flo, fmid, fhi);
        total += adaptive_simpson(f, lo, hi, flo, fmid, fhi, whole, tol * (hi - lo) / (b - a), 40);
    }
    total
}

/// Noise pmf from the exact error density: the analog error is the sum of L
/// uniform self-interference terms of half-width sqrt(3 SNR)|alpha h_l - a_l|
/// and a Gaussian of deviation |alpha|, folded into the quantizer cells by
/// numerical integration.
pub fn exact_noise_pmf(scheme: &Modulation, h: &[f64], a: &[i64], alpha: f64) -> NoisePmf {
    assert!(h.len() == a.len(), "dimension mismatch");
    let p = scheme.field().order();
    let kappa = scheme.kappa();
    let snr = scheme.snr();
    let sigma_eps = noise_variance(snr, h, a, alpha).sqrt();
    let gauss = alpha.abs();

    let widths: Vec<f64> = h
        .iter()
        .zip(a.iter())
        .map(|(&hl, &al)| (3.0 * snr).sqrt() * (alpha * hl - al as f64).abs())
        .collect();
    // Components narrower than this contribute less than the integration
    // tolerance; keeping them would poison the inclusion-exclusion sums.
    let drop = 1e-12 * kappa.max(widths.iter().cloned().fold(0.0, f64::max));
    let kept: Vec<f64> = widths.into_iter().filter(|&w| w > drop).collect();

    if kept.is_empty() {
        if gauss <= 1e-15 * kappa {
            // No noise at all: the quantizer returns the zero symbol.
            let mut probs = vec![0.0; p as usize];
            probs[0] = 1.0;
            return NoisePmf::from_raw(probs, sigma_eps);
        }
        let mut pmf = effective_noise_pmf(scheme, gauss);
        pmf.sigma_eps = sigma_eps;
        return pmf;
    }

    let sum = UniformSum::new(kept);
    let half = sum.half_support();
    let breaks = sum.breakpoints();
    let reach = half + 12.0 * gauss;

    let mut probs = vec![0.0; p as usize];
    for u in 0..p {
        let j = scheme.field().centered(u);
        let mut total = 0.0;
        // Every fold of this label whose cell comes close to the support.
        let k_lo = ((-reach / kappa - j as f64 - 0.5) / p as f64).floor() as i64;
        let k_hi = ((reach / kappa - j as f64 + 0.5) / p as f64).ceil() as i64;
        for k in k_lo..=k_hi {
            let label = (j + k * p as i64) as f64;
            let lo = kappa * (label - 0.5);
            let hi = kappa * (label + 0.5);
            if lo > reach || hi < -reach {
                continue;
            }
            if gauss <= 1e-12 * kappa.min(half) {
                // Receiver noise is negligible next to the self-interference:
                // integrate the uniform-sum density alone, in closed form.
                total += sum.cdf(hi) - sum.cdf(lo);
            } else {
                // Mass of the cell under the Gaussian centered at each error
                // value s, weighted by the density of s.
                let from = (-half).max(lo - 12.0 * gauss);
                let to = half.min(hi + 12.0 * gauss);
                if from < to {
                    let f = |s: f64| sum.density(s) * normal_cell_mass(lo - s, hi - s, gauss);
                    total += integrate_piecewise(&f, from, to, &breaks, 1e-12);
                }
            }
        }
        probs[u as usize] = total;
    }
    NoisePmf::from_raw(probs, sigma_eps)
}
