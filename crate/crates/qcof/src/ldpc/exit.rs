//! Protograph EXIT analysis for symbol-level decoding.
//!
//! Edge beliefs are summarized by a single mutual-information coordinate
//! normalized to [0, 1]. The J curve maps the variance parameter of a
//! symmetric Gaussian belief model to that coordinate; it is estimated once
//! per field size by Monte Carlo on a fixed grid and inverted by
//! interpolation. The per-edge recursion on the base matrix then predicts
//! whether decoding converges, and the decoding threshold is the largest
//! channel noise level that still converges.

use crate::channel::{effective_noise_pmf, standard_normal, NoisePmf};
use crate::lattice::Modulation;
use crate::ldpc::base::BaseMatrix;
use crate::rate::entropy_bits;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Samples for the public one-shot estimator.
const J_SAMPLES: usize = 400_000;
/// Samples per grid point of the cached table.
const TABLE_SAMPLES: usize = 20_000;
/// Convergence target for edge mutual information.
const CONVERGED: f64 = 1.0 - 1e-4;
/// Iteration cap of the EXIT recursion.
const EXIT_ITERATIONS: usize = 1000;

/// Monte Carlo estimate of the J curve at variance parameter `nu`.
///
/// Under the Gaussian belief model the log-likelihood differences of the
/// p - 1 wrong symbols against the right one are jointly normal with mean
/// nu / 2, variance nu, and pairwise covariance nu / 2. Returns the estimate
/// and its standard error; the fixed internal seed makes it reproducible.
pub fn j_function(p: u64, nu: f64) -> (f64, f64) {
    j_mc(p, nu, J_SAMPLES, 0x4a5f_17c3)
}

fn j_mc(p: u64, nu: f64, samples: usize, seed: u64) -> (f64, f64) {
    assert!(p >= 2, "field must have at least two elements");
    assert!(nu >= 0.0 && nu.is_finite(), "variance parameter must be nonnegative");
    if nu == 0.0 {
        return (0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = nu / 2.0;
    let scale = (nu / 2.0).sqrt();
    let ln_p = (p as f64).ln();
    let mut acc = 0.0;
    let mut acc2 = 0.0;
    for _ in 0..samples {
        let g0 = standard_normal(&mut rng);
        let mut sum = 0.0;
        for _ in 1..p {
            let g = standard_normal(&mut rng);
            sum += (-(half + scale * (g + g0))).exp();
        }
        let v = (1.0 + sum).ln() / ln_p;
        acc += v;
        acc2 += v * v;
    }
    let n = samples as f64;
    let mean = acc / n;
    let var = (acc2 / n - mean * mean).max(0.0);
    ((1.0 - mean).clamp(0.0, 1.0), (var / n).sqrt())
}

/// Monotone lookup table for J and its inverse, cached per field size.
struct JTable {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl JTable {
    fn build(p: u64) -> JTable {
        let mut grid = Vec::new();
        let mut nu = 0.0;
        while nu < 10.0 {
            grid.push(nu);
            nu += 0.25;
        }
        while nu < 40.0 {
            grid.push(nu);
            nu += 0.5;
        }
        while nu <= 120.0 + 1e-9 {
            grid.push(nu);
            nu += 1.0;
        }
        let mut values = Vec::with_capacity(grid.len());
        let mut running = 0.0f64;
        for (idx, &nu) in grid.iter().enumerate() {
            let (v, _) = j_mc(p, nu, TABLE_SAMPLES, 0x9e37_79b9 ^ (p << 20) ^ idx as u64);
            running = running.max(v);
            values.push(running);
        }
        JTable { grid, values }
    }

    /// Interpolated J(nu), clamped to the table range.
    fn eval(&self, nu: f64) -> f64 {
        if nu <= 0.0 {
            return 0.0;
        }
        let last = *self.grid.last().unwrap();
        if nu >= last {
            return *self.values.last().unwrap();
        }
        let idx = match self.grid.binary_search_by(|g| g.partial_cmp(&nu).unwrap()) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        let (y0, y1) = (self.values[idx - 1], self.values[idx]);
        y0 + (y1 - y0) * (nu - x0) / (x1 - x0)
    }

    /// Interpolated inverse, clamped to the table range.
    fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let top = *self.values.last().unwrap();
        if y >= top {
            return *self.grid.last().unwrap();
        }
        // First index with value >= y.
        let mut lo = 0usize;
        let mut hi = self.values.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.values[mid] < y {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        if lo == 0 {
            return self.grid[0];
        }
        let (y0, y1) = (self.values[lo - 1], self.values[lo]);
        let (x0, x1) = (self.grid[lo - 1], self.grid[lo]);
        if y1 <= y0 {
            return x1;
        }
        x0 + (x1 - x0) * (y - y0) / (y1 - y0)
    }
}

fn table(p: u64) -> Arc<JTable> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<JTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(p).or_insert_with(|| Arc::new(JTable::build(p))).clone()
}

/// Runs the per-edge EXIT recursion for a channel with symbol mutual
/// information `i_ch` (normalized to [0, 1]) and reports convergence.
pub fn exit_converges(base: &BaseMatrix, p: u64, i_ch: f64) -> bool {
    assert!((0.0..=1.0).contains(&i_ch), "mutual information must lie in [0, 1]");
    let tab = table(p);
    let nu_ch = tab.inverse(i_ch);
    let nc = base.checks();
    let nv = base.vars();
    let cells: Vec<(usize, usize, f64)> = (0..nc)
        .flat_map(|i| (0..nv).map(move |j| (i, j)))
        .filter(|&(i, j)| base.entry(i, j) > 0)
        .map(|(i, j)| (i, j, base.entry(i, j) as f64))
        .collect();
    let mut x_cv: HashMap<(usize, usize), f64> = cells.iter().map(|&(i, j, _)| ((i, j), 0.0)).collect();
    let mut x_vc: HashMap<(usize, usize), f64> = x_cv.clone();
    for _ in 0..EXIT_ITERATIONS {
        // Variable-to-check update.
        for &(i, j, _) in &cells {
            let mut nu = nu_ch;
            for &(i2, j2, mult) in &cells {
                if j2 == j {
                    nu += mult * tab.inverse(x_cv[&(i2, j2)]);
                }
            }
            nu -= tab.inverse(x_cv[&(i, j)]);
            x_vc.insert((i, j), tab.eval(nu));
        }
        // Check-to-variable update.
        for &(i, j, _) in &cells {
            let mut nu = 0.0;
            for &(i2, j2, mult) in &cells {
                if i2 == i {
                    nu += mult * tab.inverse(1.0 - x_vc[&(i2, j2)]);
                }
            }
            nu -= tab.inverse(1.0 - x_vc[&(i, j)]);
            x_cv.insert((i, j), 1.0 - tab.eval(nu));
        }
        if x_vc.values().all(|&x| x >= CONVERGED) {
            return true;
        }
    }
    false
}

/// Symbol mutual information of an additive-noise channel over Z_p.
pub fn channel_information(p: u64, pmf: &NoisePmf) -> f64 {
    let h = entropy_bits(pmf.probs());
    (1.0 - h / (p as f64).log2()).clamp(0.0, 1.0)
}

/// Decoding threshold of a base matrix over Z_p as the largest noise level
/// sigma (in units of the coding lattice scale) whose effective channel
/// still converges under the EXIT recursion.
///
/// The channel family maps sigma to a noise distribution; the default choice
/// for computation coding is `|s| effective_noise_pmf(&scheme, s)` with a
/// unit-scale modulation.
pub fn exit_threshold<F>(base: &BaseMatrix, p: u64, channel: F) -> f64
where
    F: Fn(f64) -> NoisePmf,
{
    let converges = |s: f64| -> bool {
        let pmf = channel(s);
        exit_converges(base, p, channel_information(p, &pmf))
    };
    let mut lo = 1e-3;
    if !converges(lo) {
        return 0.0;
    }
    let mut hi = lo;
    loop {
        hi *= 1.5;
        if !converges(hi) {
            break;
        }
        lo = hi;
        if hi > 1e3 {
            return hi;
        }
    }
    while (hi - lo) / hi > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if converges(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Channel family for computation coding at unit lattice scale.
pub fn unit_scheme_family(p: u64) -> impl Fn(f64) -> NoisePmf {
    move |s: f64| {
        let scheme = Modulation::from_kappa(p, 1.0);
        effective_noise_pmf(&scheme, s)
    }
}
