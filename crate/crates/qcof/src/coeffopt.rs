//! Search for the integer coefficient vector a relay should decode.
//!
//! For channel gains h at a given SNR, scaling the observation by alpha and
//! aiming at the integer vector a leaves the analog error variance
//! `SNR ||alpha h - a||^2 + alpha^2`. Minimizing over alpha first gives a
//! positive definite quadratic form in a alone; minimizing that over nonzero
//! integer vectors is a shortest-vector problem, solved here by LLL reduction
//! followed by Schnorr-Euchner enumeration, which is exact.
//!
//! The quadratic form is evaluated as
//!
//! ```text
//! sigma^2(a) = SNR ||P a||^2 + t (h' a)^2,
//! P = I - hh'/||h||^2,    t = SNR / (||h||^2 (1 + SNR ||h||^2))
//! ```
//!
//! a sum of two nonnegative terms. The textbook closed form subtracts two
//! nearly equal quantities when SNR is large and a is almost aligned with h,
//! exactly the regime the search cares about; this grouping stays accurate
//! there.

/// An integer combining vector with its best scaling and the analog noise
/// variance that pair achieves.
#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub a: Vec<i64>,
    pub alpha: f64,
    pub sigma2: f64,
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

fn dot_ia(a: &[i64], h: &[f64]) -> f64 {
    a.iter().zip(h.iter()).map(|(&x, &y)| x as f64 * y).sum()
}

/// The scaling that minimizes the analog error variance for a fixed a.
pub fn mmse_alpha(snr: f64, h: &[f64], a: &[i64]) -> f64 {
    assert!(snr > 0.0);
    assert!(h.len() == a.len());
    let hh = dot(h, h);
    let ha = dot_ia(a, h);
    snr * ha / (1.0 + snr * hh)
}

/// The analog error variance at the MMSE scaling, evaluated through the
/// cancellation-free grouping described in the module docs.
pub fn optimal_noise_variance(snr: f64, h: &[f64], a: &[i64]) -> f64 {
    assert!(snr > 0.0);
    assert!(h.len() == a.len());
    let hh = dot(h, h);
    if hh == 0.0 {
        let aa: f64 = a.iter().map(|&x| (x * x) as f64).sum();
        return snr * aa;
    }
    let ha = dot_ia(a, h);
    // Residual of a after projecting out the h direction.
    let residual2: f64 = a
        .iter()
        .zip(h.iter())
        .map(|(&al, &hl)| {
            let r = al as f64 - ha * hl / hh;
            r * r
        })
        .sum();
    let t = snr / (hh * (1.0 + snr * hh));
    snr * residual2 + t * ha * ha
}

/// Matrix whose upper-triangular factor R satisfies sigma^2(a) = ||R a||^2:
/// stacks sqrt(SNR) P on top of sqrt(t) h' and triangularizes by Householder
/// reflections.
fn quadratic_form_factor(snr: f64, h: &[f64]) -> Vec<Vec<f64>> {
    let l = h.len();
    let hh = dot(h, h);
    let mut b = vec![vec![0.0; l]; l + 1];
    let s = snr.sqrt();
    for r in 0..l {
        for c in 0..l {
            let proj = if hh > 0.0 { h[r] * h[c] / hh } else { 0.0 };
            b[r][c] = s * ((r == c) as u8 as f64 - proj);
        }
    }
    if hh > 0.0 {
        let t = (snr / (hh * (1.0 + snr * hh))).sqrt();
        for c in 0..l {
            b[l][c] = t * h[c];
        }
    }
    householder_r(&mut b, l)
}

/// In-place Householder QR of an m x l matrix (m >= l); returns the l x l
/// upper-triangular factor with nonnegative diagonal.
fn householder_r(b: &mut [Vec<f64>], l: usize) -> Vec<Vec<f64>> {
    let m = b.len();
    for k in 0..l {
        let norm: f64 = (k..m).map(|r| b[r][k] * b[r][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let sign = if b[k][k] >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (k..m).map(|r| b[r][k]).collect();
        v[0] += sign * norm;
        let vv = dot(&v, &v);
        if vv == 0.0 {
            continue;
        }
        for c in k..l {
            let vb: f64 = (k..m).map(|r| v[r - k] * b[r][c]).sum();
            let f = 2.0 * vb / vv;
            for r in k..m {
                b[r][c] -= f * v[r - k];
            }
        }
    }
    let mut r = vec![vec![0.0; l]; l];
    for i in 0..l {
        let flip = if b[i][i] < 0.0 { -1.0 } else { 1.0 };
        for j in i..l {
            r[i][j] = flip * b[i][j];
        }
    }
    r
}

/// LLL reduction (delta = 0.99) of the lattice spanned by the columns of
/// `basis`. Returns the unimodular transform T with reduced = basis * T.
fn lll_reduce(basis: &mut Vec<Vec<f64>>, delta: f64) -> Vec<Vec<i64>> {
    let n = basis.len();
    let mut t: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| (i == j) as i64).collect())
        .collect();
    if n < 2 {
        return t;
    }

    // Gram-Schmidt data for the current basis, recomputed from scratch; the
    // dimensions here are small enough that clarity wins.
    let gram = |basis: &Vec<Vec<f64>>| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut mu = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut v = basis[i].clone();
            for j in 0..i {
                let denom = dot(&star[j], &star[j]);
                mu[i][j] = if denom > 0.0 {
                    dot(&basis[i], &star[j]) / denom
                } else {
                    0.0
                };
                for (vk, sk) in v.iter_mut().zip(star[j].iter()) {
                    *vk -= mu[i][j] * sk;
                }
            }
            star.push(v);
        }
        (star, mu)
    };

    let mut k = 1;
    let mut guard = 0;
    while k < n {
        guard += 1;
        assert!(guard < 100_000, "basis reduction failed to terminate");
        let (_, mu) = gram(basis);
        // Size-reduce column k against all earlier columns.
        let mut mu_k = mu[k].clone();
        for j in (0..k).rev() {
            let r = mu_k[j].round();
            if r != 0.0 {
                let ri = r as i64;
                for row in 0..basis[k].len() {
                    let bj = basis[j][row];
                    basis[k][row] -= r * bj;
                }
                for row in 0..n {
                    t[k][row] -= ri * t[j][row];
                }
                for jj in 0..j {
                    mu_k[jj] -= r * mu[j][jj];
                }
                mu_k[j] -= r;
            }
        }
        let (star, mu) = gram(basis);
        let lhs = dot(&star[k], &star[k]);
        let rhs = (delta - mu[k][k - 1] * mu[k][k - 1]) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            basis.swap(k, k - 1);
            t.swap(k, k - 1);
            k = k.max(2) - 1;
        }
    }
    t
}

/// Depth-first Schnorr-Euchner enumeration over ||R x||^2 <= radius2 for an
/// upper-triangular R. Visits children in nondecreasing distance order, so a
/// level can stop as soon as its partial sum leaves the sphere.
struct Enumerator<'a> {
    r: &'a [Vec<f64>],
    n: usize,
    radius2: f64,
    shrink: bool,
    found: Vec<(f64, Vec<i64>)>,
}

impl<'a> Enumerator<'a> {
    fn run(r: &'a [Vec<f64>], radius2: f64, shrink: bool) -> Vec<(f64, Vec<i64>)> {
        let n = r.len();
        let mut e = Enumerator { r, n, radius2, shrink, found: Vec::new() };
        let mut x = vec![0i64; n];
        e.descend(n - 1, &mut x, 0.0);
        e.found
    }

    fn descend(&mut self, level: usize, x: &mut Vec<i64>, partial: f64) {
        let rll = self.r[level][level];
        debug_assert!(rll > 0.0);
        let mut center = 0.0;
        for j in level + 1..self.n {
            center -= self.r[level][j] * x[j] as f64;
        }
        center /= rll;
        let base = center.round() as i64;
        let toward = if center >= base as f64 { 1i64 } else { -1 };
        for step in 0.. {
            // 0, +1, -1, +2, -2, ... relative to the rounded center, flipped
            // toward the fractional side first.
            let offset = if step % 2 == 1 {
                (step as i64 + 1) / 2 * toward
            } else {
                -(step as i64 / 2) * toward
            };
            let xi = base + offset;
            let d = rll * (xi as f64 - center);
            let total = partial + d * d;
            if total > self.radius2 {
                if step >= 1 {
                    break;
                }
                continue;
            }
            x[level] = xi;
            if level == 0 {
                if x.iter().any(|&v| v != 0) {
                    if self.shrink {
                        if total < self.radius2 {
                            self.radius2 = total;
                        }
                        self.found.push((total, x.clone()));
                    } else {
                        self.found.push((total, x.clone()));
                    }
                }
            } else {
                self.descend(level - 1, x, total);
            }
        }
        x[level] = 0;
    }
}

/// Flips the sign so the first nonzero entry is positive; a and -a describe
/// the same decodable combination.
fn canonical_sign(a: &mut [i64]) {
    if let Some(first) = a.iter().find(|&&v| v != 0) {
        if *first < 0 {
            for v in a.iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn transform_apply(t: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
    let n = t.len();
    let mut a = vec![0i64; n];
    for (j, &xj) in x.iter().enumerate() {
        if xj != 0 {
            for i in 0..n {
                a[i] += t[j][i] * xj;
            }
        }
    }
    a
}

fn reduced_search_basis(snr: f64, h: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<i64>>) {
    let l = h.len();
    let r = quadratic_form_factor(snr, h);
    // Columns of R as basis vectors.
    let mut basis: Vec<Vec<f64>> = (0..l).map(|j| (0..l).map(|i| r[i][j]).collect()).collect();
    let t = lll_reduce(&mut basis, 0.99);
    // Re-triangularize the reduced basis for the enumeration.
    let mut stacked: Vec<Vec<f64>> = (0..l).map(|i| (0..l).map(|j| basis[j][i]).collect()).collect();
    let rt = householder_r(&mut stacked, l);
    (rt, t)
}

/// The integer vector minimizing the analog noise variance, together with its
/// scaling. The enumeration is exact; the reduction only accelerates it.
pub fn best_equation(snr: f64, h: &[f64]) -> Equation {
    let candidates = enumerate_candidates(snr, h, 1);
    candidates.into_iter().next().expect("search space is never empty")
}

/// The `count` best combining vectors in increasing noise-variance order,
/// counting a and -a once. Grows the search radius until enough distinct
/// vectors are inside.
pub fn enumerate_candidates(snr: f64, h: &[f64], count: usize) -> Vec<Equation> {
    assert!(!h.is_empty());
    assert!(count >= 1);
    let (rt, t) = reduced_search_basis(snr, h);
    let l = h.len();
    let mut radius2 = (0..l)
        .map(|j| (0..l).map(|i| rt[i][j] * rt[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
        * (1.0 + 1e-9);
    for _ in 0..64 {
        let leaves = Enumerator::run(&rt, radius2, false);
        let mut seen: Vec<Equation> = Vec::new();
        for (_, x) in leaves {
            let mut a = transform_apply(&t, &x);
            canonical_sign(&mut a);
            if seen.iter().any(|e| e.a == a) {
                continue;
            }
            let sigma2 = optimal_noise_variance(snr, h, &a);
            let alpha = mmse_alpha(snr, h, &a);
            seen.push(Equation { a, alpha, sigma2 });
        }
        if seen.len() >= count {
            seen.sort_by(|p, q| {
                p.sigma2
                    .partial_cmp(&q.sigma2)
                    .unwrap()
                    .then_with(|| p.a.cmp(&q.a))
            });
            seen.truncate(count);
            return seen;
        }
        radius2 *= 2.0;
    }
    panic!("radius growth exhausted before finding {} candidates", count);
}
