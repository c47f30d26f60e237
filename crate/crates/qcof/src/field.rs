//! Arithmetic and linear algebra over the prime field Z_p.
//!
//! Elements are stored as canonical representatives in `0..p`. The field also
//! provides the signed labeling used by the modulation layer: every symbol
//! maps to its centered representative in `[-p/2, p/2)`, so for odd p the
//! labels are `-(p-1)/2 ..= (p-1)/2` and for p = 2 they are `{0, -1}`.

/// Arithmetic over Z_p for a prime modulus p.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    /// Creates the field Z_p. Panics if `p` is not prime.
    pub fn new(p: u64) -> Self {
        assert!(is_prime(p), "modulus {} is not prime", p);
        PrimeField { p }
    }

    /// The field order p.
    pub fn order(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary integer to its canonical representative in `0..p`.
    pub fn reduce(&self, n: i64) -> u64 {
        n.rem_euclid(self.p as i64) as u64
    }

    /// Maps a symbol to its centered representative in `[-p/2, p/2)`.
    pub fn centered(&self, a: u64) -> i64 {
        assert!(a < self.p);
        if 2 * a >= self.p {
            a as i64 - self.p as i64
        } else {
            a as i64
        }
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        assert!(a < self.p && b < self.p);
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        assert!(a < self.p && b < self.p);
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    pub fn neg(&self, a: u64) -> u64 {
        assert!(a < self.p);
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        assert!(a < self.p && b < self.p);
        a * b % self.p
    }

    /// Raises `a` to the power `e` by square and multiply.
    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        assert!(a < self.p);
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a nonzero element.
    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "zero has no inverse");
        assert!(a < self.p);
        // p is prime, so a^(p-2) = a^-1.
        self.pow(a, self.p - 2)
    }

    /// Rank of a matrix given as a slice of equal-length rows.
    pub fn rank(&self, rows: &[Vec<u64>]) -> usize {
        if rows.is_empty() {
            return 0;
        }
        let n = rows[0].len();
        let mut m: Vec<Vec<u64>> = rows.to_vec();
        for row in &m {
            assert!(row.len() == n, "rows must have equal length");
            assert!(row.iter().all(|&x| x < self.p));
        }
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot) = (rank..m.len()).find(|&r| m[r][col] != 0) else {
                continue;
            };
            m.swap(rank, pivot);
            let inv = self.inv(m[rank][col]);
            for x in m[rank].iter_mut() {
                *x = self.mul(*x, inv);
            }
            for r in 0..m.len() {
                if r != rank && m[r][col] != 0 {
                    let f = m[r][col];
                    for c in 0..n {
                        let t = self.mul(f, m[rank][c]);
                        m[r][c] = self.sub(m[r][c], t);
                    }
                }
            }
            rank += 1;
            if rank == m.len() {
                break;
            }
        }
        rank
    }

    /// Solves A X = B over Z_p, where A is m x n and B is m x k.
    ///
    /// Returns the unique n x k solution, or `None` when the system is
    /// inconsistent or underdetermined.
    pub fn solve(&self, a: &[Vec<u64>], b: &[Vec<u64>]) -> Option<Vec<Vec<u64>>> {
        let m = a.len();
        assert!(m > 0 && b.len() == m, "matrix shapes must agree");
        let n = a[0].len();
        let k = b[0].len();
        // Augmented matrix [A | B].
        let mut aug: Vec<Vec<u64>> = Vec::with_capacity(m);
        for (ra, rb) in a.iter().zip(b.iter()) {
            assert!(ra.len() == n && rb.len() == k, "matrix shapes must agree");
            let mut row = Vec::with_capacity(n + k);
            row.extend_from_slice(ra);
            row.extend_from_slice(rb);
            assert!(row.iter().all(|&x| x < self.p));
            aug.push(row);
        }
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            let Some(pivot) = (rank..m).find(|&r| aug[r][col] != 0) else {
                continue;
            };
            aug.swap(rank, pivot);
            let inv = self.inv(aug[rank][col]);
            for x in aug[rank].iter_mut() {
                *x = self.mul(*x, inv);
            }
            for r in 0..m {
                if r != rank && aug[r][col] != 0 {
                    let f = aug[r][col];
                    for c in 0..n + k {
                        let t = self.mul(f, aug[rank][c]);
                        aug[r][c] = self.sub(aug[r][c], t);
                    }
                }
            }
            pivot_cols.push(col);
            rank += 1;
            if rank == m {
                break;
            }
        }
        if rank < n {
            return None;
        }
        // Rows below the pivots must have vanished entirely.
        for row in aug.iter().skip(rank) {
            if row[n..].iter().any(|&x| x != 0) {
                return None;
            }
        }
        let mut x = vec![vec![0u64; k]; n];
        for (r, &col) in pivot_cols.iter().enumerate() {
            x[col] = aug[r][n..].to_vec();
        }
        Some(x)
    }
}
