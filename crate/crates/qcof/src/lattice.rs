//! One-dimensional nested lattices and the symbol modulation built on them.
//!
//! The coding lattice is kappa*Z and the shaping lattice is kappa*p*Z, where
//! the scale kappa is chosen so that a dithered transmission over the shaping
//! region `[-kappa*p/2, kappa*p/2)` has average power equal to the target SNR
//! (the channel noise has unit variance). A field symbol u maps to the
//! constellation point kappa*g(u), where g is the centered labeling from
//! [`PrimeField::centered`].
//!
//! All rounding uses a single tie rule, half toward plus infinity, so that
//! quantizing to the coding lattice and reducing modulo the shaping lattice
//! commute; relays rely on that when they collapse a real observation to a
//! field symbol.

use crate::field::PrimeField;
use rand::Rng;

/// Rounds to the nearest integer, breaking ties toward plus infinity.
pub fn round_half_up(t: f64) -> f64 {
    (t + 0.5).floor()
}

/// Symbol constellation of a prime-field code over nested lattices.
#[derive(Clone, Copy, Debug)]
pub struct Modulation {
    field: PrimeField,
    snr: f64,
    kappa: f64,
}

impl Modulation {
    /// Creates the constellation for Z_p at the given linear SNR.
    pub fn new(p: u64, snr: f64) -> Self {
        assert!(snr > 0.0 && snr.is_finite(), "SNR must be positive");
        let field = PrimeField::new(p);
        let kappa = (12.0 * snr).sqrt() / p as f64;
        Modulation { field, snr, kappa }
    }

    /// Creates the constellation from the lattice scale instead of the SNR.
    /// Useful when working in units of kappa, where only the ratio of noise
    /// deviation to lattice scale matters.
    pub fn from_kappa(p: u64, kappa: f64) -> Self {
        assert!(kappa > 0.0 && kappa.is_finite(), "scale must be positive");
        let field = PrimeField::new(p);
        let w = kappa * p as f64;
        Modulation { field, snr: w * w / 12.0, kappa }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    /// The coding-lattice scale kappa.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Linear SNR the constellation was built for.
    pub fn snr(&self) -> f64 {
        self.snr
    }

    /// Average transmit power of a dithered symbol, (kappa*p)^2 / 12.
    pub fn power(&self) -> f64 {
        let w = self.kappa * self.field.order() as f64;
        w * w / 12.0
    }

    /// Maps a symbol to its constellation point kappa * g(u).
    pub fn modulate(&self, u: u64) -> f64 {
        self.kappa * self.field.centered(u) as f64
    }

    /// Recovers the symbol of a coding-lattice point.
    pub fn demodulate(&self, v: f64) -> u64 {
        let m = round_half_up(v / self.kappa) as i64;
        self.field.reduce(m)
    }

    /// Quantizes a real value to the nearest coding-lattice point.
    pub fn quantize_coding(&self, x: f64) -> f64 {
        self.kappa * round_half_up(x / self.kappa)
    }

    /// Reduces a real value into the shaping region `[-kappa*p/2, kappa*p/2)`.
    pub fn mod_shaping(&self, x: f64) -> f64 {
        let w = self.kappa * self.field.order() as f64;
        x - w * round_half_up(x / w)
    }

    /// Collapses a real observation to a field symbol: quantize to the coding
    /// lattice, reduce modulo the shaping lattice, demodulate.
    pub fn quantize_to_symbol(&self, x: f64) -> u64 {
        self.demodulate(self.mod_shaping(self.quantize_coding(x)))
    }

    /// Draws a dither uniformly over the shaping region.
    pub fn random_dither<R: Rng>(&self, rng: &mut R) -> f64 {
        let w = self.kappa * self.field.order() as f64;
        rng.gen_range(-0.5 * w..0.5 * w)
    }

    /// Transmitted sample for a symbol under a known dither: the dithered
    /// constellation point folded back into the shaping region.
    pub fn transmit(&self, u: u64, dither: f64) -> f64 {
        self.mod_shaping(self.modulate(u) + dither)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_half_up_tie_rule() {
        assert_eq!(round_half_up(0.5), 1.0);
        assert_eq!(round_half_up(-0.5), 0.0);
        assert_eq!(round_half_up(1.5), 2.0);
        assert_eq!(round_half_up(-1.5), -1.0);
        assert_eq!(round_half_up(2.49), 2.0);
        assert_eq!(round_half_up(2.51), 3.0);
        assert_eq!(round_half_up(-2.49), -2.0);
        assert_eq!(round_half_up(-2.51), -3.0);
    }

    #[test]
    fn power_matches_target_snr() {
        for p in [2u64, 3, 7, 251] {
            for snr in [0.5, 1.0, 10.0, 1e4] {
                let m = Modulation::new(p, snr);
                assert!((m.power() - snr).abs() < 1e-9 * snr);
            }
        }
    }

    #[test]
    fn modulate_demodulate_round_trip() {
        for p in [2u64, 3, 5, 7, 251] {
            for snr in [0.7, 4.0, 100.0] {
                let m = Modulation::new(p, snr);
                let half_width = 0.5 * m.kappa() * p as f64;
                for u in 0..p {
                    let v = m.modulate(u);
                    assert!(v >= -half_width && v < half_width, "point escapes the region");
                    assert_eq!(m.demodulate(v), u);
                    // The composite relay map is the identity on clean points.
                    assert_eq!(m.quantize_to_symbol(v), u);
                }
            }
        }
    }

    #[test]
    fn quantizer_shift_property() {
        let m = Modulation::new(7, 3.0);
        let k = m.kappa();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-10.0..10.0);
            let shift: i64 = rng.gen_range(-50..=50);
            let a = m.quantize_coding(x + shift as f64 * k);
            let b = m.quantize_coding(x) + shift as f64 * k;
            assert!((a - b).abs() < 1e-9);
        }
        // Exact ties move up.
        assert_eq!(m.quantize_coding(0.5 * k), k);
        assert_eq!(m.quantize_coding(-0.5 * k), 0.0);
        assert_eq!(m.quantize_coding(1.5 * k), 2.0 * k);
    }

    #[test]
    fn mod_shaping_range_and_periodicity() {
        for p in [2u64, 3, 7] {
            let m = Modulation::new(p, 2.0);
            let w = m.kappa() * p as f64;
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..2000 {
                let x: f64 = rng.gen_range(-8.0 * w..8.0 * w);
                let r = m.mod_shaping(x);
                assert!(r >= -0.5 * w && r < 0.5 * w);
                let shift: i64 = rng.gen_range(-4..=4);
                assert!((m.mod_shaping(x + shift as f64 * w) - r).abs() < 1e-9);
            }
            // The upper boundary folds onto the lower one.
            assert!((m.mod_shaping(0.5 * w) + 0.5 * w).abs() < 1e-12);
            assert!((m.mod_shaping(-0.5 * w) + 0.5 * w).abs() < 1e-12);
        }
    }

    /// Alternative relay map: fold first, then apply a uniform p-level
    /// quantizer over the shaping region. Must agree with the composite map
    /// everywhere, including on cell boundaries.
    fn fold_then_slice(m: &Modulation, x: f64) -> u64 {
        let folded = m.mod_shaping(x);
        let label = round_half_up(folded / m.kappa()) as i64;
        m.field().reduce(label)
    }

    #[test]
    fn relay_map_orderings_agree() {
        for p in [2u64, 3, 5, 7] {
            let m = Modulation::new(p, 1.3);
            let k = m.kappa();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..5000 {
                let x: f64 = rng.gen_range(-5.0 * p as f64 * k..5.0 * p as f64 * k);
                assert_eq!(m.quantize_to_symbol(x), fold_then_slice(&m, x));
            }
            // Exact cell edges at every half-integer multiple of the scale.
            // With kappa = 1 all edge coordinates are half integers, so both
            // orderings evaluate without rounding error and the tie rule is
            // exercised exactly.
            let m = Modulation::from_kappa(p, 1.0);
            for n in -6 * p as i64..=6 * p as i64 {
                let x = 0.5 * n as f64;
                assert_eq!(m.quantize_to_symbol(x), fold_then_slice(&m, x), "edge {}", n);
            }
        }
    }

    #[test]
    fn transmit_is_dither_shift_modulo_shaping() {
        let m = Modulation::new(5, 2.0);
        let w = m.kappa() * 5.0;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let u = rng.gen_range(0..5);
            let d = m.random_dither(&mut rng);
            let x = m.transmit(u, d);
            assert!(x >= -0.5 * w && x < 0.5 * w);
            // Removing the dither modulo the shaping lattice recovers the point.
            let back = m.mod_shaping(x - d);
            assert!((back - m.modulate(u)).abs() < 1e-9);
        }
    }

    #[test]
    fn dither_moments() {
        let m = Modulation::new(7, 4.0);
        let w = m.kappa() * 7.0;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let d = m.random_dither(&mut rng);
            assert!(d >= -0.5 * w && d < 0.5 * w);
            s1 += d;
            s2 += d * d;
        }
        let mean = s1 / n as f64;
        let var = s2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01 * w);
        assert!((var - w * w / 12.0).abs() < 0.02 * w * w / 12.0);
    }
}
