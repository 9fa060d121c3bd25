//! Noise vectors drawn from the tent-map orbit and the secret bit
//! permutations derived from them.

mod block;
mod perm;

pub use block::{blocks_from_bytes, blocks_to_bytes, compute_vj, Block, MAX_N};
pub(crate) use block::check_width;
pub use perm::{apply, build_fji, compose_fj, invert, BitPermutation, QuarterPermTable};

use crate::scalar::Unit;
use crate::tentmap::{Orbit, TentParams};

/// Thresholding rule turning an orbit value into a bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Extractor {
    /// `u = 0` iff `x <= alpha`.
    #[default]
    Standard,
    /// `u = 0` iff `x <= 1/2`, independent of `alpha`.
    Mended,
}

impl Extractor {
    #[inline]
    pub fn bit<T: Unit>(self, x: T, alpha: T) -> bool {
        let threshold = match self {
            Extractor::Standard => alpha,
            Extractor::Mended => T::half(),
        };
        x > threshold
    }

    pub fn threshold<T: Unit>(self, alpha: T) -> T {
        match self {
            Extractor::Standard => alpha,
            Extractor::Mended => T::half(),
        }
    }
}

pub fn extract_bits<T: Unit>(orbit: &[T], alpha: T, count: usize) -> Vec<bool> {
    orbit[..count].iter().map(|&x| Extractor::Standard.bit(x, alpha)).collect()
}

pub fn extract_bits_mended<T: Unit>(orbit: &[T], count: usize) -> Vec<bool> {
    orbit[..count].iter().map(|&x| Extractor::Mended.bit(x, T::half())).collect()
}

/// Packs `bits` most significant first.
pub fn pack_block(bits: &[bool], n: u32) -> Block {
    debug_assert_eq!(bits.len(), 4 * n as usize);
    let value = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    Block::truncated(value, n)
}

/// Endless stream `U_0, U_1, ...`: block `U_j` thresholds the orbit values
/// `x_{4jn} .. x_{4jn+4n-1}`, with `x_0` itself feeding the most
/// significant bit of `U_0`.
pub struct NoiseStream<T> {
    x: T,
    orbit: Orbit<T>,
    alpha: T,
    n: u32,
    extractor: Extractor,
}

impl<T: Unit> NoiseStream<T> {
    pub fn new(x0: T, params: TentParams<T>, n: u32, extractor: Extractor) -> Self {
        check_width(n).expect("block width");
        NoiseStream {
            x: x0,
            orbit: Orbit::new(x0, params),
            alpha: params.alpha,
            n,
            extractor,
        }
    }
}

impl<T: Unit> Iterator for NoiseStream<T> {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        let mut value = 0u64;
        for _ in 0..4 * self.n {
            value = (value << 1) | self.extractor.bit(self.x, self.alpha) as u64;
            self.x = self.orbit.next()?;
        }
        Some(Block::truncated(value, self.n))
    }
}

/// `U_0 .. U_{j_max}` (inclusive).
pub fn build_noise_vectors<T: Unit>(x0: T, p: &TentParams<T>, n: u32, j_max: usize) -> Vec<Block> {
    NoiseStream::new(x0, *p, n, Extractor::Standard).take(j_max + 1).collect()
}

#[cfg(test)]
mod tests {
    use num_traits::One;

    use super::*;
    use crate::tentmap::iterate_orbit;
    use crate::Fp62;

    fn fp(s: &str) -> Fp62 {
        Fp62::from_decimal(s).unwrap()
    }

    #[test]
    fn extractor_boundaries() {
        let alpha = fp("0.3");
        assert_eq!(extract_bits(&[alpha], alpha, 1), vec![false]);
        assert_eq!(extract_bits(&[Fp62::one()], alpha, 1), vec![true]);
        assert_eq!(extract_bits(&[Fp62::from_decimal("0").unwrap()], alpha, 1), vec![false]);
        assert_eq!(extract_bits_mended(&[fp("0.5"), fp("0.75")], 2), vec![false, true]);
    }

    #[test]
    fn noise_vectors_follow_orbit_msb_first() {
        // alpha=0.9, x0=0.95: upper branch first, then stays in the lower branch for a while
        let p = TentParams::new(0.9f64, 0.7).unwrap();
        let x0 = 0.95f64;
        let mut orbit = vec![x0];
        orbit.extend(iterate_orbit(x0, &p, 7));
        let bits = extract_bits(&orbit, 0.9, 8);
        let u0 = build_noise_vectors(x0, &p, 2, 0)[0];
        assert_eq!(u0, pack_block(&bits, 2));
        // x0 = 0.95 > 0.9 -> 1; x1 = 0.5 -> 0; x2 = 0.5556 -> 0 ...
        assert!(u0.bit(7));
        assert!(!u0.bit(6));
    }

    #[test]
    fn one_bits_dominate_for_small_alpha() {
        let p = TentParams::new(fp("0.1"), fp("0.7")).unwrap();
        let blocks = build_noise_vectors(fp("0.3"), &p, 2, 999);
        let ones: u32 = blocks.iter().map(|b| b.value().count_ones()).sum();
        assert!(ones as f64 / 8000.0 > 0.8);
    }

    #[test]
    fn bit_bias_tracks_alpha_binary64() {
        for alpha in [0.1f64, 0.3, 0.49] {
            let p = TentParams::new(alpha, 0.7).unwrap();
            let blocks = build_noise_vectors(0.3f64, &p, 2, 3999);
            let zeros: u32 = blocks.iter().map(|b| b.count_zeros()).sum();
            let freq = zeros as f64 / 32000.0;
            assert!((freq - alpha).abs() <= 0.03, "alpha={alpha}: {freq}");
        }
    }

    #[test]
    fn mended_extractor_is_balanced() {
        let p = TentParams::new(fp("0.1"), fp("0.7")).unwrap();
        let orbit = iterate_orbit(fp("0.3"), &p, 32000);
        let bits = extract_bits_mended(&orbit, 32000);
        let freq = bits.iter().filter(|&&b| b).count() as f64 / 32000.0;
        assert!((0.45..=0.55).contains(&freq), "{freq}");
    }

    #[test]
    fn degraded_half_orbit_locks_onto_alternating_pattern() {
        let p = TentParams::new(0.5f64, 0.4).unwrap();
        let blocks = build_noise_vectors(0.123f64, &p, 2, 999);
        let hits = blocks.iter().filter(|b| b.value() == 170).count();
        assert_eq!(hits, 993);
        let p = TentParams::new(0.5f64, 0.7).unwrap();
        let blocks = build_noise_vectors(0.3f64, &p, 2, 999);
        let c85 = blocks.iter().filter(|b| b.value() == 85).count();
        let c170 = blocks.iter().filter(|b| b.value() == 170).count();
        assert_eq!((c85, c170), (412, 418));
    }
}
