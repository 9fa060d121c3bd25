use crate::error::{Error, Result};
use crate::keystream::{check_width, Block, Extractor, NoiseStream};
use crate::scalar::Unit;
use crate::tentmap::TentParams;

use super::complexity::theoretical_prob;

/// Widest block for which a full value histogram is kept.
pub const MAX_HISTOGRAM_N: u32 = 4;

/// Occurrence counts of noise-vector values.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    n: u32,
    counts: Vec<u64>,
    samples: u64,
    /// Zero-bit probability of the independent-bit model used for the
    /// theoretical column.
    model_alpha: f64,
}

impl Histogram {
    pub fn new(n: u32, model_alpha: f64) -> Result<Self> {
        check_width(n)?;
        if n > MAX_HISTOGRAM_N {
            return Err(Error::ParameterDomain(format!(
                "histograms need n <= {MAX_HISTOGRAM_N}, got {n}"
            )));
        }
        Ok(Histogram {
            n,
            counts: vec![0; 1 << (4 * n)],
            samples: 0,
            model_alpha,
        })
    }

    pub fn record(&mut self, b: Block) {
        assert_eq!(b.n(), self.n, "block width");
        self.counts[b.value() as usize] += 1;
        self.samples += 1;
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn model_alpha(&self) -> f64 {
        self.model_alpha
    }

    pub fn count(&self, value: u64) -> u64 {
        self.counts[value as usize]
    }

    pub fn frequency(&self, value: u64) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        self.count(value) as f64 / self.samples as f64
    }

    pub fn theoretical(&self, value: u64) -> f64 {
        theoretical_prob(Block::truncated(value, self.n), &self.model_alpha)
    }

    pub fn max_frequency(&self) -> f64 {
        self.counts.iter().copied().max().unwrap_or(0) as f64 / self.samples.max(1) as f64
    }

    /// Values sorted by decreasing count, ties by value.
    pub fn top(&self, k: usize) -> Vec<(u64, u64)> {
        let mut v: Vec<(u64, u64)> = self.counts.iter().enumerate().map(|(a, &c)| (a as u64, c)).collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(k);
        v
    }

    pub fn bins_below(&self, frequency: f64) -> usize {
        (0..self.counts.len() as u64).filter(|&a| self.frequency(a) < frequency).count()
    }
}

/// Counts `samples` consecutive noise vectors `U_0, U_1, ...` of the orbit
/// from `x0`.
pub fn sample_histogram<T: Unit>(
    p: &TentParams<T>,
    x0: T,
    n: u32,
    samples: u64,
    extractor: Extractor,
) -> Result<Histogram> {
    if samples == 0 {
        return Err(Error::ParameterDomain("at least one sample is required".into()));
    }
    let model_alpha = extractor.threshold(p.alpha).to_f64();
    let mut h = Histogram::new(n, model_alpha)?;
    for b in NoiseStream::new(x0, *p, n, extractor).take(samples as usize) {
        h.record(b);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Fp62;

    #[test]
    fn skewed_alpha_concentrates_on_all_ones() {
        let p = TentParams::new(0.1f64, 0.7).unwrap();
        let h = sample_histogram(&p, 0.3, 2, 1000, Extractor::Standard).unwrap();
        assert_eq!(h.samples(), 1000);
        assert_eq!(h.counts().iter().sum::<u64>(), 1000);
        assert!((0.40..=0.60).contains(&h.frequency(255)), "{}", h.frequency(255));
        assert!(h.bins_below(0.01) >= 200);
        assert_eq!(h.top(1)[0].0, 255);
        assert!((h.theoretical(255) - 0.43046721).abs() < 1e-12);
    }

    #[test]
    fn half_alpha_collapses_onto_two_values() {
        let p = TentParams::new(0.5f64, 0.7).unwrap();
        let h = sample_histogram(&p, 0.3, 2, 1000, Extractor::Standard).unwrap();
        let top: Vec<u64> = h.top(2).iter().map(|t| t.0).collect();
        assert_eq!(top, vec![170, 85]);
        assert!(h.frequency(85) + h.frequency(170) >= 0.8);
    }

    #[test]
    fn mended_extractor_balances_bits_but_not_blocks() {
        // adjacent bits stay anticorrelated for alpha = 0.1, so the
        // alternating patterns dominate; counts cross-checked with a
        // separate big-integer simulation
        let p = TentParams::new(Fp62::from_decimal("0.1").unwrap(), Fp62::from_decimal("0.7").unwrap()).unwrap();
        let h = sample_histogram(&p, Fp62::from_decimal("0.3").unwrap(), 2, 32000, Extractor::Mended).unwrap();
        assert_eq!(h.model_alpha(), 0.5);
        assert_eq!(h.top(2), vec![(170, 10106), (85, 9940)]);
        let ones: u64 = (0..256u64).map(|a| a.count_ones() as u64 * h.count(a)).sum();
        assert!((ones as f64 / 256_000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn domain_checks() {
        let p = TentParams::new(0.1f64, 0.7).unwrap();
        assert!(sample_histogram(&p, 0.3, 5, 10, Extractor::Standard).is_err());
        assert!(sample_histogram(&p, 0.3, 1, 0, Extractor::Standard).is_err());
        let empty = Histogram::new(1, 0.3).unwrap();
        assert_eq!(empty.frequency(3), 0.0);
        assert_eq!(empty.max_frequency(), 0.0);
    }
}
