//! Combinatorics of biased noise vectors: per-value probabilities under the
//! independent-bit model, the expected cost of guessing a vector in the
//! probability-guided order, and the boundary-hit expectation that bounds
//! the influence of `beta`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::attack::CandidateOrder;
use crate::keystream::{check_width, Block};
use crate::scalar::Probability;
use crate::error::{Error, Result};

/// `C(n, k)`; exact for every `n <= 64`.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    // each partial product C(n, i+1) is an integer, so the division is exact
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn two<P: Probability>() -> P {
    P::one() + P::one()
}

/// Probability that a single value with `zeros` zero bits out of `width`
/// occurs when each bit is 0 with probability `alpha`, independently.
pub fn class_member_prob<P: Probability>(alpha: &P, zeros: u32, width: u32) -> P {
    alpha.powi(zeros) * (P::one() - alpha.clone()).powi(width - zeros)
}

/// `Prob{U = a} = alpha^N0(a) (1 - alpha)^(4n - N0(a))`. Real orbits are
/// not independent bit sources; this is the idealized model only.
pub fn theoretical_prob<P: Probability>(a: Block, alpha: &P) -> P {
    let width = a.bit_width();
    let zeros = width - a.value().count_ones();
    class_member_prob(alpha, zeros, width)
}

/// Number of values searched before class pair `i` in the paired order:
/// `H(i) = 2 * sum_{l<i} C(4n, l)`.
pub fn class_offset_h(i: u32, n: u32) -> u128 {
    assert!(i <= 2 * n, "class pair index {i} beyond 2n");
    2 * (0..i).map(|l| binomial(4 * n, l)).sum::<u128>()
}

/// Expected guess cost with its base-2 logarithm.
#[derive(Clone, Debug, PartialEq)]
pub struct GuessComplexity<P> {
    pub value: P,
    pub log2: f64,
}

/// Expected 1-based rank of the true vector in the probability-guided
/// guess order. A class of `C` members starting after `H` earlier
/// candidates contributes `p (C H + C (C + 1) / 2)`, `p` being the
/// per-member probability.
pub fn guess_complexity<P: Probability>(alpha: &P, n: u32) -> Result<GuessComplexity<P>> {
    check_alpha(alpha)?;
    check_width(n)?;
    let width = 4 * n;
    let half = P::one() / two::<P>();
    let value = match CandidateOrder::for_side(alpha.partial_cmp(&half), n) {
        CandidateOrder::Natural => (P::from_count(1u128 << width) + P::one()) / two::<P>(),
        CandidateOrder::Classes(classes) => {
            let mut before = 0u128;
            let mut total = P::zero();
            for zeros in classes {
                let c = binomial(width, zeros);
                let ranks = P::from_count(c * before) + P::from_count(c * (c + 1) / 2);
                total = total + class_member_prob(alpha, zeros, width) * ranks;
                before += c;
            }
            total
        }
    };
    let log2 = value.log2();
    Ok(GuessComplexity { value, log2 })
}

/// The closed form exactly as printed in the literature: the class offset
/// `H(i)` enters once per class instead of once per member, and the two
/// classes of a pair share one probability slot each. Kept only for
/// comparison; it disagrees with simulation.
pub fn printed_guess_complexity<P: Probability>(alpha: &P, n: u32) -> Result<P> {
    check_alpha(alpha)?;
    check_width(n)?;
    let w = 4 * n;
    let prob = |i: u32| alpha.powi(w - i) * (P::one() - alpha.clone()).powi(i);
    let tri = |c: u128| P::from_count(c * (c + 1) / 2);
    let mut total = P::zero();
    for i in 0..2 * n {
        let c = binomial(w, i);
        let h = P::from_count(class_offset_h(i, n));
        total = total + (prob(i) + prob(w - i)) * (h + tri(c)) + prob(w - i) * P::from_count(c);
    }
    let c = binomial(w, 2 * n);
    total = total + prob(2 * n) * (P::from_count(class_offset_h(2 * n, n)) + tri(c));
    Ok(total)
}

fn check_alpha<P: Probability>(alpha: &P) -> Result<()> {
    if *alpha <= P::zero() || *alpha >= P::one() {
        return Err(Error::ParameterDomain(format!("alpha {alpha:?} outside (0, 1)")));
    }
    Ok(())
}

/// `(alpha, log2 Com(alpha))` points, sorted by alpha.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityCurve {
    pub n: u32,
    pub points: Vec<(f64, f64)>,
}

/// Exact evaluation at `alpha = k / 100` for `k` in `ks`.
pub fn complexity_curve(n: u32, ks: impl IntoIterator<Item = u32>) -> Result<ComplexityCurve> {
    let mut points = Vec::new();
    for k in ks {
        let alpha = BigRational::new(BigInt::from(k), BigInt::from(100));
        let com = guess_complexity(&alpha, n)?;
        points.push((k as f64 / 100.0, com.log2));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(ComplexityCurve { n, points })
}

/// The full grid `0.01, 0.02, ..., 0.99`.
pub fn full_complexity_curve(n: u32) -> Result<ComplexityCurve> {
    complexity_curve(n, 1..=99)
}

/// Expected reach of `beta` at precision `L`: an orbit modeled as uniform
/// over `2^L` states hits `{0, 1}` with probability `p = 2^(1-L)` per step,
/// so `beta` first matters after `2^(L-1)` steps on average, i.e. about
/// `2^(L-1) / 8` leading bytes are encrypted independently of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaImpact {
    pub l: u32,
    pub p: BigRational,
    pub expected_first_hit: BigInt,
    pub decryptable_bytes: BigRational,
}

pub fn beta_impact(l: u32) -> Result<BetaImpact> {
    if l < 2 {
        return Err(Error::ParameterDomain(format!("precision {l} below 2 bits")));
    }
    let expected_first_hit = BigInt::one() << (l - 1) as usize;
    Ok(BetaImpact {
        l,
        p: BigRational::new(BigInt::one(), expected_first_hit.clone()),
        decryptable_bytes: BigRational::new(expected_first_hit.clone(), BigInt::from(8)),
        expected_first_hit,
    })
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::attack::prioritized_candidates;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn pow2(e: usize) -> BigRational {
        BigRational::from_integer(BigInt::one() << e)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(8, 0), 1);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!((0..=64).map(|k| binomial(64, k)).sum::<u128>(), 1u128 << 64);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn value_probabilities() {
        let a0 = Block::new(0, 2).unwrap();
        let a255 = Block::new(255, 2).unwrap();
        assert_eq!(theoretical_prob(a0, &q(1, 10)), q(1, 100_000_000));
        assert_eq!(theoretical_prob(a255, &q(1, 10)), q(43_046_721, 100_000_000));
        assert!((theoretical_prob(a255, &0.1f64) - 0.43046721).abs() < 1e-15);
    }

    #[test]
    fn probabilities_normalize_exactly() {
        for n in [1u32, 2] {
            for alpha in [q(1, 10), q(1, 2), q(37, 100), q(999, 1000)] {
                let sum = (0..1u64 << (4 * n))
                    .map(|v| theoretical_prob(Block::new(v, n).unwrap(), &alpha))
                    .fold(BigRational::zero(), |a, b| a + b);
                assert_eq!(sum, BigRational::one());
            }
        }
    }

    #[test]
    fn class_offsets() {
        assert_eq!(class_offset_h(0, 2), 0);
        assert_eq!(class_offset_h(1, 2), 2);
        assert_eq!(class_offset_h(4, 2) + binomial(8, 4), 256);
        assert_eq!(class_offset_h(32, 16) + binomial(64, 32), 1u128 << 64);
    }

    #[test]
    fn paired_order_starts_each_pair_after_h() {
        // 1-based rank of the first member of pair i is H(i) + 1
        let n = 2;
        let order: Vec<Block> = prioritized_candidates(0.7f64, n).collect();
        for i in 0..=2 * n {
            let h = class_offset_h(i, n) as usize;
            let zeros = order[h].bit_width() - order[h].value().count_ones();
            assert!(zeros == i || zeros == 4 * n - i, "pair {i}");
        }
    }

    #[test]
    fn uniform_complexity_is_midpoint() {
        for n in [1u32, 2, 16] {
            let com = guess_complexity(&q(1, 2), n).unwrap();
            assert_eq!(com.value, (pow2(4 * n as usize) + BigRational::one()) / q(2, 1));
        }
        let f = guess_complexity(&0.5f64, 16).unwrap();
        assert!((f.log2 - 63.0).abs() < 1e-12);
    }

    #[test]
    fn complexity_is_bounded() {
        for n in [1u32, 2, 4] {
            for k in [1i64, 10, 49, 50, 51, 90, 99] {
                let com = guess_complexity(&q(k, 100), n).unwrap().value;
                assert!(com >= BigRational::one());
                assert!(com <= pow2(4 * n as usize));
            }
        }
    }

    #[test]
    fn f64_tracks_exact() {
        for k in [5i64, 20, 45, 55, 80] {
            let exact = guess_complexity(&q(k, 100), 16).unwrap().log2;
            let fast = guess_complexity(&(k as f64 / 100.0), 16).unwrap().log2;
            assert!((exact - fast).abs() < 1e-9, "{k}: {exact} vs {fast}");
        }
    }

    #[test]
    fn complexity_matches_exhaustive_rank_average() {
        // independent oracle: average rank over every value weighted by its probability
        for (k, n) in [(20i64, 1u32), (70, 1), (30, 2), (80, 2)] {
            let alpha = q(k, 100);
            let expected = prioritized_candidates(k as f64 / 100.0, n)
                .enumerate()
                .map(|(rank, a)| theoretical_prob(a, &alpha) * BigRational::from_integer(BigInt::from(rank + 1)))
                .fold(BigRational::zero(), |s, x| s + x);
            assert_eq!(guess_complexity(&alpha, n).unwrap().value, expected);
        }
    }

    #[test]
    fn complexity_matches_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alpha = 0.2f64;
        let rank: Vec<usize> = {
            let mut r = vec![0; 16];
            for (i, a) in prioritized_candidates(alpha, 1).enumerate() {
                r[a.value() as usize] = i + 1;
            }
            r
        };
        let trials = 20_000;
        let total: usize = (0..trials)
            .map(|_| {
                let v = (0..4).fold(0usize, |acc, _| (acc << 1) | (rng.gen::<f64>() >= alpha) as usize);
                rank[v]
            })
            .sum();
        let mc = total as f64 / trials as f64;
        let exact = guess_complexity(&alpha, 1).unwrap().value;
        assert!((mc / exact - 1.0).abs() < 0.02, "{mc} vs {exact}");
    }

    #[test]
    fn printed_form_disagrees_at_half() {
        let printed = printed_guess_complexity(&q(1, 2), 1).unwrap();
        assert_ne!(printed, q(17, 2));
    }

    #[test]
    fn curve_shape() {
        let curve = complexity_curve(16, 1..=49).unwrap();
        assert_eq!(curve.points.len(), 49);
        assert!(curve.points.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(curve.points[0].1 < 20.0);
        assert!(curve.points[48].1 > 62.0 && curve.points[48].1 < 63.0);
    }

    #[test]
    fn out_of_range_alpha() {
        assert!(guess_complexity(&q(0, 1), 1).is_err());
        assert!(guess_complexity(&1.0f64, 1).is_err());
        assert!(printed_guess_complexity(&q(3, 2), 1).is_err());
    }

    #[test]
    fn beta_impact_values() {
        let b = beta_impact(30).unwrap();
        assert_eq!(b.p, BigRational::one() / pow2(29));
        assert_eq!(b.expected_first_hit, BigInt::one() << 29);
        assert_eq!(b.decryptable_bytes, pow2(26));
        let b = beta_impact(62).unwrap();
        assert_eq!(b.decryptable_bytes, pow2(58));
        assert_eq!(beta_impact(2).unwrap().expected_first_hit, BigInt::from(2));
        assert!(beta_impact(1).is_err());
    }
}
