//! Known-plaintext recovery of the noise vectors once the permutations are
//! known.
//!
//! For block `j >= 2` every known pair satisfies
//! `C_j ^ (P_{j-1} + x) = f_{j-1}(P_j ^ (C_{j-1} + x))` with `x = U_{j+1}`.
//! The carries make this nonlinear in `x`, so candidates are tested one by
//! one. Two candidates `x` and `x ^ msb` satisfy exactly the same equations
//! whenever `f` fixes the top bit; they decrypt identically and are treated
//! as one solution.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::keystream::{BitPermutation, Block};
use crate::scalar::Unit;

/// One known plaintext/ciphertext block together with its predecessors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KnownPair {
    pub prev_plain: Block,
    pub plain: Block,
    pub prev_cipher: Block,
    pub cipher: Block,
}

impl KnownPair {
    /// Block `j` (1-based, `j >= 2`) of a known message.
    pub fn from_message(plain: &[Block], cipher: &[Block], j: usize) -> Option<KnownPair> {
        if j < 2 || j > plain.len().min(cipher.len()) {
            return None;
        }
        Some(KnownPair {
            prev_plain: plain[j - 2],
            plain: plain[j - 1],
            prev_cipher: cipher[j - 2],
            cipher: cipher[j - 1],
        })
    }

    #[inline]
    pub fn holds(&self, f: &BitPermutation, x: Block) -> bool {
        self.cipher ^ self.prev_plain.add_mod(x) == f.apply_unchecked(self.plain ^ self.prev_cipher.add_mod(x))
    }
}

/// Every candidate, in iteration order, consistent with all `pairs`.
pub fn solve_uj<I>(pairs: &[KnownPair], f: &BitPermutation, candidates: I) -> Result<Vec<Block>>
where
    I: IntoIterator<Item = Block>,
{
    check_pairs(pairs, f)?;
    let found: Vec<Block> = candidates
        .into_iter()
        .filter(|&x| pairs.iter().all(|p| p.holds(f, x)))
        .collect();
    if found.is_empty() {
        return Err(Error::Inconsistent(
            "no noise vector satisfies every pair; the permutation or the pairs are wrong".into(),
        ));
    }
    Ok(found)
}

/// First consistent candidate within `budget` trials, with the number of
/// candidates examined.
pub fn find_uj<I>(pairs: &[KnownPair], f: &BitPermutation, candidates: I, budget: u64) -> Result<(Block, u64)>
where
    I: IntoIterator<Item = Block>,
{
    check_pairs(pairs, f)?;
    let mut tried = 0u64;
    for x in candidates {
        if tried == budget {
            break;
        }
        tried += 1;
        if pairs.iter().all(|p| p.holds(f, x)) {
            return Ok((x, tried));
        }
    }
    Err(Error::Inconsistent(format!(
        "no consistent noise vector among the first {tried} candidates"
    )))
}

fn check_pairs(pairs: &[KnownPair], f: &BitPermutation) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Domain("at least one known pair is required".into()));
    }
    let n = f.n();
    for p in pairs {
        for b in [p.prev_plain, p.plain, p.prev_cipher, p.cipher] {
            if b.n() != n {
                return Err(Error::WidthMismatch {
                    expected: n,
                    found: b.n(),
                });
            }
        }
    }
    Ok(())
}

/// True when `x` and `y` decrypt every block identically under `f`.
pub fn decryption_equivalent(f: &BitPermutation, x: Block, y: Block) -> bool {
    let msb = Block::truncated(1 << (x.bit_width() - 1), x.n());
    x == y || (x ^ y == msb && f.apply_unchecked(msb) == msb)
}

/// Drops candidates equivalent to an earlier one.
pub fn distinct_solutions(f: &BitPermutation, candidates: &[Block]) -> Vec<Block> {
    let mut out: Vec<Block> = Vec::new();
    for &x in candidates {
        if !out.iter().any(|&y| decryption_equivalent(f, x, y)) {
            out.push(x);
        }
    }
    out
}

/// Register equivalent for block 1: `C_1 = f_0(P_1) ^ M` for a constant
/// mask `M` that folds in the unknown initial registers.
pub fn first_block_mask(f0: &BitPermutation, plain: Block, cipher: Block) -> Block {
    cipher ^ f0.apply_unchecked(plain)
}

/// Guess order over noise-vector values. Classes are identified by their
/// number of zero bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateOrder {
    Natural,
    Classes(Vec<u32>),
}

impl CandidateOrder {
    /// Probability-guided order for an estimate of `alpha`.
    ///
    /// Below one half, fewer zero bits are likelier and classes go
    /// `A_0, A_1, ..., A_4n`. Above one half, classes are paired as
    /// `A_i, A_{4n-i}` with the heavier (more zeros) first, ending with
    /// `A_2n`. At exactly one half all values are equally likely.
    pub fn for_alpha<T: Unit>(alpha_est: T, n: u32) -> Self {
        Self::for_side(alpha_est.partial_cmp(&T::half()), n)
    }

    /// Order selected by how the estimate compares with one half.
    pub fn for_side(side: Option<Ordering>, n: u32) -> Self {
        let w = 4 * n;
        match side {
            Some(Ordering::Less) => CandidateOrder::Classes((0..=w).collect()),
            Some(Ordering::Greater) => {
                let mut classes = Vec::with_capacity(w as usize + 1);
                for i in 0..w / 2 {
                    classes.push(w - i);
                    classes.push(i);
                }
                classes.push(w / 2);
                CandidateOrder::Classes(classes)
            }
            _ => CandidateOrder::Natural,
        }
    }

    pub fn iter(&self, n: u32) -> Candidates {
        Candidates::new(self.clone(), n)
    }
}

/// Enumeration of all `2^(4n)` values in a [`CandidateOrder`]; ascending
/// numeric order inside each class.
#[derive(Clone, Debug)]
pub struct Candidates {
    order: CandidateOrder,
    n: u32,
    class_idx: usize,
    next: Option<u128>,
}

impl Candidates {
    fn new(order: CandidateOrder, n: u32) -> Self {
        let mut c = Candidates {
            order,
            n,
            class_idx: 0,
            next: None,
        };
        c.next = match &c.order {
            CandidateOrder::Natural => Some(0),
            CandidateOrder::Classes(cls) => cls.first().map(|&z| c.smallest_with_zeros(z)),
        };
        c
    }

    fn width(&self) -> u32 {
        4 * self.n
    }

    fn smallest_with_zeros(&self, zeros: u32) -> u128 {
        (1u128 << (self.width() - zeros)) - 1
    }

    /// Next larger integer with the same popcount (Gosper), if it still fits.
    fn gosper(&self, v: u128) -> Option<u128> {
        if v == 0 {
            return None;
        }
        let c = v & v.wrapping_neg();
        let r = v + c;
        let next = (((r ^ v) >> 2) / c) | r;
        (next < 1u128 << self.width()).then_some(next)
    }
}

impl Iterator for Candidates {
    type Item = Block;

    fn next(&mut self) -> Option<Block> {
        let cur = self.next?;
        self.next = match &self.order {
            CandidateOrder::Natural => (cur + 1 < 1u128 << self.width()).then_some(cur + 1),
            CandidateOrder::Classes(cls) => match self.gosper(cur) {
                Some(v) => Some(v),
                None => {
                    self.class_idx += 1;
                    cls.get(self.class_idx).map(|&z| self.smallest_with_zeros(z))
                }
            },
        };
        Some(Block::truncated(cur as u64, self.n))
    }
}

/// All values, natural order.
pub fn exhaustive_candidates(n: u32) -> Candidates {
    CandidateOrder::Natural.iter(n)
}

pub fn prioritized_candidates<T: Unit>(alpha_est: T, n: u32) -> Candidates {
    CandidateOrder::for_alpha(alpha_est, n).iter(n)
}
