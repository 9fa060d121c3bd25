//! Bit-permutation functions `f_j` built from quarter permutations and
//! one-bit rotations.

use std::fmt;
use std::path::Path;

use super::block::{check_width, Block};
use crate::error::{Error, Result};

/// Maps each 4-bit value `v` to a permutation `w` of the quarter indices
/// `{1, 2, 3, 4}`. Applying `w` to `(M1, M2, M3, M4)` puts `M_{w[k]}` in
/// output quarter `k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct QuarterPermTable {
    entries: [[u8; 4]; 16],
}

fn is_quarter_perm(w: &[u8; 4]) -> bool {
    let mut seen = [false; 5];
    for &q in w {
        if !(1..=4).contains(&q) || seen[q as usize] {
            return false;
        }
        seen[q as usize] = true;
    }
    true
}

impl QuarterPermTable {
    pub fn new(entries: [[u8; 4]; 16]) -> Result<Self> {
        for (v, w) in entries.iter().enumerate() {
            if !is_quarter_perm(w) {
                return Err(Error::parse("quarter permutation table", format!("entry {v} = {w:?} is not a permutation of 1..4")));
            }
        }
        Ok(QuarterPermTable { entries })
    }

    /// Entry `v` is the `v`-th permutation of `{1,2,3,4}` in lexicographic
    /// order, starting from the identity.
    pub fn lexicographic() -> Self {
        let mut all = Vec::with_capacity(24);
        for a in 1..=4u8 {
            for b in 1..=4u8 {
                for c in 1..=4u8 {
                    for d in 1..=4u8 {
                        let w = [a, b, c, d];
                        if is_quarter_perm(&w) {
                            all.push(w);
                        }
                    }
                }
            }
        }
        let mut entries = [[0u8; 4]; 16];
        entries.copy_from_slice(&all[..16]);
        QuarterPermTable { entries }
    }

    /// Every value selects the same permutation.
    pub fn constant(w: [u8; 4]) -> Result<Self> {
        Self::new([w; 16])
    }

    pub fn identity() -> Self {
        QuarterPermTable {
            entries: [[1, 2, 3, 4]; 16],
        }
    }

    pub fn get(&self, v: u8) -> [u8; 4] {
        self.entries[(v & 0xf) as usize]
    }

    pub fn is_injective(&self) -> bool {
        (0..16).all(|i| (i + 1..16).all(|j| self.entries[i] != self.entries[j]))
    }

    /// One line per value: `v: p1 p2 p3 p4`.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .enumerate()
            .map(|(v, w)| format!("{v}: {} {} {} {}\n", w[0], w[1], w[2], w[3]))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = [[0u8; 4]; 16];
        let mut filled = [false; 16];
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let bad = || Error::parse("quarter permutation table", format!("line `{line}`"));
            let (v, rest) = line.split_once(':').ok_or_else(bad)?;
            let v: usize = v.trim().parse().map_err(|_| bad())?;
            if v >= 16 || filled[v] {
                return Err(bad());
            }
            let items: Vec<u8> = rest
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            entries[v] = items.try_into().map_err(|_| bad())?;
            filled[v] = true;
        }
        if let Some(v) = filled.iter().position(|f| !f) {
            return Err(Error::parse("quarter permutation table", format!("missing entry {v}")));
        }
        Self::new(entries)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

impl Default for QuarterPermTable {
    fn default() -> Self {
        Self::lexicographic()
    }
}

/// A permutation of the `4n` bit positions of a block: input bit `i` moves
/// to output bit `dest[i]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct BitPermutation {
    dest: [u8; 64],
    n: u8,
}

impl BitPermutation {
    pub fn identity(n: u32) -> Result<Self> {
        check_width(n)?;
        let mut dest = [0u8; 64];
        for (i, d) in dest.iter_mut().enumerate().take(4 * n as usize) {
            *d = i as u8;
        }
        Ok(BitPermutation { dest, n: n as u8 })
    }

    /// Circular left rotation by `k` bits across the whole block.
    pub fn rotate_left(n: u32, k: u32) -> Result<Self> {
        check_width(n)?;
        let w = 4 * n;
        let dest: Vec<usize> = (0..w).map(|i| ((i + k) % w) as usize).collect();
        Self::from_dest(&dest, n)
    }

    pub fn from_dest(dest: &[usize], n: u32) -> Result<Self> {
        check_width(n)?;
        let w = 4 * n as usize;
        if dest.len() != w {
            return Err(Error::parse("bit permutation", format!("{} positions for a {w}-bit block", dest.len())));
        }
        let mut seen = [false; 64];
        let mut out = [0u8; 64];
        for (i, &d) in dest.iter().enumerate() {
            if d >= w || seen[d] {
                return Err(Error::parse("bit permutation", format!("{dest:?} is not a bijection on 0..{w}")));
            }
            seen[d] = true;
            out[i] = d as u8;
        }
        Ok(BitPermutation { dest: out, n: n as u8 })
    }

    pub fn n(&self) -> u32 {
        self.n as u32
    }

    pub fn dest(&self) -> &[u8] {
        &self.dest[..4 * self.n as usize]
    }

    pub fn apply(&self, x: Block) -> Result<Block> {
        if x.n() != self.n() {
            return Err(Error::WidthMismatch {
                expected: self.n(),
                found: x.n(),
            });
        }
        Ok(self.apply_unchecked(x))
    }

    #[inline]
    pub(crate) fn apply_unchecked(&self, x: Block) -> Block {
        let mut bits = x.value();
        let mut out = 0u64;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            out |= 1u64 << self.dest[i];
            bits &= bits - 1;
        }
        Block::truncated(out, self.n())
    }

    /// `next ∘ self`: apply `self` first.
    pub fn then(&self, next: &BitPermutation) -> BitPermutation {
        debug_assert_eq!(self.n, next.n);
        let mut dest = [0u8; 64];
        for (i, d) in self.dest().iter().enumerate() {
            dest[i] = next.dest[*d as usize];
        }
        BitPermutation { dest, n: self.n }
    }

    pub fn inverse(&self) -> BitPermutation {
        let mut dest = [0u8; 64];
        for (i, &d) in self.dest().iter().enumerate() {
            dest[d as usize] = i as u8;
        }
        BitPermutation { dest, n: self.n }
    }

    /// Space-separated destination indices.
    pub fn to_text(&self) -> String {
        self.dest().iter().map(u8::to_string).collect::<Vec<_>>().join(" ")
    }

    pub fn parse(text: &str, n: u32) -> Result<Self> {
        let dest: Vec<usize> = text
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::parse("bit permutation", format!("`{t}`"))))
            .collect::<Result<_>>()?;
        Self::from_dest(&dest, n)
    }
}

impl fmt::Debug for BitPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitPermutation(n={}, [{}])", self.n, self.to_text())
    }
}

/// `f_ji`: permute the four quarters by `table[v]`, then rotate the whole
/// block left by one bit.
pub fn build_fji(v: u8, table: &QuarterPermTable, n: u32) -> Result<BitPermutation> {
    check_width(n)?;
    if v >= 16 {
        return Err(Error::Domain(format!("selector {v} is not a 4-bit value")));
    }
    let w = table.get(v);
    let width = 4 * n;
    let dest: Vec<usize> = (0..width)
        .map(|i| {
            let quarter = 4 - i / n; // 1-based, M1 is most significant
            let offset = i % n;
            let k = w.iter().position(|&q| q as u32 == quarter).expect("valid quarter permutation") as u32 + 1;
            let pos = (4 - k) * n + offset;
            ((pos + 1) % width) as usize
        })
        .collect();
    BitPermutation::from_dest(&dest, n)
}

/// `f_j = f_jn ∘ ... ∘ f_j1`, where `f_ji` is selected by the `i`-th nibble
/// of `V_j` counted from the most significant end.
pub fn compose_fj(vj: Block, table: &QuarterPermTable) -> BitPermutation {
    let n = vj.n();
    (1..=n)
        .map(|i| build_fji(vj.nibble(i), table, n).expect("nibble selector"))
        .reduce(|acc, next| acc.then(&next))
        .expect("n >= 1")
}

pub fn invert(p: &BitPermutation) -> BitPermutation {
    p.inverse()
}

pub fn apply(p: &BitPermutation, x: Block) -> Result<Block> {
    p.apply(x)
}
