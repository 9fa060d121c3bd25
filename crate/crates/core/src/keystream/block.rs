use std::fmt;
use std::ops::BitXor;

use crate::error::{Error, Result};

pub const MAX_N: u32 = 16;

pub(crate) fn check_width(n: u32) -> Result<()> {
    if (1..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(Error::InvalidWidth(n))
    }
}

/// A `4n`-bit word. Bit 0 is the least significant; the quarters
/// `M1..M4` run from the most significant end.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Block {
    value: u64,
    n: u8,
}

impl Block {
    pub fn new(value: u64, n: u32) -> Result<Self> {
        check_width(n)?;
        if value & !Self::mask(n) != 0 {
            return Err(Error::parse("block", format!("{value:#x} does not fit in {} bits", 4 * n)));
        }
        Ok(Block { value, n: n as u8 })
    }

    /// Keeps the low `4n` bits of `value`. Panics on an invalid `n`.
    pub fn truncated(value: u64, n: u32) -> Self {
        check_width(n).expect("block width");
        Block {
            value: value & Self::mask(n),
            n: n as u8,
        }
    }

    pub fn zero(n: u32) -> Self {
        Self::truncated(0, n)
    }

    pub fn mask(n: u32) -> u64 {
        if n >= 16 {
            u64::MAX
        } else {
            (1u64 << (4 * n)) - 1
        }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn n(self) -> u32 {
        self.n as u32
    }

    pub fn bit_width(self) -> u32 {
        4 * self.n as u32
    }

    pub fn bit(self, i: u32) -> bool {
        (self.value >> i) & 1 == 1
    }

    pub fn flip_bit(self, i: u32) -> Self {
        debug_assert!(i < self.bit_width());
        Block {
            value: self.value ^ (1u64 << i),
            n: self.n,
        }
    }

    /// `(self + other) mod 2^(4n)`.
    pub fn add_mod(self, other: Block) -> Block {
        debug_assert_eq!(self.n, other.n);
        Block {
            value: self.value.wrapping_add(other.value) & Self::mask(self.n()),
            n: self.n,
        }
    }

    /// The `i`-th nibble counted from the most significant end, `1 <= i <= n`.
    pub fn nibble(self, i: u32) -> u8 {
        debug_assert!((1..=self.n()).contains(&i));
        ((self.value >> (4 * (self.n() - i))) & 0xf) as u8
    }

    pub fn count_zeros(self) -> u32 {
        self.bit_width() - self.value.count_ones()
    }

    /// Zero-padded lowercase hex, one digit per nibble.
    pub fn to_hex(self) -> String {
        format!("{:0width$x}", self.value, width = self.n as usize)
    }

    pub fn from_hex(s: &str, n: u32) -> Result<Self> {
        let digits = s.trim().trim_start_matches("0x");
        let value = u64::from_str_radix(digits, 16).map_err(|e| Error::parse("block", format!("`{s}`: {e}")))?;
        Self::new(value, n)
    }
}

impl BitXor for Block {
    type Output = Block;

    fn bitxor(self, rhs: Block) -> Block {
        debug_assert_eq!(self.n, rhs.n);
        Block {
            value: self.value ^ rhs.value,
            n: self.n,
        }
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Block({:#0w$x}/n={})", self.value, self.n, w = self.n as usize + 2)
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// `V_j = U_j xor K`.
pub fn compute_vj(uj: Block, k: Block) -> Result<Block> {
    if uj.n != k.n {
        return Err(Error::WidthMismatch {
            expected: uj.n(),
            found: k.n(),
        });
    }
    Ok(uj ^ k)
}


/// Splits a byte string, most significant bit first, into `4n`-bit blocks.
pub fn blocks_from_bytes(bytes: &[u8], n: u32) -> Result<Vec<Block>> {
    check_width(n)?;
    let width = 4 * n as usize;
    if !(bytes.len() * 8).is_multiple_of(width) {
        return Err(Error::Domain(format!(
            "{} bytes do not split into whole {width}-bit blocks",
            bytes.len()
        )));
    }
    let mut out = Vec::with_capacity(bytes.len() * 8 / width);
    let (mut acc, mut bits) = (0u128, 0usize);
    for &byte in bytes {
        acc = (acc << 8) | byte as u128;
        bits += 8;
        while bits >= width {
            bits -= width;
            out.push(Block::truncated((acc >> bits) as u64, n));
            acc &= (1u128 << bits) - 1;
        }
    }
    Ok(out)
}

/// Inverse of [`blocks_from_bytes`].
pub fn blocks_to_bytes(blocks: &[Block]) -> Result<Vec<u8>> {
    let Some(first) = blocks.first() else { return Ok(Vec::new()) };
    let n = first.n();
    let width = 4 * n as usize;
    if let Some(b) = blocks.iter().find(|b| b.n() != n) {
        return Err(Error::WidthMismatch { expected: n, found: b.n() });
    }
    if !(blocks.len() * width).is_multiple_of(8) {
        return Err(Error::Domain(format!("{} blocks of {width} bits are not whole bytes", blocks.len())));
    }
    let mut out = Vec::with_capacity(blocks.len() * width / 8);
    let (mut acc, mut bits) = (0u128, 0usize);
    for b in blocks {
        acc = (acc << width) | b.value() as u128;
        bits += width;
        while bits >= 8 {
            bits -= 8;
            out.push((acc >> bits) as u8);
            acc &= (1u128 << bits) - 1;
        }
    }
    Ok(out)
}
