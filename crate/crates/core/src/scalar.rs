//! Scalar types the map and the statistics are generic over.
//!
//! [`Unit`] is a value in `[0, 1]` under one finite-precision arithmetic:
//! either the fixed-point [`Fixed<L>`] (raw integer over `2^L`, round to
//! nearest, bit-exact everywhere) or native IEEE binary floats. [`Probability`]
//! covers the combinatorial side, where `f64` and exact [`BigRational`] are
//! interchangeable.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Float, Num, One, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};

/// Arithmetic realizing a [`Unit`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Fixed point with `L` fractional bits, `1 <= L <= 63`.
    Fixed(u32),
    Binary64,
    Binary32,
}

impl Backend {
    pub const DEFAULT: Backend = Backend::Fixed(62);

    /// Number of distinct representable states in `[0, 1]`, when that is a
    /// meaningful power of two.
    pub fn precision_bits(self) -> Option<u32> {
        match self {
            Backend::Fixed(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backend::Fixed(l) => write!(f, "fp{l}"),
            Backend::Binary64 => f.write_str("f64"),
            Backend::Binary32 => f.write_str("f32"),
        }
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f64" | "binary64" => Ok(Backend::Binary64),
            "f32" | "binary32" => Ok(Backend::Binary32),
            _ => {
                let bits = s
                    .strip_prefix("fp")
                    .and_then(|d| d.parse::<u32>().ok())
                    .ok_or_else(|| Error::parse("backend", format!("`{s}` (expected fpL, f64 or f32)")))?;
                if (1..=MAX_FIXED_BITS).contains(&bits) {
                    Ok(Backend::Fixed(bits))
                } else {
                    Err(Error::parse("backend", format!("fixed-point precision {bits} outside 1..=63")))
                }
            }
        }
    }
}

pub const MAX_FIXED_BITS: u32 = 63;

/// A value in `[0, 1]` that the tent map can iterate.
///
/// Arithmetic saturates into `[0, 1]`; the map only ever divides a smaller
/// quantity by a larger one, so saturation never changes a correct result.
pub trait Unit:
    Copy
    + PartialOrd
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Sub<Output = Self>
    + Div<Output = Self>
{
    /// Exact state identity, used for cycle detection.
    type Key: Copy + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn backend() -> Backend;
    fn half() -> Self;
    fn key(self) -> Self::Key;

    /// `num / den` rounded into the backend; requires `num <= den`, `den > 0`.
    fn from_ratio(num: u64, den: u64) -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn to_rational(self) -> BigRational;

    /// Position of the least significant set bit after the binary point,
    /// `None` for zero.
    fn binary_precision(self) -> Option<u32>;

    /// A uniformly drawn representable value strictly inside `(0, 1)`.
    fn random_interior<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Toggles the least significant representable bit, saturating at one.
    fn flip_lsb(self) -> Self;

    /// Tagged serialization, e.g. `fp62:0x2666666666666666` or `f64:3fb999999999999a`.
    fn encode(self) -> String;
    fn decode_tagged(s: &str) -> Result<Self>;

    /// Parses a plain decimal such as `0.123`, rounding once into the backend.
    fn from_decimal(s: &str) -> Result<Self> {
        let (num, den) = decimal_ratio(s)?;
        Ok(Self::from_ratio(num, den))
    }

    /// Accepts either the tagged form or a plain decimal.
    fn decode(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(':') {
            Self::decode_tagged(s)
        } else {
            Self::from_decimal(s)
        }
    }

    fn is_interior(self) -> bool {
        self > Self::zero() && self < Self::one()
    }
}

/// Splits `0.d1d2...dk` into an exact ratio `(digits, 10^k)` bounded to `[0, 1]`.
fn decimal_ratio(s: &str) -> Result<(u64, u64)> {
    let bad = || Error::parse("fraction", format!("`{s}` is not a decimal in [0, 1]"));
    let s = s.trim();
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let den = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
    if num > den {
        return Err(bad());
    }
    Ok((num, den))
}

/// Fixed-point fraction `raw / 2^L` with `raw <= 2^L`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fixed<const L: u32> {
    raw: u64,
}

impl<const L: u32> Fixed<L> {
    const VALID: () = assert!(L >= 1 && L <= MAX_FIXED_BITS, "fixed-point precision must be 1..=63");

    pub const ONE_RAW: u64 = {
        let () = Self::VALID;
        1u64 << L
    };

    pub fn from_raw(raw: u64) -> Option<Self> {
        (raw <= Self::ONE_RAW).then_some(Fixed { raw })
    }

    pub fn raw(self) -> u64 {
        self.raw
    }

    fn saturate(raw: u128) -> Self {
        Fixed {
            raw: raw.min(Self::ONE_RAW as u128) as u64,
        }
    }

    /// `round(num * 2^L / den)` saturated at one.
    fn div_round(num: u128, den: u128) -> Self {
        if den == 0 {
            return if num == 0 { Self::zero() } else { Self::one() };
        }
        Self::saturate(((num << L) + den / 2) / den)
    }
}

impl<const L: u32> fmt::Debug for Fixed<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (~{})", self.encode(), self.to_f64())
    }
}

impl<const L: u32> fmt::Display for Fixed<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl<const L: u32> Add for Fixed<L> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::saturate(self.raw as u128 + rhs.raw as u128)
    }
}

impl<const L: u32> Sub for Fixed<L> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Fixed {
            raw: self.raw.saturating_sub(rhs.raw),
        }
    }
}

impl<const L: u32> Mul for Fixed<L> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let prod = self.raw as u128 * rhs.raw as u128;
        Self::saturate((prod + (1u128 << (L - 1))) >> L)
    }
}

impl<const L: u32> Div for Fixed<L> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        Self::div_round(self.raw as u128, rhs.raw as u128)
    }
}

impl<const L: u32> Zero for Fixed<L> {
    fn zero() -> Self {
        Fixed { raw: 0 }
    }
    fn is_zero(&self) -> bool {
        self.raw == 0
    }
}

impl<const L: u32> One for Fixed<L> {
    fn one() -> Self {
        Fixed { raw: Self::ONE_RAW }
    }
}

impl<const L: u32> Unit for Fixed<L> {
    type Key = u64;

    fn backend() -> Backend {
        Backend::Fixed(L)
    }

    fn half() -> Self {
        Fixed {
            raw: Self::ONE_RAW >> 1,
        }
    }

    fn key(self) -> u64 {
        self.raw
    }

    fn from_ratio(num: u64, den: u64) -> Self {
        Self::div_round(num as u128, den as u128)
    }

    fn from_f64(x: f64) -> Self {
        let scaled = (x.clamp(0.0, 1.0) * Self::ONE_RAW as f64).round();
        Self::saturate(scaled as u128)
    }

    fn to_f64(self) -> f64 {
        self.raw as f64 / Self::ONE_RAW as f64
    }

    fn to_rational(self) -> BigRational {
        BigRational::new(BigInt::from(self.raw), BigInt::from(Self::ONE_RAW))
    }

    fn binary_precision(self) -> Option<u32> {
        (self.raw != 0).then(|| L - self.raw.trailing_zeros().min(L))
    }

    fn random_interior<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Fixed {
            raw: rng.gen_range(1..Self::ONE_RAW),
        }
    }

    fn flip_lsb(self) -> Self {
        Self::saturate((self.raw ^ 1) as u128)
    }

    fn encode(self) -> String {
        let width = L.div_ceil(4) as usize;
        format!("fp{L}:0x{:0width$x}", self.raw)
    }

    fn decode_tagged(s: &str) -> Result<Self> {
        let prefix = format!("fp{L}:");
        let body = s.strip_prefix(&prefix).ok_or_else(|| Error::BackendMismatch {
            value: s.to_string(),
            expected: format!("fp{L}"),
        })?;
        let hex = body
            .strip_prefix("0x")
            .ok_or_else(|| Error::parse("fraction", format!("`{s}` lacks 0x prefix")))?;
        let raw = u64::from_str_radix(hex, 16).map_err(|e| Error::parse("fraction", format!("`{s}`: {e}")))?;
        Self::from_raw(raw).ok_or_else(|| Error::parse("fraction", format!("`{s}` exceeds one")))
    }
}

macro_rules! float_unit {
    ($t:ty, $bits:ty, $backend:expr, $tag:literal, $width:literal) => {
        impl Unit for $t {
            type Key = $bits;

            fn backend() -> Backend {
                $backend
            }

            fn half() -> Self {
                0.5
            }

            fn key(self) -> $bits {
                self.to_bits()
            }

            fn from_ratio(num: u64, den: u64) -> Self {
                (num as f64 / den as f64) as $t
            }

            fn from_f64(x: f64) -> Self {
                x.clamp(0.0, 1.0) as $t
            }

            fn to_f64(self) -> f64 {
                self as f64
            }

            fn to_rational(self) -> BigRational {
                BigRational::from_float(self).expect("unit values are finite")
            }

            fn binary_precision(self) -> Option<u32> {
                if self == 0.0 {
                    return None;
                }
                let (mantissa, exponent, _) = Float::integer_decode(self);
                let lsb = exponent as i32 + mantissa.trailing_zeros() as i32;
                Some((-lsb).max(0) as u32)
            }

            fn random_interior<R: Rng + ?Sized>(rng: &mut R) -> Self {
                loop {
                    let x: $t = rng.gen();
                    if x > 0.0 {
                        return x;
                    }
                }
            }

            fn flip_lsb(self) -> Self {
                <$t>::from_bits(self.to_bits() ^ 1).clamp(0.0, 1.0)
            }

            fn encode(self) -> String {
                format!(concat!($tag, ":{:0", $width, "x}"), self.to_bits())
            }

            fn decode_tagged(s: &str) -> Result<Self> {
                let body = s.strip_prefix(concat!($tag, ":")).ok_or_else(|| Error::BackendMismatch {
                    value: s.to_string(),
                    expected: $tag.to_string(),
                })?;
                let bits = <$bits>::from_str_radix(body.trim_start_matches("0x"), 16)
                    .map_err(|e| Error::parse("fraction", format!("`{s}`: {e}")))?;
                let x = <$t>::from_bits(bits);
                if (0.0..=1.0).contains(&x) {
                    Ok(x)
                } else {
                    Err(Error::parse("fraction", format!("`{s}` is not in [0, 1]")))
                }
            }

            fn from_decimal(s: &str) -> Result<Self> {
                let x: $t = s
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse("fraction", format!("`{s}` is not a number")))?;
                if (0.0..=1.0).contains(&x) {
                    Ok(x)
                } else {
                    Err(Error::parse("fraction", format!("`{s}` is not in [0, 1]")))
                }
            }
        }
    };
}

float_unit!(f64, u64, Backend::Binary64, "f64", "16");
float_unit!(f32, u32, Backend::Binary32, "f32", "8");

/// Runs `$body` with the type alias `$t` bound to the [`Unit`] realizing
/// `$backend`.
///
/// ```
/// use tentbreak::{with_unit, Backend, Unit};
/// let bits = with_unit!(Backend::Fixed(16), |T| T::half().binary_precision());
/// assert_eq!(bits, Some(1));
/// ```
#[macro_export]
macro_rules! with_unit {
    ($backend:expr, |$t:ident| $body:expr) => {
        match $backend {
            $crate::Backend::Binary64 => {
                #[allow(dead_code)]
                type $t = f64;
                $body
            }
            $crate::Backend::Binary32 => {
                #[allow(dead_code)]
                type $t = f32;
                $body
            }
            $crate::Backend::Fixed(bits) => $crate::__with_fixed!(bits, $t, $body;
                1 2 3 4 5 6 7 8 9 10 11 12 13 14 15 16 17 18 19 20 21 22 23 24 25 26 27 28 29 30 31 32
                33 34 35 36 37 38 39 40 41 42 43 44 45 46 47 48 49 50 51 52 53 54 55 56 57 58 59 60 61 62 63),
        }
    };
}

#[doc(hidden)]
#[macro_export]
macro_rules! __with_fixed {
    ($bits:expr, $t:ident, $body:expr; $($l:literal)*) => {
        match $bits {
            $(
                $l => {
                    #[allow(dead_code)]
                    type $t = $crate::Fixed<$l>;
                    $body
                }
            )*
            other => panic!("fixed-point precision {other} outside 1..=63"),
        }
    };
}

/// Probability arithmetic: `f64` for speed, [`BigRational`] for exactness.
pub trait Probability: Clone + fmt::Debug + PartialOrd + Num + Send + Sync {
    fn from_count(count: u128) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    fn log2(&self) -> f64;

    fn powi(&self, exp: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..exp {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Probability for f64 {
    fn from_count(count: u128) -> Self {
        count as f64
    }

    fn from_rational(r: &BigRational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn log2(&self) -> f64 {
        f64::log2(*self)
    }

    fn powi(&self, exp: u32) -> Self {
        f64::powi(*self, exp as i32)
    }
}

impl Probability for BigRational {
    fn from_count(count: u128) -> Self {
        BigRational::from_integer(BigInt::from(count))
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or_else(|| self.log2().exp2())
    }

    fn log2(&self) -> f64 {
        big_log2(self.numer().magnitude()) - big_log2(self.denom().magnitude())
    }

    fn powi(&self, exp: u32) -> Self {
        num_traits::pow(self.clone(), exp as usize)
    }
}

/// log2 of a big unsigned integer, exact to f64 rounding.
fn big_log2(v: &BigUint) -> f64 {
    let bits = v.bits();
    if bits <= 64 {
        return (v.to_u64().unwrap_or(0) as f64).log2();
    }
    let shift = bits - 64;
    let top = (v >> shift).to_u64().unwrap_or(u64::MAX);
    (top as f64).log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Fp62;

    type Fp8 = Fixed<8>;

    #[test]
    fn fixed_division_rounds_to_nearest() {
        let third = Fp8::from_ratio(1, 3);
        assert_eq!(third.raw(), 85); // 85.33
        let two_thirds = Fp8::from_ratio(2, 3);
        assert_eq!(two_thirds.raw(), 171); // 170.67
        assert_eq!((Fp8::half() / Fp8::one()).raw(), 128);
        assert_eq!((Fp8::one() / Fp8::half()), Fp8::one());
    }

    #[test]
    fn binary_precision_of_simple_fractions() {
        assert_eq!(Fp62::from_decimal("0.5").unwrap().binary_precision(), Some(1));
        assert_eq!(Fp62::from_decimal("0.375").unwrap().binary_precision(), Some(3));
        assert_eq!(Fp62::one().binary_precision(), Some(0));
        assert_eq!(Fp62::zero().binary_precision(), None);
        assert_eq!(0.375f64.binary_precision(), Some(3));
        assert_eq!(1.0f64.binary_precision(), Some(0));
        assert_eq!(0.0f64.binary_precision(), None);
        // 0.4 = 0x3fd999999999999a: ulp 2^-54, last set bit 2^-53
        assert_eq!(0.4f64.binary_precision(), Some(53));
        assert_eq!(0.7f64.binary_precision(), Some(52));
        assert_eq!(0.375f32.binary_precision(), Some(3));
    }

    #[test]
    fn encoding_round_trips() {
        let x = Fp62::from_decimal("0.6").unwrap();
        let s = x.encode();
        assert!(s.starts_with("fp62:0x"));
        assert_eq!(Fp62::decode(&s).unwrap(), x);
        assert_eq!(0.1f64.encode(), "f64:3fb999999999999a");
        assert_eq!(f64::decode("f64:3fb999999999999a").unwrap(), 0.1);
        assert!(matches!(Fp62::decode("f64:3fb999999999999a"), Err(Error::BackendMismatch { .. })));
        assert!(Fp62::decode("1.5").is_err());
        assert_eq!(Fixed::<30>::decode("fp30:0x40000000").unwrap(), Fixed::<30>::one());
    }

    #[test]
    fn decimal_parse_is_exact_before_rounding() {
        // 0.15 * 2^62 = 0x0999999999999999.99.. rounds up
        let x = Fp62::from_decimal("0.15").unwrap();
        assert_eq!(x.raw(), 0x0999_9999_9999_999a);
        assert_eq!(Fp62::from_decimal("1").unwrap(), Fp62::one());
        assert_eq!(Fp62::from_decimal(".5").unwrap(), Fp62::half());
    }

    #[test]
    fn backend_names_parse() {
        assert_eq!("fp62".parse::<Backend>().unwrap(), Backend::Fixed(62));
        assert_eq!("f64".parse::<Backend>().unwrap(), Backend::Binary64);
        assert!("fp64".parse::<Backend>().is_err());
        assert!("fp0".parse::<Backend>().is_err());
        assert_eq!(Backend::Fixed(30).to_string(), "fp30");
    }

    #[test]
    fn dispatch_reaches_every_precision() {
        for l in 1..=MAX_FIXED_BITS {
            let got = with_unit!(Backend::Fixed(l), |T| <T as Unit>::backend());
            assert_eq!(got, Backend::Fixed(l));
        }
    }

    #[test]
    fn rational_log2_matches_float() {
        let r = BigRational::new(BigInt::from(3u32), BigInt::from(1u64 << 40));
        assert!((Probability::log2(&r) - (3.0f64).log2() + 40.0).abs() < 1e-12);
        let big = BigRational::from_integer(BigInt::from(1u8) << 200usize);
        assert!((Probability::log2(&big) - 200.0).abs() < 1e-12);
    }
}
