//! Time-variant tent-map block cipher together with the differential
//! attacks that strip its sub-key, the noise-vector statistics that expose
//! its weak parameters, and the orbit diagnostics behind its degradation.
//!
//! Map arithmetic is generic over [`Unit`]: the bit-exact fixed-point
//! [`Fixed<L>`] (default [`Fp62`]) or native `f64`. Combinatorics are generic
//! over [`Probability`]: `f64` or exact [`Exact`] rationals.

pub mod analysis;
pub mod attack;
pub mod cipher;
pub mod error;
pub mod keystream;
pub mod scalar;
pub mod tentmap;

pub use cipher::{KeyMaterial, KeyWarning, Message, Session};
pub use error::{Error, Result};
pub use keystream::{BitPermutation, Block, Extractor, QuarterPermTable};
pub use scalar::{Backend, Fixed, Probability, Unit};
pub use tentmap::{OrbitReport, TentParams};

/// Fixed point with 62 fractional bits, the default backend.
pub type Fp62 = Fixed<62>;
/// Fixed point with 30 fractional bits.
pub type Fp30 = Fixed<30>;
/// Exact rational probabilities.
pub type Exact = num_rational::BigRational;

pub type Session62 = Session<Fp62>;
pub type SessionF64 = Session<f64>;
pub type Key62 = KeyMaterial<Fp62>;
pub type KeyF64 = KeyMaterial<f64>;
