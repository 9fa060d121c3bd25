//! The time-variant block cipher: key material, per-timestamp sessions and
//! the encryption/decryption recurrences.
//!
//! ```text
//! C_j = f_{j-1}(P_j ^ (C_{j-1} + U_{j+1})) ^ (P_{j-1} + U_{j+1})
//! P_j = f_{j-1}^-1(C_j ^ (P_{j-1} + U_{j+1})) ^ (C_{j-1} + U_{j+1})
//! ```
//!
//! with `+` taken modulo `2^(4n)` and registers seeded by `C_0 = U_0`,
//! `P_0 = U_1`.

use std::path::Path;

use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::keystream::{build_noise_vectors, check_width, compose_fj, BitPermutation, Block, QuarterPermTable};
use crate::scalar::Unit;
use crate::tentmap::{check_interior, derive_x0, TentParams};

/// Parameter choices that are accepted but known to be weak.
#[derive(Clone, Debug, PartialEq)]
pub enum KeyWarning {
    /// `alpha` outside `0 < |alpha - 1/2| < 0.01`.
    AlphaOutsideSafeBand(f64),
    /// `alpha == 1/2`, which collapses the orbit into a short cycle.
    AlphaIsHalf,
}

impl std::fmt::Display for KeyWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KeyWarning::AlphaOutsideSafeBand(a) => {
                write!(f, "alpha = {a} lies outside 0 < |alpha - 0.5| < 0.01; noise vectors will be biased")
            }
            KeyWarning::AlphaIsHalf => f.write_str("alpha = 0.5 degrades the orbit to a cycle of length n_beta + 1"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KeyMaterial<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub k: Block,
}

impl<T: Unit> KeyMaterial<T> {
    pub fn new(alpha: T, beta: T, gamma: T, k: Block) -> Result<Self> {
        check_interior("alpha", alpha)?;
        check_interior("beta", beta)?;
        check_interior("gamma", gamma)?;
        Ok(KeyMaterial { alpha, beta, gamma, k })
    }

    pub fn n(&self) -> u32 {
        self.k.n()
    }

    pub fn params(&self) -> TentParams<T> {
        TentParams {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    pub fn warnings(&self) -> Vec<KeyWarning> {
        let half = BigRational::new(1.into(), 2.into());
        let band = BigRational::new(1.into(), 100.into());
        let dist = (self.alpha.to_rational() - half).abs();
        if dist == BigRational::from_integer(0.into()) {
            vec![KeyWarning::AlphaIsHalf]
        } else if dist >= band {
            vec![KeyWarning::AlphaOutsideSafeBand(self.alpha.to_f64())]
        } else {
            Vec::new()
        }
    }

    /// `alpha=`, `beta=`, `gamma=`, `K=` and `n=` lines.
    pub fn to_text(&self) -> String {
        format!(
            "alpha={}\nbeta={}\ngamma={}\nK=0x{}\nn={}\n",
            self.alpha.encode(),
            self.beta.encode(),
            self.gamma.encode(),
            self.k.to_hex(),
            self.n()
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (mut alpha, mut beta, mut gamma, mut k, mut n) = (None, None, None, None, None);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (name, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse("key file", format!("line `{line}`")))?;
            let value = value.trim();
            match name.trim() {
                "alpha" => alpha = Some(T::decode(value)?),
                "beta" => beta = Some(T::decode(value)?),
                "gamma" => gamma = Some(T::decode(value)?),
                "K" => k = Some(value.to_string()),
                "n" => n = Some(value.parse::<u32>().map_err(|_| Error::parse("key file", format!("n = `{value}`")))?),
                other => return Err(Error::parse("key file", format!("unknown field `{other}`"))),
            }
        }
        let missing = |f: &str| Error::parse("key file", format!("missing `{f}`"));
        let n = n.ok_or_else(|| missing("n"))?;
        check_width(n)?;
        let k = Block::from_hex(&k.ok_or_else(|| missing("K"))?, n)?;
        Self::new(
            alpha.ok_or_else(|| missing("alpha"))?,
            beta.ok_or_else(|| missing("beta"))?,
            gamma.ok_or_else(|| missing("gamma"))?,
            k,
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// A sequence of blocks bound to the timestamp it was produced under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Message {
    pub t: u64,
    pub blocks: Vec<Block>,
}

const CIPHERTEXT_MAGIC: &str = "YTS1";

impl Message {
    pub fn new(t: u64, blocks: Vec<Block>) -> Self {
        Message { t, blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// `YTS1 t=<t> n=<n> len=<len>` followed by one hex block per line.
    pub fn to_text(&self) -> String {
        let n = self.blocks.first().map_or(0, |b| b.n());
        let mut out = format!("{CIPHERTEXT_MAGIC} t={} n={n} len={}\n", self.t, self.blocks.len());
        for b in &self.blocks {
            out.push_str(&b.to_hex());
            out.push('\n');
        }
        out
    }

    /// Parses the ciphertext format; returns the message and its block parameter.
    pub fn parse(text: &str) -> Result<(Self, u32)> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::parse("ciphertext", "empty file"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some(CIPHERTEXT_MAGIC) {
            return Err(Error::parse("ciphertext", format!("header `{header}` lacks {CIPHERTEXT_MAGIC}")));
        }
        let mut get = |name: &str| -> Result<u64> {
            let field = fields
                .next()
                .ok_or_else(|| Error::parse("ciphertext", format!("header missing `{name}`")))?;
            field
                .strip_prefix(name)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::parse("ciphertext", format!("header field `{field}`, expected {name}=<int>")))
        };
        let t = get("t")?;
        let n = get("n")? as u32;
        let len = get("len")? as usize;
        check_width(n)?;
        let blocks = lines.map(|l| Block::from_hex(l, n)).collect::<Result<Vec<_>>>()?;
        if blocks.len() != len {
            return Err(Error::parse("ciphertext", format!("header announces {len} blocks, found {}", blocks.len())));
        }
        Ok((Message { t, blocks }, n))
    }

    pub fn load(path: &Path) -> Result<(Self, u32)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Everything derived from `(key, t)` for messages of up to `r` blocks.
#[derive(Clone, Debug)]
pub struct Session<T> {
    key: KeyMaterial<T>,
    t: u64,
    r: usize,
    x0: T,
    u: Vec<Block>,
    f: Vec<BitPermutation>,
    finv: Vec<BitPermutation>,
}

impl<T: Unit> Session<T> {
    /// Session with the default quarter-permutation table.
    pub fn new(key: KeyMaterial<T>, t: u64, r: usize) -> Result<Self> {
        Self::with_table(key, t, r, &QuarterPermTable::default())
    }

    pub fn with_table(key: KeyMaterial<T>, t: u64, r: usize, table: &QuarterPermTable) -> Result<Self> {
        let x0 = derive_x0(t, key.gamma, key.n())?;
        Self::from_x0(key, t, x0, r, table)
    }

    /// Builds the session around an explicit initial condition instead of
    /// deriving it from `t`.
    pub fn from_x0(key: KeyMaterial<T>, t: u64, x0: T, r: usize, table: &QuarterPermTable) -> Result<Self> {
        if r == 0 {
            return Err(Error::Domain("session capacity r must be at least 1".into()));
        }
        let u = build_noise_vectors(x0, &key.params(), key.n(), r + 1);
        let f: Vec<BitPermutation> = u[..r].iter().map(|&uj| compose_fj(uj ^ key.k, table)).collect();
        let finv = f.iter().map(BitPermutation::inverse).collect();
        Ok(Session {
            key,
            t,
            r,
            x0,
            u,
            f,
            finv,
        })
    }

    pub fn key(&self) -> &KeyMaterial<T> {
        &self.key
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn n(&self) -> u32 {
        self.key.n()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn x0(&self) -> T {
        self.x0
    }

    /// `x_0` sits on a boundary state, so the orbit starts at `beta`.
    pub fn is_degenerate(&self) -> bool {
        !self.x0.is_interior()
    }

    /// `U_0 .. U_{r+1}`.
    pub fn noise(&self) -> &[Block] {
        &self.u
    }

    /// `f_0 .. f_{r-1}`.
    pub fn permutations(&self) -> &[BitPermutation] {
        &self.f
    }

    pub fn inverse_permutations(&self) -> &[BitPermutation] {
        &self.finv
    }

    fn check_message(&self, blocks: &[Block]) -> Result<()> {
        if blocks.is_empty() {
            return Err(Error::EmptyMessage);
        }
        if blocks.len() > self.r {
            return Err(Error::LengthOverflow {
                len: blocks.len(),
                max: self.r,
            });
        }
        if let Some(b) = blocks.iter().find(|b| b.n() != self.n()) {
            return Err(Error::WidthMismatch {
                expected: self.n(),
                found: b.n(),
            });
        }
        Ok(())
    }

    pub fn encrypt(&self, plaintext: &[Block]) -> Result<Message> {
        self.check_message(plaintext)?;
        let mut prev_c = self.u[0];
        let mut prev_p = self.u[1];
        let mut out = Vec::with_capacity(plaintext.len());
        for (j, &p) in plaintext.iter().enumerate() {
            let mask = self.u[j + 2];
            let c = self.f[j].apply_unchecked(p ^ prev_c.add_mod(mask)) ^ prev_p.add_mod(mask);
            out.push(c);
            prev_c = c;
            prev_p = p;
        }
        Ok(Message::new(self.t, out))
    }

    pub fn decrypt(&self, ciphertext: &Message) -> Result<Message> {
        if ciphertext.t != self.t {
            return Err(Error::Domain(format!(
                "ciphertext bound to t={} but session was built for t={}",
                ciphertext.t, self.t
            )));
        }
        self.decrypt_blocks(&ciphertext.blocks).map(|b| Message::new(self.t, b))
    }

    pub fn decrypt_blocks(&self, ciphertext: &[Block]) -> Result<Vec<Block>> {
        self.check_message(ciphertext)?;
        let mut prev_c = self.u[0];
        let mut prev_p = self.u[1];
        let mut out = Vec::with_capacity(ciphertext.len());
        for (j, &c) in ciphertext.iter().enumerate() {
            let mask = self.u[j + 2];
            let p = self.finv[j].apply_unchecked(c ^ prev_p.add_mod(mask)) ^ prev_c.add_mod(mask);
            out.push(p);
            prev_c = c;
            prev_p = p;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use num_traits::Zero;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::Fp62;

    fn fp(s: &str) -> Fp62 {
        Fp62::from_decimal(s).unwrap()
    }

    fn golden_key() -> KeyMaterial<Fp62> {
        KeyMaterial::new(fp("0.43"), fp("0.7"), fp("0.37"), Block::new(0xa5, 2).unwrap()).unwrap()
    }

    fn blocks(values: &[u64], n: u32) -> Vec<Block> {
        values.iter().map(|&v| Block::new(v, n).unwrap()).collect()
    }

    #[test]
    fn sessions_are_deterministic() {
        let a = Session::new(golden_key(), 1234, 16).unwrap();
        let b = Session::new(golden_key(), 1234, 16).unwrap();
        assert_eq!(a.noise(), b.noise());
        assert_eq!(a.permutations(), b.permutations());
        assert_eq!(a.noise().len(), 18);
        assert_eq!(a.permutations().len(), 16);
    }

    #[test]
    fn timestamp_changes_x0() {
        let a = Session::new(golden_key(), 1234, 4).unwrap();
        let b = Session::new(golden_key(), 1235, 4).unwrap();
        assert_ne!(a.x0(), b.x0());
        // 10/12 and 100/120 collide exactly
        let c = Session::new(golden_key(), 12, 4).unwrap();
        let d = Session::new(golden_key(), 120, 4).unwrap();
        assert_eq!(c.x0(), d.x0());
    }

    #[test]
    fn power_of_ten_timestamp_is_degenerate_but_usable() {
        let s = Session::new(golden_key(), 1000, 4).unwrap();
        assert!(s.is_degenerate());
        let p = blocks(&[1, 2, 3], 2);
        assert_eq!(s.decrypt(&s.encrypt(&p).unwrap()).unwrap().blocks, p);
    }

    #[test]
    fn collapses_to_rotation_without_noise() {
        // Identity quarter permutations give f = rotation by n bits; zero
        // registers and masks leave C_1 = rotl(P_1, n).
        let key = KeyMaterial::new(fp("0.43"), fp("0.7"), fp("0.37"), Block::zero(2)).unwrap();
        let mut s = Session::from_x0(key, 1, Fp62::zero(), 1, &QuarterPermTable::identity()).unwrap();
        s.u.iter_mut().for_each(|u| *u = Block::zero(2));
        for v in 0..256u64 {
            let c = s.encrypt(&blocks(&[v], 2)).unwrap();
            assert_eq!(c.blocks[0].value(), ((v << 2) | (v >> 6)) & 0xff);
        }
    }

    #[test]
    fn golden_ciphertext() {
        let s = Session::new(golden_key(), 1234, 8).unwrap();
        let p = blocks(&[0x00, 0x01, 0x7f, 0x80, 0xff, 0x55, 0xaa, 0x3c], 2);
        let c = s.encrypt(&p).unwrap();
        let hex: Vec<String> = c.blocks.iter().map(|b| b.to_hex()).collect();
        assert_eq!(hex.join(" "), GOLDEN_CIPHERTEXT);
        assert_eq!(s.decrypt(&c).unwrap().blocks, p);
    }

    const GOLDEN_CIPHERTEXT: &str = "ff 80 0b 34 c2 16 aa 9c";

    #[test]
    fn round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let n = rng.gen_range(1..=2);
            let key = KeyMaterial::new(
                Fp62::random_interior(&mut rng),
                Fp62::random_interior(&mut rng),
                Fp62::random_interior(&mut rng),
                Block::truncated(rng.gen(), n),
            )
            .unwrap();
            let s = Session::new(key, rng.gen_range(1..u64::MAX), 16).unwrap();
            let len = rng.gen_range(1..=16);
            let p: Vec<Block> = (0..len).map(|_| Block::truncated(rng.gen(), n)).collect();
            assert_eq!(s.decrypt(&s.encrypt(&p).unwrap()).unwrap().blocks, p);
        }
    }

    #[test]
    fn single_bit_plaintext_flip_touches_one_ciphertext_bit() {
        let s = Session::new(golden_key(), 98765, 8).unwrap();
        let p = blocks(&[0x12, 0x34, 0x56, 0x78], 2);
        let c = s.encrypt(&p).unwrap();
        for j in 0..4 {
            for bit in 0..8 {
                let mut q = p.clone();
                q[j] = q[j].flip_bit(bit);
                let c2 = s.encrypt(&q).unwrap();
                assert_eq!(c.blocks[..j], c2.blocks[..j]);
                assert_eq!((c.blocks[j] ^ c2.blocks[j]).value().count_ones(), 1);
            }
        }
    }

    #[test]
    fn message_limits() {
        let s = Session::new(golden_key(), 1234, 2).unwrap();
        assert!(matches!(s.encrypt(&blocks(&[1, 2, 3], 2)), Err(Error::LengthOverflow { len: 3, max: 2 })));
        assert!(matches!(s.encrypt(&[]), Err(Error::EmptyMessage)));
        assert!(matches!(s.encrypt(&blocks(&[1], 1)), Err(Error::WidthMismatch { .. })));
        let c = s.encrypt(&blocks(&[1], 2)).unwrap();
        assert!(s.decrypt(&Message::new(999, c.blocks)).is_err());
        assert!(Session::new(golden_key(), 1234, 0).is_err());
    }

    #[test]
    fn key_file_round_trip() {
        let key = golden_key();
        let parsed = KeyMaterial::<Fp62>::parse(&key.to_text()).unwrap();
        assert_eq!(parsed, key);
        assert!(KeyMaterial::<f64>::parse(&key.to_text()).is_err());
        let decimal = "alpha=0.43\nbeta=0.7\ngamma=0.37\nK=0xa5\nn=2\n";
        assert_eq!(KeyMaterial::<Fp62>::parse(decimal).unwrap(), key);
        assert!(KeyMaterial::<Fp62>::parse("alpha=0.43\nn=2\n").is_err());
        assert!(KeyMaterial::<Fp62>::parse("alpha=1\nbeta=0.7\ngamma=0.37\nK=0xa5\nn=2\n").is_err());
    }

    #[test]
    fn weak_alpha_warnings() {
        let mut key = golden_key();
        assert_eq!(key.warnings().len(), 1);
        key.alpha = fp("0.505");
        assert!(key.warnings().is_empty());
        key.alpha = fp("0.5");
        assert_eq!(key.warnings(), vec![KeyWarning::AlphaIsHalf]);
        key.alpha = fp("0.52");
        assert_eq!(key.warnings().len(), 1);
    }

    #[test]
    fn ciphertext_file_round_trip() {
        let s = Session::new(golden_key(), 1234, 4).unwrap();
        let c = s.encrypt(&blocks(&[9, 8, 7], 2)).unwrap();
        let text = c.to_text();
        assert!(text.starts_with("YTS1 t=1234 n=2 len=3\n"));
        let (parsed, n) = Message::parse(&text).unwrap();
        assert_eq!((parsed, n), (c, 2));
        assert!(Message::parse("YTS1 t=1 n=2 len=2\n00\n").is_err());
        assert!(Message::parse("XXX t=1 n=2 len=0\n").is_err());
        assert!(Message::parse("YTS1 t=1 n=2 len=1\n100\n").is_err());
    }

    #[test]
    fn binary64_sessions_round_trip() {
        let key = KeyMaterial::new(0.43f64, 0.7, 0.37, Block::new(0xa5, 2).unwrap()).unwrap();
        let s = Session::new(key, 1234, 8).unwrap();
        let p = blocks(&[1, 2, 3, 4, 5, 6, 7, 8], 2);
        assert_eq!(s.decrypt(&s.encrypt(&p).unwrap()).unwrap().blocks, p);
        assert!(!s.x0().is_zero());
    }
}
