use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::solver::{distinct_solutions, find_uj, first_block_mask, solve_uj, Candidates, KnownPair};
use crate::cipher::Message;
use crate::error::{Error, Result};
use crate::keystream::{check_width, BitPermutation, Block};

/// How a recovered item was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Cpa,
    Cca,
    Solved,
    /// Supplied from outside the attack.
    Assumed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Cpa => "cpa",
            Provenance::Cca => "cca",
            Provenance::Solved => "solved",
            Provenance::Assumed => "assumed",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cpa" => Ok(Provenance::Cpa),
            "cca" => Ok(Provenance::Cca),
            "solved" => Ok(Provenance::Solved),
            "assumed" => Ok(Provenance::Assumed),
            other => Err(Error::parse("provenance", format!("unknown tag {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Recovered<V> {
    pub value: V,
    pub provenance: Provenance,
}

/// Equivalent key: enough to decrypt without `alpha`, `beta`, `gamma`, `K`.
///
/// `U_j` is indexed as in the cipher (`0..=r+1`). Block 1 needs either the
/// mask `M1 = f_0(U_0 + U_2) ^ (U_1 + U_2)` or all of `U_0, U_1, U_2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveredState {
    n: u32,
    r: usize,
    f: Vec<Option<Recovered<BitPermutation>>>,
    u: Vec<Option<Recovered<Block>>>,
    first_mask: Option<Recovered<Block>>,
}

/// Per-block outcome of [`RecoveredState::solve_from_known`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSolve {
    pub j: usize,
    /// Consistent candidates for the first pair alone.
    pub first_pair_candidates: usize,
    /// Consistent candidates for all pairs.
    pub candidates: usize,
    /// Candidates left after merging decryption-equivalent twins.
    pub distinct: usize,
}

impl BlockSolve {
    pub fn is_unique(&self) -> bool {
        self.distinct == 1
    }
}

/// How candidates are searched for blocks `j >= 2`.
#[derive(Clone, Debug)]
pub enum Search {
    /// Full solution set; only sensible for small `n`.
    Exhaustive(Candidates),
    /// First hit within a budget.
    EarlyExit(Candidates, u64),
}

impl RecoveredState {
    pub fn new(n: u32, r: usize) -> Result<Self> {
        check_width(n)?;
        if r == 0 {
            return Err(Error::Domain("r must be at least 1".into()));
        }
        Ok(RecoveredState {
            n,
            r,
            f: vec![None; r],
            u: vec![None; r + 2],
            first_mask: None,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn set_f(&mut self, j: usize, f: BitPermutation, provenance: Provenance) {
        assert_eq!(f.n(), self.n, "permutation width");
        self.f[j] = Some(Recovered { value: f, provenance });
    }

    pub fn f(&self, j: usize) -> Option<&BitPermutation> {
        self.f.get(j)?.as_ref().map(|e| &e.value)
    }

    pub fn f_entry(&self, j: usize) -> Option<Recovered<BitPermutation>> {
        *self.f.get(j)?
    }

    pub fn set_u(&mut self, j: usize, u: Block, provenance: Provenance) {
        assert_eq!(u.n(), self.n, "block width");
        self.u[j] = Some(Recovered { value: u, provenance });
    }

    pub fn u(&self, j: usize) -> Option<Block> {
        self.u.get(j)?.map(|e| e.value)
    }

    pub fn u_entry(&self, j: usize) -> Option<Recovered<Block>> {
        *self.u.get(j)?
    }

    pub fn set_first_mask(&mut self, m: Block, provenance: Provenance) {
        assert_eq!(m.n(), self.n, "block width");
        self.first_mask = Some(Recovered { value: m, provenance });
    }

    pub fn first_mask(&self) -> Option<Block> {
        self.first_mask
            .map(|e| e.value)
            .or_else(|| self.derived_first_mask())
    }

    fn derived_first_mask(&self) -> Option<Block> {
        let (u0, u1, u2) = (self.u(0)?, self.u(1)?, self.u(2)?);
        Some(self.f(0)?.apply_unchecked(u0.add_mod(u2)) ^ u1.add_mod(u2))
    }

    /// Number of leading blocks this state can decrypt.
    pub fn coverage(&self) -> usize {
        if self.f(0).is_none() || self.first_mask().is_none() {
            return 0;
        }
        (2..=self.r)
            .take_while(|&j| self.f(j - 1).is_some() && self.u(j + 1).is_some())
            .count()
            + 1
    }

    /// Fills in `M1` and `U_3 ..` from known plaintext/ciphertext messages.
    /// Requires the permutations of the blocks being solved. When several
    /// inequivalent candidates remain, the earliest in search order is kept
    /// and the block is reported as not unique.
    pub fn solve_from_known(&mut self, known: &[(Vec<Block>, Vec<Block>)], search: &Search) -> Result<Vec<BlockSolve>> {
        let mut report = Vec::new();
        if known.is_empty() {
            return Err(Error::Domain("at least one known message is required".into()));
        }
        for (p, c) in known {
            if p.len() != c.len() {
                return Err(Error::Domain("known plaintext and ciphertext lengths differ".into()));
            }
        }
        if let Some(f0) = self.f(0).copied() {
            let masks: Vec<Block> = known.iter().map(|(p, c)| first_block_mask(&f0, p[0], c[0])).collect();
            if masks.iter().any(|&m| m != masks[0]) {
                return Err(Error::Inconsistent("known messages disagree on the block-1 mask".into()));
            }
            self.set_first_mask(masks[0], Provenance::Solved);
            report.push(BlockSolve {
                j: 1,
                first_pair_candidates: 1,
                candidates: 1,
                distinct: 1,
            });
        }
        let longest = known.iter().map(|(p, _)| p.len()).max().unwrap_or(0).min(self.r);
        for j in 2..=longest {
            let Some(f) = self.f(j - 1).copied() else { continue };
            let pairs: Vec<KnownPair> = known
                .iter()
                .filter_map(|(p, c)| KnownPair::from_message(p, c, j))
                .collect();
            let solve = match search {
                Search::Exhaustive(order) => {
                    let all = solve_uj(&pairs, &f, order.clone())?;
                    let first = solve_uj(&pairs[..1], &f, order.clone())?.len();
                    let distinct = distinct_solutions(&f, &all);
                    self.set_u(j + 1, all[0], Provenance::Solved);
                    BlockSolve {
                        j,
                        first_pair_candidates: first,
                        candidates: all.len(),
                        distinct: distinct.len(),
                    }
                }
                Search::EarlyExit(order, budget) => {
                    let (x, _) = find_uj(&pairs, &f, order.clone(), *budget)?;
                    self.set_u(j + 1, x, Provenance::Solved);
                    BlockSolve {
                        j,
                        first_pair_candidates: 0,
                        candidates: 1,
                        distinct: 1,
                    }
                }
            };
            report.push(solve);
        }
        Ok(report)
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("YTSREC n={} r={}\n", self.n, self.r);
        for (j, e) in self.f.iter().enumerate() {
            if let Some(e) = e {
                s.push_str(&format!("f{j}: {} @{}\n", e.value.to_text(), e.provenance));
            }
        }
        if let Some(m) = self.first_mask {
            s.push_str(&format!("M1: 0x{} @{}\n", m.value.to_hex(), m.provenance));
        }
        for (j, e) in self.u.iter().enumerate() {
            if let Some(e) = e {
                s.push_str(&format!("U{j}: 0x{} @{}\n", e.value.to_hex(), e.provenance));
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::parse("recovered state", "empty file"))?;
        let (n, r) = parse_header(header)?;
        let mut state = RecoveredState::new(n, r)?;
        for line in lines {
            let (body, tag) = line
                .rsplit_once('@')
                .ok_or_else(|| Error::parse("recovered state", format!("missing provenance in {line:?}")))?;
            let provenance: Provenance = tag.trim().parse()?;
            let (name, value) = body
                .split_once(':')
                .ok_or_else(|| Error::parse("recovered state", format!("missing ':' in {line:?}")))?;
            let (name, value) = (name.trim(), value.trim());
            let index = |prefix: &str, limit: usize| -> Result<usize> {
                let j: usize = name[prefix.len()..]
                    .parse()
                    .map_err(|_| Error::parse("recovered state", format!("bad index in {name:?}")))?;
                if j >= limit {
                    return Err(Error::parse("recovered state", format!("{name} out of range")));
                }
                Ok(j)
            };
            let block = |v: &str| Block::from_hex(v.trim_start_matches("0x"), n);
            if name == "M1" {
                state.set_first_mask(block(value)?, provenance);
            } else if name.starts_with('f') {
                let j = index("f", r)?;
                state.set_f(j, BitPermutation::parse(value, n)?, provenance);
            } else if name.starts_with('U') {
                let j = index("U", r + 2)?;
                state.set_u(j, block(value)?, provenance);
            } else {
                return Err(Error::parse("recovered state", format!("unknown entry {name:?}")));
            }
        }
        Ok(state)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn parse_header(line: &str) -> Result<(u32, usize)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("YTSREC") {
        return Err(Error::parse("recovered state", "missing YTSREC header"));
    }
    let (mut n, mut r) = (None, None);
    for kv in parts {
        match kv.split_once('=') {
            Some(("n", v)) => n = v.parse().ok(),
            Some(("r", v)) => r = v.parse().ok(),
            _ => return Err(Error::parse("recovered state", format!("bad header field {kv:?}"))),
        }
    }
    match (n, r) {
        (Some(n), Some(r)) => Ok((n, r)),
        _ => Err(Error::parse("recovered state", "header needs n= and r=")),
    }
}

/// Plaintext recovered without the key; `None` marks blocks beyond the
/// state's coverage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialPlaintext {
    pub t: u64,
    pub blocks: Vec<Option<Block>>,
}

impl PartialPlaintext {
    pub fn is_complete(&self) -> bool {
        self.blocks.iter().all(Option::is_some)
    }

    pub fn decrypted(&self) -> usize {
        self.blocks.iter().take_while(|b| b.is_some()).count()
    }

    pub fn into_message(self) -> Option<Message> {
        let blocks = self.blocks.into_iter().collect::<Option<Vec<_>>>()?;
        Some(Message::new(self.t, blocks))
    }

    /// One block per line, `--` for gaps.
    pub fn to_text(&self) -> String {
        self.blocks
            .iter()
            .map(|b| match b {
                Some(b) => format!("{}\n", b.to_hex()),
                None => "--\n".to_string(),
            })
            .collect()
    }
}

/// Decrypts with `f` and `U` only. Every block after the first gap is a
/// gap too, since each block needs its predecessor's plaintext.
pub fn keyless_decrypt(state: &RecoveredState, c: &Message) -> Result<PartialPlaintext> {
    if c.is_empty() {
        return Err(Error::EmptyMessage);
    }
    if c.len() > state.r {
        return Err(Error::LengthOverflow {
            len: c.len(),
            max: state.r,
        });
    }
    if let Some(b) = c.blocks.iter().find(|b| b.n() != state.n) {
        return Err(Error::WidthMismatch {
            expected: state.n,
            found: b.n(),
        });
    }
    let cover = state.coverage();
    let mut out = Vec::with_capacity(c.len());
    for (idx, &cj) in c.blocks.iter().enumerate() {
        let j = idx + 1;
        if j > cover {
            out.push(None);
            continue;
        }
        let finv = state.f(j - 1).expect("covered").inverse();
        let p = if j == 1 {
            finv.apply_unchecked(cj ^ state.first_mask().expect("covered"))
        } else {
            let x = state.u(j + 1).expect("covered");
            let prev_p: Block = out[idx - 1].expect("covered");
            finv.apply_unchecked(cj ^ prev_p.add_mod(x)) ^ c.blocks[idx - 1].add_mod(x)
        };
        out.push(Some(p));
    }
    Ok(PartialPlaintext { t: c.t, blocks: out })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::attack::differential::recover_all_f;
    use crate::attack::oracle::FixedClockOracle;
    use crate::attack::solver::exhaustive_candidates;
    use crate::cipher::{KeyMaterial, Session};
    use crate::keystream::QuarterPermTable;
    use crate::scalar::Unit;
    use crate::Fp62;

    fn random_key(rng: &mut ChaCha8Rng, n: u32) -> KeyMaterial<Fp62> {
        KeyMaterial::new(
            Fp62::random_interior(rng),
            Fp62::random_interior(rng),
            Fp62::random_interior(rng),
            Block::truncated(rng.gen(), n),
        )
        .unwrap()
    }

    fn random_message(rng: &mut ChaCha8Rng, n: u32, len: usize) -> Vec<Block> {
        (0..len).map(|_| Block::truncated(rng.gen(), n)).collect()
    }

    fn known(s: &Session<Fp62>, rng: &mut ChaCha8Rng, count: usize) -> Vec<(Vec<Block>, Vec<Block>)> {
        (0..count)
            .map(|_| {
                let p = random_message(rng, s.n(), s.r());
                let c = s.encrypt(&p).unwrap().blocks;
                (p, c)
            })
            .collect()
    }

    #[test]
    fn ground_truth_state_decrypts() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let s = Session::new(random_key(&mut rng, 2), 99, 8).unwrap();
        let mut st = RecoveredState::new(2, 8).unwrap();
        for (j, f) in s.permutations().iter().enumerate() {
            st.set_f(j, *f, Provenance::Assumed);
        }
        for (j, &u) in s.noise().iter().enumerate() {
            st.set_u(j, u, Provenance::Assumed);
        }
        assert_eq!(st.coverage(), 8);
        let p = random_message(&mut rng, 2, 8);
        let c = s.encrypt(&p).unwrap();
        assert_eq!(keyless_decrypt(&st, &c).unwrap().into_message().unwrap().blocks, p);
    }

    #[test]
    fn unique_solutions_decrypt_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for pairs in [2usize, 8] {
            let mut unique_sessions = 0;
            for _ in 0..20 {
                let s = Session::new(random_key(&mut rng, 2), rng.gen_range(1..1 << 40), 8).unwrap();
                let mut oracle = FixedClockOracle::new(&s);
                let mut st = recover_all_f(&mut oracle, 8, 2).unwrap();
                let known = known(&s, &mut rng, pairs);
                let report = st.solve_from_known(&known, &Search::Exhaustive(exhaustive_candidates(2))).unwrap();
                assert_eq!(report.len(), 8);
                for b in &report[1..] {
                    assert!(b.first_pair_candidates >= b.candidates);
                    assert!(b.candidates >= b.distinct);
                    let f = &s.permutations()[b.j - 1];
                    if b.is_unique() {
                        assert!(crate::attack::solver::decryption_equivalent(f, st.u(b.j + 1).unwrap(), s.noise()[b.j + 1]));
                    }
                }
                if report.iter().all(BlockSolve::is_unique) {
                    unique_sessions += 1;
                    let p = random_message(&mut rng, 2, 8);
                    let d = keyless_decrypt(&st, &s.encrypt(&p).unwrap()).unwrap();
                    assert_eq!(d.into_message().unwrap().blocks, p);
                }
            }
            if pairs == 8 {
                assert!(unique_sessions >= 18, "{unique_sessions}/20");
            }
        }
    }

    #[test]
    fn identity_tables_give_rotation_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let s = Session::with_table(random_key(&mut rng, 1), 5, 4, &QuarterPermTable::identity()).unwrap();
        let mut oracle = FixedClockOracle::new(&s);
        let mut st = recover_all_f(&mut oracle, 4, 1).unwrap();
        let rot = BitPermutation::rotate_left(1, 1).unwrap();
        for j in 0..4 {
            assert_eq!(st.f(j).unwrap(), &rot);
        }
        let known = known(&s, &mut rng, 3);
        st.solve_from_known(&known, &Search::Exhaustive(exhaustive_candidates(1))).unwrap();
        assert_eq!(st.coverage(), 4);
    }

    #[test]
    fn gaps_are_marked() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let s = Session::new(random_key(&mut rng, 2), 4242, 8).unwrap();
        let mut st = RecoveredState::new(2, 8).unwrap();
        for j in 0..4 {
            st.set_f(j, s.permutations()[j], Provenance::Cpa);
        }
        for j in 0..=5 {
            st.set_u(j, s.noise()[j], Provenance::Assumed);
        }
        assert_eq!(st.coverage(), 4);
        let p = random_message(&mut rng, 2, 8);
        let d = keyless_decrypt(&st, &s.encrypt(&p).unwrap()).unwrap();
        assert_eq!(d.decrypted(), 4);
        assert!(d.blocks[4..].iter().all(Option::is_none));
        assert_eq!(d.blocks[..4].iter().map(|b| b.unwrap()).collect::<Vec<_>>(), p[..4]);
        assert!(!d.is_complete());
        assert!(d.to_text().ends_with("--\n--\n--\n--\n"));
        assert!(d.into_message().is_none());
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let s = Session::new(random_key(&mut rng, 2), 1, 4).unwrap();
        let mut st = RecoveredState::new(2, 4).unwrap();
        st.set_f(0, s.permutations()[0], Provenance::Cpa);
        st.set_f(2, s.permutations()[2], Provenance::Cca);
        st.set_u(3, s.noise()[3], Provenance::Solved);
        st.set_u(0, s.noise()[0], Provenance::Assumed);
        st.set_first_mask(Block::new(0x3c, 2).unwrap(), Provenance::Solved);
        let text = st.to_text();
        assert!(text.starts_with("YTSREC n=2 r=4\nf0: "));
        assert!(text.contains("M1: 0x3c @solved"));
        assert_eq!(RecoveredState::parse(&text).unwrap(), st);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.txt");
        st.save(&path).unwrap();
        assert_eq!(RecoveredState::load(&path).unwrap(), st);
    }

    #[test]
    fn malformed_state_files() {
        for bad in [
            "",
            "YTSREC n=2",
            "NOPE n=2 r=4",
            "YTSREC n=2 r=4\nf0: 0 1 2 3 4 5 6 7",
            "YTSREC n=2 r=4\nf9: 0 1 2 3 4 5 6 7 @cpa",
            "YTSREC n=2 r=4\nf0: 0 0 2 3 4 5 6 7 @cpa",
            "YTSREC n=2 r=4\nU1: 0x1ff @solved",
            "YTSREC n=2 r=4\nU1: 0x1f @guessed",
            "YTSREC n=2 r=4\nX1: 0x1f @solved",
        ] {
            assert!(RecoveredState::parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn decrypt_rejects_bad_shapes() {
        let st = RecoveredState::new(2, 2).unwrap();
        let b = Block::zero(2);
        assert!(matches!(keyless_decrypt(&st, &Message::new(0, vec![])), Err(Error::EmptyMessage)));
        assert!(matches!(
            keyless_decrypt(&st, &Message::new(0, vec![b; 3])),
            Err(Error::LengthOverflow { .. })
        ));
        assert!(matches!(
            keyless_decrypt(&st, &Message::new(0, vec![Block::zero(1)])),
            Err(Error::WidthMismatch { .. })
        ));
        assert_eq!(keyless_decrypt(&st, &Message::new(0, vec![b])).unwrap().decrypted(), 0);
    }
}
