use crate::cipher::{KeyMaterial, Session};
use crate::error::Result;
use crate::keystream::{Block, QuarterPermTable};
use crate::scalar::Unit;

/// Black-box encryption machine: returns ciphertext blocks for chosen
/// plaintexts and nothing else.
pub trait EncryptionOracle {
    fn encrypt(&mut self, plaintext: &[Block]) -> Result<Vec<Block>>;
    fn query_count(&self) -> usize;
}

/// Black-box decryption machine for chosen ciphertexts.
pub trait DecryptionOracle {
    fn decrypt(&mut self, ciphertext: &[Block]) -> Result<Vec<Block>>;
    fn query_count(&self) -> usize;
}

/// A machine whose clock the attacker has pinned: every query runs under
/// the same hidden session.
#[derive(Debug)]
pub struct FixedClockOracle<'a, T> {
    session: &'a Session<T>,
    queries: usize,
}

impl<'a, T: Unit> FixedClockOracle<'a, T> {
    pub fn new(session: &'a Session<T>) -> Self {
        FixedClockOracle { session, queries: 0 }
    }

    pub fn clock(&self) -> u64 {
        self.session.t()
    }

    /// Queries of either kind served so far.
    pub fn query_count(&self) -> usize {
        self.queries
    }
}

impl<T: Unit> EncryptionOracle for FixedClockOracle<'_, T> {
    fn encrypt(&mut self, plaintext: &[Block]) -> Result<Vec<Block>> {
        self.queries += 1;
        Ok(self.session.encrypt(plaintext)?.blocks)
    }

    fn query_count(&self) -> usize {
        self.queries
    }
}

impl<T: Unit> DecryptionOracle for FixedClockOracle<'_, T> {
    fn decrypt(&mut self, ciphertext: &[Block]) -> Result<Vec<Block>> {
        self.queries += 1;
        self.session.decrypt_blocks(ciphertext)
    }

    fn query_count(&self) -> usize {
        self.queries
    }
}

/// A machine whose clock keeps running: query `q` is served under
/// timestamp `t0 + q`. The differential attacks must detect this.
#[derive(Debug)]
pub struct DriftingClockOracle<T> {
    key: KeyMaterial<T>,
    table: QuarterPermTable,
    t0: u64,
    r: usize,
    queries: usize,
}

impl<T: Unit> DriftingClockOracle<T> {
    pub fn new(key: KeyMaterial<T>, t0: u64, r: usize, table: QuarterPermTable) -> Self {
        DriftingClockOracle {
            key,
            table,
            t0,
            r,
            queries: 0,
        }
    }

    fn tick(&mut self) -> Result<Session<T>> {
        let t = self.t0 + self.queries as u64;
        self.queries += 1;
        Session::with_table(self.key, t, self.r, &self.table)
    }
}

impl<T: Unit> EncryptionOracle for DriftingClockOracle<T> {
    fn encrypt(&mut self, plaintext: &[Block]) -> Result<Vec<Block>> {
        Ok(self.tick()?.encrypt(plaintext)?.blocks)
    }

    fn query_count(&self) -> usize {
        self.queries
    }
}

impl<T: Unit> DecryptionOracle for DriftingClockOracle<T> {
    fn decrypt(&mut self, ciphertext: &[Block]) -> Result<Vec<Block>> {
        self.tick()?.decrypt_blocks(ciphertext)
    }

    fn query_count(&self) -> usize {
        self.queries
    }
}
