//! Differential chosen-plaintext and chosen-ciphertext reconstruction of
//! the secret bit permutations.
//!
//! Two messages that agree on blocks `1..j-1` and differ in one bit of
//! block `j` share every register feeding block `j`, so the masks cancel
//! and `C_j ^ C'_j = f_{j-1}(e_l)`: a single bit that reveals where
//! `f_{j-1}` sends bit `l`. One reference message plus `4n` single-bit
//! variants therefore pin down `f_{j-1}` completely.

use rayon::prelude::*;

use super::oracle::{DecryptionOracle, EncryptionOracle};
use super::state::{Provenance, RecoveredState};
use crate::error::{Error, Result};
use crate::keystream::{check_width, BitPermutation, Block};

/// `P^(*) = (P*, ..., P*)` of length `j` followed by the `4n` variants whose
/// last block is `P* ^ 2^(l-1)`, `l = 1..4n`.
pub fn gen_cpa_battery(j: usize, n: u32, p_star: Block) -> Vec<Vec<Block>> {
    assert!(j >= 1, "block index starts at 1");
    assert_eq!(p_star.n(), n);
    let reference = vec![p_star; j];
    let mut battery = Vec::with_capacity(4 * n as usize + 1);
    battery.push(reference.clone());
    for l in 0..4 * n {
        let mut variant = reference.clone();
        variant[j - 1] = p_star.flip_bit(l);
        battery.push(variant);
    }
    battery
}

/// Reads a permutation off the single-bit differences between the
/// reference output block and each variant's output block.
fn permutation_from_differences(reference: Block, variants: &[Block], n: u32) -> Result<BitPermutation> {
    let mut dest = Vec::with_capacity(variants.len());
    for (l, v) in variants.iter().enumerate() {
        let delta = *v ^ reference;
        if delta.value().count_ones() != 1 {
            return Err(Error::OracleModel(format!(
                "difference for input bit {l} is {:#x}, not a single bit; the clock is not fixed",
                delta.value()
            )));
        }
        dest.push(delta.value().trailing_zeros() as usize);
    }
    BitPermutation::from_dest(&dest, n)
        .map_err(|_| Error::OracleModel(format!("differences {dest:?} do not form a bijection; the clock is not fixed")))
}

/// Recovers `f_{j-1}` with `4n + 1` chosen plaintexts built around `p_star`.
pub fn recover_fj_cpa_with<O: EncryptionOracle + ?Sized>(oracle: &mut O, j: usize, p_star: Block) -> Result<BitPermutation> {
    let n = p_star.n();
    let outputs = gen_cpa_battery(j, n, p_star)
        .iter()
        .map(|p| oracle.encrypt(p).map(|c| c[j - 1]))
        .collect::<Result<Vec<_>>>()?;
    permutation_from_differences(outputs[0], &outputs[1..], n)
}

/// Recovers `f_{j-1}` with the all-zero reference plaintext.
pub fn recover_fj_cpa<O: EncryptionOracle + ?Sized>(oracle: &mut O, j: usize, n: u32) -> Result<BitPermutation> {
    check_width(n)?;
    recover_fj_cpa_with(oracle, j, Block::zero(n))
}

/// `f_0 .. f_{r-1}` using exactly `(4n + 1) r` queries.
pub fn recover_all_f<O: EncryptionOracle + ?Sized>(oracle: &mut O, r: usize, n: u32) -> Result<RecoveredState> {
    let mut state = RecoveredState::new(n, r)?;
    for j in 1..=r {
        let f = recover_fj_cpa(oracle, j, n)?;
        state.set_f(j - 1, f, Provenance::Cpa);
    }
    Ok(state)
}

/// Same as [`recover_all_f`], one oracle instance per block index. The
/// factory must hand out oracles that share the hidden session.
pub fn recover_all_f_parallel<O, F>(make_oracle: F, r: usize, n: u32) -> Result<(RecoveredState, usize)>
where
    O: EncryptionOracle,
    F: Fn() -> O + Sync,
{
    let mut state = RecoveredState::new(n, r)?;
    let results: Vec<(BitPermutation, usize)> = (1..=r)
        .into_par_iter()
        .map(|j| {
            let mut oracle = make_oracle();
            let f = recover_fj_cpa(&mut oracle, j, n)?;
            Ok((f, oracle.query_count()))
        })
        .collect::<Result<_>>()?;
    let mut queries = 0;
    for (j, (f, q)) in results.into_iter().enumerate() {
        state.set_f(j, f, Provenance::Cpa);
        queries += q;
    }
    Ok((state, queries))
}

/// Chosen-ciphertext dual: ciphertexts differing in one bit of block `j`
/// reveal `f_{j-1}^{-1}`.
pub fn recover_finv_cca_with<O: DecryptionOracle + ?Sized>(oracle: &mut O, j: usize, c_star: Block) -> Result<BitPermutation> {
    let n = c_star.n();
    let outputs = gen_cpa_battery(j, n, c_star)
        .iter()
        .map(|c| oracle.decrypt(c).map(|p| p[j - 1]))
        .collect::<Result<Vec<_>>>()?;
    permutation_from_differences(outputs[0], &outputs[1..], n)
}

pub fn recover_finv_cca<O: DecryptionOracle + ?Sized>(oracle: &mut O, j: usize, n: u32) -> Result<BitPermutation> {
    check_width(n)?;
    recover_finv_cca_with(oracle, j, Block::zero(n))
}

/// `f_0 .. f_{r-1}` via their inverses, `(4n + 1) r` chosen ciphertexts.
pub fn recover_all_f_cca<O: DecryptionOracle + ?Sized>(oracle: &mut O, r: usize, n: u32) -> Result<RecoveredState> {
    let mut state = RecoveredState::new(n, r)?;
    for j in 1..=r {
        let finv = recover_finv_cca(oracle, j, n)?;
        state.set_f(j - 1, finv.inverse(), Provenance::Cca);
    }
    Ok(state)
}
