//! Breaking the cipher with a pinned clock: differential recovery of the
//! bit permutations, then known-plaintext recovery of the noise vectors,
//! then decryption without the key.

mod differential;
mod oracle;
mod solver;
mod state;

pub use differential::{
    gen_cpa_battery, recover_all_f, recover_all_f_cca, recover_all_f_parallel, recover_finv_cca,
    recover_finv_cca_with, recover_fj_cpa, recover_fj_cpa_with,
};
pub use oracle::{DecryptionOracle, DriftingClockOracle, EncryptionOracle, FixedClockOracle};
pub use solver::{
    decryption_equivalent, distinct_solutions, exhaustive_candidates, find_uj, first_block_mask,
    prioritized_candidates, solve_uj, CandidateOrder, Candidates, KnownPair,
};
pub use state::{keyless_decrypt, BlockSolve, PartialPlaintext, Provenance, Recovered, RecoveredState, Search};
