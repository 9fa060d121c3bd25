use anyhow::Context;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tentbreak::analysis::{CsvTable, Report};
use tentbreak::attack::{
    exhaustive_candidates, keyless_decrypt, recover_all_f, recover_all_f_cca, BlockSolve, CandidateOrder,
    DriftingClockOracle, FixedClockOracle, RecoveredState, Search,
};
use tentbreak::keystream::blocks_from_bytes;
use tentbreak::{with_unit, Backend, Block, Error, KeyMaterial, Message, QuarterPermTable, Session, Unit};

use crate::args::{AttackArgs, AttackMode, Config, OrderArg, SolveArgs};
use crate::crypt::{load_key, random_key, resolve_backend};
use crate::io::{emit, read_bytes, read_text};
use crate::{UsageError, VerificationFailed};

/// Widest block searched exhaustively; wider blocks stop at the first hit.
const EXHAUSTIVE_MAX_N: u32 = 4;

pub fn run(args: &AttackArgs, cfg: &Config) -> anyhow::Result<()> {
    let key_text = args.key.as_ref().map(read_text).transpose()?;
    let backend = match &key_text {
        Some(text) => resolve_backend(cfg, text),
        None => cfg.backend.unwrap_or(Backend::DEFAULT),
    };
    with_unit!(backend, |T| run_with::<T>(args, cfg, key_text.as_deref()))
}

fn run_with<T: Unit>(args: &AttackArgs, cfg: &Config, key_text: Option<&str>) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let key: KeyMaterial<T> = match key_text {
        Some(text) => load_key(text, cfg)?,
        None => random_key(&mut rng, cfg.n.unwrap_or(2))?,
    };
    let (n, r) = (key.n(), cfg.r.unwrap_or(8));
    let t = args.t.unwrap_or_else(|| rng.gen_range(1..1u64 << 40));
    let session = Session::new(key, t, r)?;

    let mut report = Report::new();
    report.push("mode", format!("{:?}", args.mode).to_lowercase());
    report.push("backend", T::backend());
    report.push("n", n);
    report.push("r", r);
    report.push("t", t);

    let state = if args.drift {
        let mut oracle = DriftingClockOracle::new(key, t, r, QuarterPermTable::default());
        match args.mode {
            AttackMode::Cca => recover_all_f_cca(&mut oracle, r, n)?,
            _ => recover_all_f(&mut oracle, r, n)?,
        }
    } else {
        let mut oracle = FixedClockOracle::new(&session);
        let state = recover_all_f(&mut oracle, r, n)?;
        report.push("cpa_queries", oracle.query_count());
        if args.mode == AttackMode::Cca {
            let mut oracle = FixedClockOracle::new(&session);
            let cca = recover_all_f_cca(&mut oracle, r, n)?;
            report.push("cca_queries", oracle.query_count());
            report.push("cca_agrees_with_cpa", (0..r).all(|j| cca.f(j) == state.f(j)));
            cca
        } else {
            state
        }
    };
    let f_exact = (0..r).all(|j| state.f(j) == Some(&session.permutations()[j]));
    report.push("f_exact", f_exact);

    let mut state = state;
    let mut failure = (!f_exact).then(|| "recovered permutations differ from the session's".to_string());
    if args.mode == AttackMode::Full && failure.is_none() {
        let exact = full_attack(&session, &mut state, args.known, &mut rng, &mut report)?;
        if !exact {
            failure = Some("keyless decryption of a fresh message was not exact".into());
        }
    }
    if let Some(path) = &args.state {
        state.save(path)?;
    }
    emit(cfg.out.as_deref(), report.to_csv().as_bytes())?;
    match failure {
        Some(why) => Err(VerificationFailed(why).into()),
        None => Ok(()),
    }
}

fn random_message<R: Rng>(rng: &mut R, n: u32, len: usize) -> Vec<Block> {
    (0..len).map(|_| Block::truncated(rng.gen(), n)).collect()
}

/// Solves the noise vectors from `known` messages, then decrypts a fresh
/// one without the key. Returns whether that decryption was exact.
fn full_attack<T: Unit, R: Rng>(
    session: &Session<T>,
    state: &mut RecoveredState,
    known: usize,
    rng: &mut R,
    report: &mut Report,
) -> anyhow::Result<bool> {
    if known == 0 {
        return Err(UsageError("--known must be at least 1".into()).into());
    }
    let (n, r) = (session.n(), session.r());
    let pairs = (0..known)
        .map(|_| {
            let p = random_message(rng, n, r);
            let c = session.encrypt(&p)?.blocks;
            Ok((p, c))
        })
        .collect::<tentbreak::Result<Vec<_>>>()?;
    let search = if n <= EXHAUSTIVE_MAX_N {
        Search::Exhaustive(exhaustive_candidates(n))
    } else {
        Search::EarlyExit(exhaustive_candidates(n), u64::MAX)
    };
    let solves = state.solve_from_known(&pairs, &search)?;
    let ambiguous = solves.iter().filter(|s| !s.is_unique()).count();

    let target = random_message(rng, n, r);
    let c = session.encrypt(&target)?;
    let recovered = keyless_decrypt(state, &c)?;
    let exact = recovered.blocks.iter().zip(&target).all(|(b, p)| *b == Some(*p));

    report.push("known_messages", known);
    report.push("solved_blocks", solves.len());
    report.push("ambiguous_blocks", ambiguous);
    report.push("coverage", state.coverage());
    report.push("decryption_exact", exact);
    Ok(exact)
}

/// Splits `PLAIN=CIPHER` into the two paths.
fn parse_known(pair: &str) -> anyhow::Result<(&str, &str)> {
    pair.split_once('=')
        .filter(|(p, c)| !p.is_empty() && !c.is_empty())
        .ok_or_else(|| UsageError(format!("--known `{pair}`: expected PLAINTEXT_FILE=CIPHERTEXT_FILE")).into())
}

pub fn solve_u(args: &SolveArgs, cfg: &Config) -> anyhow::Result<()> {
    let mut state = RecoveredState::load(&args.state)?;
    let n = state.n();
    let mut known = Vec::with_capacity(args.known.len());
    for pair in &args.known {
        let (p, c) = parse_known(pair)?;
        let plain = blocks_from_bytes(&read_bytes(&p.into())?, n).with_context(|| format!("known plaintext {p}"))?;
        let (cipher, cn) = Message::load(c.as_ref())?;
        if cn != n {
            return Err(Error::WidthMismatch { expected: n, found: cn }.into());
        }
        known.push((plain, cipher.blocks));
    }
    let search = match args.order {
        OrderArg::Exhaustive => Search::Exhaustive(exhaustive_candidates(n)),
        OrderArg::Prioritized => {
            let order = CandidateOrder::for_side(args.alpha_est.partial_cmp(&0.5), n);
            Search::EarlyExit(order.iter(n), args.budget)
        }
    };
    let solves = state.solve_from_known(&known, &search)?;
    for s in &solves {
        eprintln!("{}", describe(s));
    }
    emit(cfg.out.as_deref(), state.to_text().as_bytes())
}

fn describe(s: &BlockSolve) -> String {
    format!(
        "block {}: {} candidates, {} distinct{}",
        s.j,
        s.candidates,
        s.distinct,
        if s.is_unique() { "" } else { " (ambiguous)" }
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_pair_syntax() {
        assert_eq!(parse_known("a.bin=b.txt").unwrap(), ("a.bin", "b.txt"));
        assert!(parse_known("a.bin").is_err());
        assert!(parse_known("=b").is_err());
    }
}
