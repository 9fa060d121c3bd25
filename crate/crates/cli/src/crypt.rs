use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tentbreak::attack::{keyless_decrypt, RecoveredState};
use tentbreak::keystream::{blocks_from_bytes, blocks_to_bytes};
use tentbreak::{with_unit, Backend, Block, Error, KeyMaterial, Message, Session, Unit};

use crate::args::{Config, DecryptArgs, EncryptArgs, KeygenArgs};
use crate::io::{emit, key_backend, parse_unit, read_bytes, read_text};
use crate::{UsageError, VerificationFailed};

/// Draws alpha with `0 < |alpha - 0.5| < 0.01` as represented by `T`.
pub fn safe_alpha<T: Unit, R: Rng>(rng: &mut R) -> anyhow::Result<T> {
    for _ in 0..1000 {
        let alpha = T::from_f64(0.49 + 0.02 * rng.gen::<f64>());
        if !alpha.is_interior() {
            continue;
        }
        let probe = KeyMaterial::new(alpha, T::half(), T::half(), Block::zero(1))?;
        if probe.warnings().is_empty() {
            return Ok(alpha);
        }
    }
    Err(UsageError(format!("backend {} cannot represent an alpha in the safe band", T::backend())).into())
}

/// Safe-band alpha, interior beta and gamma, uniform K.
pub fn random_key<T: Unit, R: Rng>(rng: &mut R, n: u32) -> anyhow::Result<KeyMaterial<T>> {
    let alpha = safe_alpha::<T, R>(rng)?;
    let beta = T::random_interior(rng);
    let gamma = T::random_interior(rng);
    let k = Block::truncated(rng.gen(), n);
    Ok(KeyMaterial::new(alpha, beta, gamma, k)?)
}

/// Backend from the flag, else from the key's tags, else the default.
pub fn resolve_backend(cfg: &Config, key_text: &str) -> Backend {
    cfg.backend.or_else(|| key_backend(key_text)).unwrap_or(Backend::DEFAULT)
}

pub fn load_key<T: Unit>(text: &str, cfg: &Config) -> anyhow::Result<KeyMaterial<T>> {
    let key = KeyMaterial::<T>::parse(text).context("key file")?;
    if let Some(n) = cfg.n {
        if n != key.n() {
            return Err(Error::WidthMismatch { expected: key.n(), found: n }.into());
        }
    }
    Ok(key)
}

pub fn keygen(args: &KeygenArgs, cfg: &Config) -> anyhow::Result<()> {
    with_unit!(cfg.backend.unwrap_or(Backend::DEFAULT), |T| keygen_with::<T>(args, cfg))
}

fn keygen_with<T: Unit>(args: &KeygenArgs, cfg: &Config) -> anyhow::Result<()> {
    let n = cfg.n.unwrap_or(2);
    Block::new(0, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let alpha = match &args.alpha {
        Some(s) => parse_unit::<T>("alpha", s)?,
        None if args.allow_weak => T::random_interior(&mut rng),
        None => safe_alpha::<T, _>(&mut rng)?,
    };
    let beta = match &args.beta {
        Some(s) => parse_unit::<T>("beta", s)?,
        None => T::random_interior(&mut rng),
    };
    let gamma = match &args.gamma {
        Some(s) => parse_unit::<T>("gamma", s)?,
        None => T::random_interior(&mut rng),
    };
    let k = match &args.k {
        Some(s) => Block::from_hex(s, n)?,
        None => Block::truncated(rng.gen(), n),
    };
    let key = KeyMaterial::new(alpha, beta, gamma, k)?;
    for w in key.warnings() {
        eprintln!("warning: {w}");
    }
    emit(cfg.out.as_deref(), key.to_text().as_bytes())
}

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn encrypt(args: &EncryptArgs, cfg: &Config) -> anyhow::Result<()> {
    let key_text = read_text(&args.key)?;
    with_unit!(resolve_backend(cfg, &key_text), |T| encrypt_with::<T>(args, cfg, &key_text))
}

fn encrypt_with<T: Unit>(args: &EncryptArgs, cfg: &Config, key_text: &str) -> anyhow::Result<()> {
    let key = load_key::<T>(key_text, cfg)?;
    let plain = blocks_from_bytes(&read_bytes(&args.input)?, key.n())?;
    let r = cfg.r.unwrap_or(plain.len()).max(1);
    let session = Session::new(key, args.t.unwrap_or_else(now), r)?;
    let c = session.encrypt(&plain)?;
    emit(cfg.out.as_deref(), c.to_text().as_bytes())
}

pub fn decrypt(args: &DecryptArgs, cfg: &Config) -> anyhow::Result<()> {
    let (c, n) = Message::load(&args.input)?;
    match (&args.key, &args.state) {
        (Some(key), _) => {
            let key_text = read_text(key)?;
            with_unit!(resolve_backend(cfg, &key_text), |T| decrypt_with::<T>(&c, n, cfg, &key_text))
        }
        (None, Some(state)) => decrypt_keyless(&c, n, cfg, &RecoveredState::load(state)?),
        (None, None) => Err(UsageError("decrypt needs --key or --state".into()).into()),
    }
}

fn decrypt_with<T: Unit>(c: &Message, n: u32, cfg: &Config, key_text: &str) -> anyhow::Result<()> {
    let key = load_key::<T>(key_text, cfg)?;
    if key.n() != n {
        return Err(Error::WidthMismatch { expected: key.n(), found: n }.into());
    }
    let r = cfg.r.unwrap_or(c.len()).max(1);
    let p = Session::new(key, c.t, r)?.decrypt(c)?;
    emit(cfg.out.as_deref(), &blocks_to_bytes(&p.blocks)?)
}

/// Complete results are written as bytes; partial ones as a block listing
/// with `--` gaps, followed by exit status 4.
fn decrypt_keyless(c: &Message, n: u32, cfg: &Config, state: &RecoveredState) -> anyhow::Result<()> {
    if state.n() != n {
        return Err(Error::WidthMismatch { expected: state.n(), found: n }.into());
    }
    let partial = keyless_decrypt(state, c)?;
    if let Some(p) = partial.clone().into_message() {
        return emit(cfg.out.as_deref(), &blocks_to_bytes(&p.blocks)?);
    }
    emit(cfg.out.as_deref(), partial.to_text().as_bytes())?;
    Err(VerificationFailed(format!(
        "state covers {} of {} blocks",
        partial.decrypted(),
        c.len()
    ))
    .into())
}
