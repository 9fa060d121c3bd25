use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use tentbreak::{Backend, Unit};

/// Writes to `out`, or standard output when absent.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

pub fn read_bytes(path: &PathBuf) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("reading {}", path.display()))
}

pub fn read_text(path: &PathBuf) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Backend named by the tag of the key file's `alpha` line, if tagged.
pub fn key_backend(text: &str) -> Option<Backend> {
    let alpha = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("alpha="))?
        .trim();
    let (tag, _) = alpha.split_once(':')?;
    tag.parse().ok()
}

/// Decimal or tagged fraction for the active backend.
pub fn parse_unit<T: Unit>(what: &str, s: &str) -> anyhow::Result<T> {
    T::decode(s).with_context(|| format!("--{what} `{s}`"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_from_key_text() {
        assert_eq!(key_backend("alpha=fp62:0x1\nbeta=..."), Some(Backend::Fixed(62)));
        assert_eq!(key_backend("beta=x\nalpha=f64:3fe0000000000000"), Some(Backend::Binary64));
        assert_eq!(key_backend("alpha=0.49"), None);
    }
}
