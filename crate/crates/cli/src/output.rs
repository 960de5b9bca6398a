//! Artifact writing and the exit-code contract.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use stance_core::kr::KrError;
use stance_core::sme::SmeError;
use stance_core::synthesis::SynthesisError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

/// Writes `contents` to `dir/name` through a temporary file in the same
/// directory, so readers never observe a partial file.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    let dest = dir.join(name);
    tmp.persist(&dest)
        .with_context(|| format!("cannot write {}", dest.display()))?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Maps an error to the process exit status.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<SynthesisError>() {
            return match e {
                SynthesisError::NonConvergence { .. } => EXIT_NONCONVERGENCE,
                SynthesisError::Sme(_) => EXIT_LIMIT,
                SynthesisError::Kr(_) => EXIT_PARSE,
                _ => EXIT_USAGE,
            };
        }
        if cause.is::<SmeError>() {
            return EXIT_LIMIT;
        }
        if cause.is::<KrError>() {
            return EXIT_PARSE;
        }
    }
    EXIT_USAGE
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_follow_the_cause() {
        let nc = anyhow::Error::new(SynthesisError::NonConvergence { passes: 10 }).context("run");
        assert_eq!(exit_code(&nc), EXIT_NONCONVERGENCE);
        let cap = anyhow::Error::new(SmeError::MergeLimit {
            cap: 1,
            candidates: 9,
        });
        assert_eq!(exit_code(&cap), EXIT_LIMIT);
        assert_eq!(exit_code(&anyhow::anyhow!("no such file")), EXIT_USAGE);
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        write_atomic(dir.path(), "a.txt", "one").unwrap();
        write_atomic(dir.path(), "a.txt", "two").unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("a.txt")).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
