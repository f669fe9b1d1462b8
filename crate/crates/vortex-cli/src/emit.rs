//! Deterministic artifact emission and config ingestion.
//!
//! Every CSV field is printed with [`sci`] — 17 significant digits —
//! so a double round-trips losslessly and regression diffs are
//! byte-stable. JSON is serialized with sorted keys (the default
//! `serde_json` map), pretty-printed, newline-terminated. Nothing
//! here writes timestamps, hostnames, or other run-varying state:
//! identical configurations must produce identical bytes.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

/// A failure caused by the invocation: bad flag combinations,
/// missing or unparsable input files, unwritable outputs. Mapped to
/// exit status 2.
#[derive(Debug)]
pub struct InputError {
    /// Machine-readable failure class for the error JSON.
    pub kind: &'static str,
    /// Human-readable description.
    pub message: String,
    /// The file involved, when there is one.
    pub path: Option<PathBuf>,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{} ({})", self.message, p.display()),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for InputError {}

/// A verification requested on the command line found a disagreement.
/// The computation itself succeeded and the artifacts are on disk;
/// the exit status (1) flags that the cross-check did not hold.
#[derive(Debug)]
pub struct VerificationError {
    /// What disagreed, with the numbers.
    pub message: String,
}

impl fmt::Display for VerificationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for VerificationError {}

/// Invocation error without an associated file.
pub fn input_error(kind: &'static str, message: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError {
        kind,
        message: message.into(),
        path: None,
    })
}

/// Invocation error naming the file that caused it.
pub fn file_error(kind: &'static str, message: impl Into<String>, path: &Path) -> anyhow::Error {
    anyhow::Error::new(InputError {
        kind,
        message: message.into(),
        path: Some(path.to_path_buf()),
    })
}

/// Read and parse a JSON input file. A missing file is reported as
/// `missing_file` (the error JSON names the path); malformed content
/// as `invalid_input`.
pub fn read_json<T: DeserializeOwned>(path: &Path, what: &str) -> anyhow::Result<T> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(file_error(
                "missing_file",
                format!("{what} file not found"),
                path,
            ));
        }
        Err(e) => {
            return Err(file_error(
                "unreadable_input",
                format!("cannot read {what}: {e}"),
                path,
            ));
        }
    };
    serde_json::from_str(&text)
        .map_err(|e| file_error("invalid_input", format!("cannot parse {what}: {e}"), path))
}

/// Scientific notation with 16 fractional digits — 17 significant
/// digits, enough for a lossless `f64` round-trip.
pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a CSV: header line, one line per row, `\n` endings, trailing
/// newline.
pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> anyhow::Result<()> {
    let mut text = String::with_capacity(header.len() + 1 + rows.iter().map(|r| r.len() + 1).sum::<usize>());
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_bytes(path, text.as_bytes())
}

/// Write pretty-printed JSON with a trailing newline.
pub fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("JSON value serializes");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn write_bytes(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes)
        .map_err(|e| file_error("unwritable_output", format!("cannot write output: {e}"), path))
}

/// SHA-256 over the canonical (compact, sorted-key) JSON encoding of
/// the semantic run configuration, as a lowercase hex string.
///
/// Output locations are deliberately excluded from the hash: moving
/// an artifact must not change what it claims to be.
pub fn config_hash(config: &serde_json::Value) -> String {
    let canonical = serde_json::to_string(config).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest {
        use fmt::Write;
        write!(out, "{byte:02x}").expect("writing to a String cannot fail");
    }
    out
}

/// Metadata sidecar path: `prof.csv` → `prof.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}
