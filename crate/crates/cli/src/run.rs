//! Shared plumbing: error classes with their exit codes, configuration
//! hashing and atomic output.

use std::fmt;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed input; exit 2.
    Input(String),
    /// A check ran and failed; exit 1.
    Failed(String),
}

impl CliError {
    pub fn input(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "error: {m}"),
            CliError::Failed(m) => write!(f, "failed: {m}"),
        }
    }
}

pub fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Identity of one invocation, recorded in every artifact.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub command: &'static str,
    pub config_hash: String,
    pub seed: u64,
}

impl RunInfo {
    /// `config` is the fully resolved configuration; its serialization has
    /// sorted keys, so equal configurations hash equally.
    pub fn new(command: &'static str, config: &serde_json::Value, seed: u64) -> Self {
        let text = serde_json::to_string(config).expect("JSON values serialize");
        RunInfo {
            command,
            config_hash: sha256_hex(text.as_bytes()),
            seed,
        }
    }

    pub fn comment_header(&self) -> String {
        format!(
            "# eikonal {VERSION}\n# command={} config_sha256={} seed={}\n",
            self.command, self.config_hash, self.seed
        )
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "tool": format!("eikonal {VERSION}"),
            "command": self.command,
            "config_sha256": self.config_hash,
            "seed": self.seed,
        })
    }
}

/// Write via a temporary file in the destination directory and rename it
/// into place, so a failed run never leaves a partial file.
pub fn write_atomic(
    path: &Path,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf).map_err(io)?;
        buf.flush().map_err(io)?;
    }
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Pretty JSON to `out`, or to stdout without a path.
pub fn emit_json(out: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    match out {
        Some(path) => write_atomic(path, |w| writeln!(w, "{text}")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// `NaN` and infinities become `null`.
pub fn num(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v).map_or(serde_json::Value::Null, serde_json::Value::Number)
}
