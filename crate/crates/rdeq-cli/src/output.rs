//! Output plumbing: reproducibility headers, content hashing, and atomic
//! file writes (temp plus rename, same directory).

use serde_json::json;
use sha2::{Digest, Sha256};
use std::io;
use std::path::Path;

/// Reproducibility metadata embedded in every result file.
#[derive(Debug, Clone)]
pub struct OutputMeta {
    pub version: String,
    pub command_line: String,
    pub seed: u64,
    /// SHA-256 of the source description file, when one was read.
    pub source_sha256: Option<String>,
}

impl OutputMeta {
    pub fn new(seed: u64, source_bytes: Option<&[u8]>) -> Self {
        let command_line: Vec<String> = std::env::args().collect();
        Self {
            version: format!("rdeq {}", env!("CARGO_PKG_VERSION")),
            command_line: command_line.join(" "),
            seed,
            source_sha256: source_bytes.map(sha256_hex),
        }
    }

    /// `#`-prefixed comment lines for CSV emission.
    pub fn csv_header(&self) -> String {
        format!(
            "# {}\n# command: {}\n# seed: {}\n# source_sha256: {}\n",
            self.version,
            self.command_line,
            self.seed,
            self.source_sha256.as_deref().unwrap_or("-")
        )
    }

    pub fn json_value(&self) -> serde_json::Value {
        json!({
            "version": self.version,
            "command": self.command_line,
            "seed": self.seed,
            "source_sha256": self.source_sha256,
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes through a temporary sibling and renames into place, so readers
/// never observe a half-written file.
pub fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let file_name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let mut tmp = std::ffi::OsString::from(".");
    tmp.push(file_name);
    tmp.push(format!(".tmp.{}", std::process::id()));
    let tmp_path = match dir {
        Some(d) => d.join(&tmp),
        None => std::path::PathBuf::from(&tmp),
    };
    std::fs::write(&tmp_path, content)?;
    std::fs::rename(&tmp_path, path)?;
    Ok(())
}
