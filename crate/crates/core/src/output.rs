//! Artifact writing: provenance stamps, config hashes and atomic file
//! replacement.
//!
//! CSV files start with a `#` comment line carrying the tool version and the
//! config hash, followed by a header row; fields are comma-separated with
//! `.` decimals and LF line endings. Floats are printed in their shortest
//! round-trip form, so identical inputs give identical bytes.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::TOOL_VERSION;

/// Version and configuration identity embedded in every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_hash: String,
}

impl Provenance {
    /// Provenance for a configuration value, hashed as compact JSON.
    pub fn for_config<T: Serialize + ?Sized>(config: &T) -> Result<Self> {
        Ok(Self { tool_version: TOOL_VERSION.to_string(), config_hash: config_hash(config)? })
    }

    /// The leading CSV comment line, without the newline.
    pub fn comment(&self) -> String {
        format!("# {} config={}", self.tool_version, self.config_hash)
    }
}

/// Hex SHA-256 of the compact JSON encoding of `config`.
pub fn config_hash<T: Serialize + ?Sized>(config: &T) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(config)?))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Builds a CSV document from a header and pre-formatted rows.
pub fn csv_document<I, R>(provenance: &Provenance, header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<str>,
{
    let mut out = provenance.comment();
    out.push('\n');
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(row.as_ref());
        out.push('\n');
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn json_document<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `bytes` to a temporary file beside `path`, then renames it over
/// `path`, so readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn document_layout() {
        let p = Provenance { tool_version: "kol 0.0.0".into(), config_hash: "ab".into() };
        let doc = csv_document(&p, &["t", "y"], ["1,2", "3,4"]);
        assert_eq!(doc, "# kol 0.0.0 config=ab\nt,y\n1,2\n3,4\n");
    }

    #[test]
    fn hash_is_stable() {
        let h = config_hash(&serde_json::json!({"a": 1})).unwrap();
        assert_eq!(h, sha256_hex(br#"{"a":1}"#));
        assert_eq!(h.len(), 64);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("f.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
