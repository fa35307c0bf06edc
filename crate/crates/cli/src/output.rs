use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adrelight::imgcore::io::{encode_gray_png, encode_rgb_png};
use adrelight::imgcore::{IlluminanceMap, RgbImage};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn write_rgb(path: &Path, img: &RgbImage) -> CliResult<()> {
    let bytes = encode_rgb_png(img).map_err(|e| CliError::from_core("io", e))?;
    write_atomic(path, &bytes)
}

pub fn write_gray(path: &Path, map: &IlluminanceMap) -> CliResult<()> {
    let bytes = encode_gray_png(map).map_err(|e| CliError::from_core("io", e))?;
    write_atomic(path, &bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

impl FileDigest {
    pub fn of_file(path: &Path) -> CliResult<Self> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        })
    }

    /// Digest of an output file, recorded by file name only so that runs
    /// into different directories produce the same manifest.
    pub fn of_output(path: &Path) -> CliResult<Self> {
        let mut d = Self::of_file(path)?;
        d.path = file_name(path);
        Ok(d)
    }
}

pub fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Digests of every named input that was supplied.
pub fn digest_inputs(inputs: &[(&str, Option<&PathBuf>)]) -> CliResult<BTreeMap<String, FileDigest>> {
    let mut out = BTreeMap::new();
    for (name, path) in inputs {
        if let Some(p) = path {
            out.insert(name.to_string(), FileDigest::of_file(p)?);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: ToolInfo = ToolInfo {
    name: env!("CARGO_PKG_NAME"),
    version: env!("CARGO_PKG_VERSION"),
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn atomic_write_replaces_contents() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/out.txt");
        write_atomic(&p, b"first").unwrap();
        write_atomic(&p, b"second").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"second");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
