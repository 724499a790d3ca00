//! File formats: spectrum CSV, JSON documents and the run manifest.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::params::{DressedFrame, ModelConfig};
use crate::spectra::Spectrum;

pub const CSV_HEADER: &str = "nu,value";
pub const MANIFEST: &str = "manifest.json";

/// `nu,value` rows with 12 significant digits.
pub fn spectrum_csv(spectrum: &Spectrum) -> Result<String> {
    spectrum.check()?;
    let mut out = String::with_capacity(32 * (spectrum.nu.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (nu, v) in spectrum.nu.iter().zip(&spectrum.values) {
        out.push_str(&format!("{nu:.11e},{v:.11e}\n"));
    }
    Ok(out)
}

pub fn read_spectrum_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config("spectrum", format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::config("spectrum", format!("{}: expected header `{CSV_HEADER}`", path.display())));
    }
    let mut nu = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || Error::config("spectrum", format!("{}: malformed row {}", path.display(), i + 2));
        let (a, b) = line.split_once(',').ok_or_else(bad)?;
        nu.push(a.parse::<f64>().map_err(|_| bad())?);
        values.push(b.parse::<f64>().map_err(|_| bad())?);
    }
    Ok((nu, values))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write through a temporary sibling and rename into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub run_id: String,
    pub software_version: String,
    pub preset: Option<String>,
    pub interpretation: Option<String>,
    pub config: ModelConfig,
    pub frame: DressedFrame,
    pub n_max: usize,
    pub tail_mass: f64,
    pub warnings: Vec<String>,
    /// Wall time per stage in seconds.
    pub timings: BTreeMap<String, f64>,
    /// File name to SHA-256 of its contents.
    pub files: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| Error::ManifestMismatch(format!("no readable manifest at {}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::ManifestMismatch(format!("{}: {e}", path.display())))
    }
}

/// Identifier derived from the resolved configuration and the version, so
/// repeated runs of one config share it.
pub fn run_id(config: &ModelConfig, options_json: &str) -> Result<String> {
    let text = format!("{}|{}|{}", env!("CARGO_PKG_VERSION"), serde_json::to_string(config)?, options_json);
    Ok(sha256_hex(text.as_bytes())[..16].to_string())
}

/// Collects a run's files and writes them, manifest last.
pub struct RunWriter {
    dir: PathBuf,
    files: BTreeMap<String, String>,
}

impl RunWriter {
    pub fn new(dir: &Path) -> Result<RunWriter> {
        std::fs::create_dir_all(dir)?;
        Ok(RunWriter { dir: dir.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        write_atomic(&self.dir.join(name), contents.as_bytes())?;
        self.files.insert(name.to_string(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    pub fn finish(self, mut manifest: RunManifest) -> Result<PathBuf> {
        manifest.files = self.files;
        let path = self.dir.join(MANIFEST);
        write_atomic(&path, to_json(&manifest)?.as_bytes())?;
        Ok(path)
    }
}
