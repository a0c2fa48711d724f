use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use unsemi_core::VerifyConfig;

/// Run record written next to every output file as `<output>.manifest.json`.
/// Holds no timestamps, so reruns reproduce it byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: Vec<String>,
    pub output: String,
    pub config: Option<VerifyConfig>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: &[&Path], config: Option<&VerifyConfig>) -> Self {
        RunManifest {
            tool: "unsemi".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            output: String::new(),
            config: config.cloned(),
            seed: config.map(|c| c.seed),
        }
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes `contents` through a temporary file in the same directory, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp =
        tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Writes an output and its manifest sidecar.
pub fn write_with_manifest(path: &Path, contents: &[u8], manifest: &RunManifest) -> Result<()> {
    write_atomic(path, contents)?;
    let mut m = manifest.clone();
    m.output = path.display().to_string();
    let mut json = serde_json::to_string_pretty(&m)?;
    json.push('\n');
    write_atomic(&manifest_path(path), json.as_bytes())
}

/// Reads a text input, naming the file on failure.
pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}
