//! Output directory guard and the run manifest.

use std::fs;
use std::path::{Component, Path, PathBuf};

use rydsim_core::config::RunConfig;
use rydsim_core::spectra::{content_hash, hex_digest, to_csv, SpectrumScan};
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Writes plain file names below one root and nowhere else.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputRecord>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    fn check_name(name: &str) -> Result<(), CliError> {
        let mut parts = Path::new(name).components();
        match (parts.next(), parts.next()) {
            (Some(Component::Normal(_)), None) => Ok(()),
            _ => Err(CliError::Io(format!("refusing to write `{name}` outside the output directory"))),
        }
    }

    pub fn write(&mut self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        Self::check_name(name)?;
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.written.push(OutputRecord { file: name.into(), sha256: hex_digest(contents), bytes: contents.len() });
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV with a `# {"inputs_digest": …, "meta": …}` header line.
    pub fn write_scan(&mut self, name: &str, scan: &SpectrumScan, inputs_digest: &str) -> Result<PathBuf, CliError> {
        let header = json!({ "inputs_digest": inputs_digest, "meta": scan.meta });
        let body = to_csv(scan)?;
        self.write(name, format!("# {header}\n{body}").as_bytes())
    }

    pub fn records(&self) -> &[OutputRecord] {
        &self.written
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub rydsim_cli: &'static str,
    pub rydsim_core: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self { rydsim_cli: env!("CARGO_PKG_VERSION"), rydsim_core: rydsim_core::VERSION }
    }
}

/// Everything that determines the outputs. Thread count and timestamps are
/// deliberately absent.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestInputs {
    pub subcommand: String,
    pub arguments: serde_json::Value,
    pub config: RunConfig,
    pub seed: u64,
    pub input_files: Vec<OutputRecord>,
    pub versions: Versions,
}

impl ManifestInputs {
    pub fn digest(&self) -> String {
        content_hash(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub inputs: ManifestInputs,
    pub inputs_digest: String,
    pub threads: usize,
    pub started_utc: String,
    pub finished_utc: String,
    pub outputs: Vec<OutputRecord>,
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn read_input(path: &Path) -> Result<(String, OutputRecord), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let record = OutputRecord { file: path.display().to_string(), sha256: hex_digest(text.as_bytes()), bytes: text.len() };
    Ok((text, record))
}
