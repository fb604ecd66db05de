//! Artifact writing. Every file is hashed into the run manifest, which
//! `summary.json` binds to the config hash and the certificate.

use std::fs;
use std::path::{Path, PathBuf};

use nldiff_core::model::ConstantsCertificate;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The resolved config with the output directory blanked, so that reruns
/// into different directories produce the same bytes.
pub fn recorded_config(cfg: &RunConfig) -> RunConfig {
    let mut c = cfg.clone();
    c.output.dir = PathBuf::new();
    c
}

pub fn config_hash(cfg: &RunConfig) -> Result<String, CliError> {
    Ok(sha256_hex(&serde_json::to_vec(&recorded_config(cfg))?))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

pub struct Artifacts {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), data)?;
        self.files.push(FileEntry {
            name: name.into(),
            sha256: sha256_hex(data),
        });
        Ok(())
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut data = serde_json::to_vec_pretty(value)?;
        data.push(b'\n');
        self.bytes(name, &data)
    }

    pub fn csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        let data = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
        self.bytes(name, &data)
    }

    /// Runs a core writer into a buffer and records the result.
    pub fn with_writer(
        &mut self,
        name: &str,
        write: impl FnOnce(&mut Vec<u8>) -> nldiff_core::Result<()>,
    ) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.bytes(name, &buf)
    }

    pub fn finish(self, summary: Summary<'_>) -> Result<(), CliError> {
        let full = SummaryFile {
            summary,
            files: self.files,
        };
        let mut data = serde_json::to_vec_pretty(&full)?;
        data.push(b'\n');
        fs::write(self.dir.join("summary.json"), data)?;
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub command: &'a str,
    /// `ok`, `property_failure` or `error`.
    pub status: &'a str,
    pub exit_code: u8,
    pub messages: Vec<String>,
    pub config_hash: String,
    pub config: &'a RunConfig,
    pub certificate: Option<&'a ConstantsCertificate>,
    pub certificate_error: Option<String>,
    pub report: serde_json::Value,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    #[serde(flatten)]
    summary: Summary<'a>,
    files: Vec<FileEntry>,
}
