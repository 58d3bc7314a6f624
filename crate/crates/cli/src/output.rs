//! Deterministically named artifacts for one run.

use std::path::{Path, PathBuf};

use kol_core::output::{atomic_write, json_document, Provenance};
use kol_core::sde::WaitingTimeDataset;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::{at_stage, CliError};

/// Output directory, file stem and provenance of a run.
///
/// The stem is `<name>-s<seed>-<hash>`, where `hash` is the first twelve
/// hex digits of the configuration hash, so identical configurations map
/// to identical file names.
#[derive(Debug)]
pub struct RunOutput {
    dir: PathBuf,
    stem: String,
    provenance: Provenance,
    input_sha256: Option<String>,
    artifacts: Vec<PathBuf>,
}

/// Header shared by every JSON report.
#[derive(Debug, Serialize)]
struct Report<'a, I: Serialize, R: Serialize> {
    tool_version: &'a str,
    config_hash: &'a str,
    config: &'a I,
    results: &'a R,
}

impl RunOutput {
    pub fn new(config: &ExperimentConfig, input_sha256: Option<String>) -> Result<Self, CliError> {
        let identity = config.identity(input_sha256.clone());
        let provenance = Provenance::for_config(&identity).map_err(at_stage("configure"))?;
        let name = match config.recipe {
            Some(r) => r.name(),
            None => config.kind.name(),
        };
        let stem = format!("{name}-s{}-{}", config.sim.seed, &provenance.config_hash[..12]);
        Ok(Self { dir: config.output_dir.clone(), stem, provenance, input_sha256, artifacts: Vec::new() })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Files written so far, in order.
    pub fn artifacts(&self) -> &[PathBuf] {
        &self.artifacts
    }

    pub fn into_artifacts(self) -> Vec<PathBuf> {
        self.artifacts
    }

    /// Writes `<stem>.<suffix>`.
    pub fn text(&mut self, suffix: &str, body: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(format!("{}.{suffix}", self.stem));
        atomic_write(&path, body.as_bytes()).map_err(at_stage("write"))?;
        self.artifacts.push(path.clone());
        Ok(path)
    }

    /// Writes a JSON report carrying the provenance, the identifying part
    /// of the configuration and `results`.
    pub fn report<R: Serialize>(&mut self, suffix: &str, config: &ExperimentConfig, results: &R) -> Result<PathBuf, CliError> {
        let identity = config.identity(self.input_sha256.clone());
        let doc = Report {
            tool_version: &self.provenance.tool_version,
            config_hash: &self.provenance.config_hash,
            config: &identity,
            results,
        };
        let body = json_document(&doc).map_err(at_stage("write"))?;
        self.text(&format!("{suffix}.json"), &body)
    }

    /// Writes a dataset CSV and its JSON sidecar as `<stem>.<label>.csv`.
    pub fn dataset(&mut self, label: &str, data: &WaitingTimeDataset) -> Result<PathBuf, CliError> {
        let stem = format!("{}.{label}", self.stem);
        let (csv, json) = data.write(&self.dir, &stem, &self.provenance).map_err(at_stage("write"))?;
        self.artifacts.push(csv.clone());
        self.artifacts.push(json);
        Ok(csv)
    }
}
