//! Waiting-time datasets and their CSV + JSON form.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{OUParams, SimConfig};
use crate::error::{Error, Result};
use crate::output::{atomic_write, csv_document, json_document, sha256_hex, Provenance};
use crate::rate::RateSpec;

pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// A single simulated waiting time. Censored outcomes carry `tau = t_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaitingTimeOutcome {
    pub index: u64,
    pub tau: f64,
    pub censored: bool,
    pub steps: u64,
}

/// A seeded batch of outcomes, ordered by sample index, with the parameters
/// that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaitingTimeDataset {
    pub schema_version: u32,
    pub params: OUParams,
    pub rate: RateSpec,
    /// Configuration with the resolved horizon; the worker count is not
    /// recorded because it cannot affect the outcomes.
    pub config: SimConfig,
    #[serde(skip)]
    pub outcomes: Vec<WaitingTimeOutcome>,
}

/// JSON sidecar written next to the CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    #[serde(flatten)]
    provenance: Provenance,
    #[serde(flatten)]
    meta: WaitingTimeDataset,
    n_outcomes: usize,
    n_censored: usize,
    csv_sha256: String,
}

const HEADER: [&str; 4] = ["index", "tau", "censored", "steps"];

impl WaitingTimeDataset {
    pub fn new(outcomes: Vec<WaitingTimeOutcome>, params: OUParams, rate: RateSpec, config: SimConfig) -> Self {
        Self { schema_version: DATASET_SCHEMA_VERSION, params, rate, config, outcomes }
    }

    /// Builds a dataset from bare waiting times (all uncensored), for
    /// analysing samples that did not come from the simulator.
    pub fn from_times(times: &[f64]) -> Self {
        let outcomes = times
            .iter()
            .enumerate()
            .map(|(i, &tau)| WaitingTimeOutcome { index: i as u64, tau, censored: false, steps: 0 })
            .collect();
        let config = SimConfig { n_samples: times.len() as u64, workers: None, ..Default::default() };
        Self::new(outcomes, OUParams { eps: 0.0, x0: 0.0 }, RateSpec::unit_step(), config)
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn n_censored(&self) -> usize {
        self.outcomes.iter().filter(|o| o.censored).count()
    }

    /// Waiting times of uncensored outcomes, in sample order.
    pub fn uncensored_times(&self) -> Vec<f64> {
        self.outcomes.iter().filter(|o| !o.censored).map(|o| o.tau).collect()
    }

    fn rows(&self) -> impl Iterator<Item = String> + '_ {
        self.outcomes
            .iter()
            .map(|o| format!("{},{},{},{}", o.index, o.tau, u8::from(o.censored), o.steps))
    }

    /// Hex SHA-256 over the outcome rows, independent of provenance.
    pub fn digest(&self) -> String {
        let mut body = String::with_capacity(self.outcomes.len() * 24);
        for r in self.rows() {
            body.push_str(&r);
            body.push('\n');
        }
        sha256_hex(body.as_bytes())
    }

    pub fn to_csv(&self, provenance: &Provenance) -> String {
        csv_document(provenance, &HEADER, self.rows())
    }

    /// Writes `<stem>.csv` and `<stem>.json` into `dir` atomically and
    /// returns both paths.
    pub fn write(&self, dir: &Path, stem: &str, provenance: &Provenance) -> Result<(PathBuf, PathBuf)> {
        let csv = self.to_csv(provenance);
        let sidecar = Sidecar {
            provenance: provenance.clone(),
            meta: self.clone(),
            n_outcomes: self.len(),
            n_censored: self.n_censored(),
            csv_sha256: sha256_hex(csv.as_bytes()),
        };
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        atomic_write(&csv_path, csv.as_bytes())?;
        atomic_write(&json_path, json_document(&sidecar)?.as_bytes())?;
        Ok((csv_path, json_path))
    }

    /// Reads a dataset written by [`WaitingTimeDataset::write`]; `csv_path`
    /// must have its `.json` sidecar beside it.
    pub fn read(csv_path: &Path) -> Result<Self> {
        let sidecar: Sidecar = serde_json::from_str(&std::fs::read_to_string(csv_path.with_extension("json"))?)?;
        if sidecar.meta.schema_version != DATASET_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "dataset schema version {} is not supported",
                sidecar.meta.schema_version
            )));
        }
        let text = std::fs::read_to_string(csv_path)?;
        let bad = |line: usize, what: &str| Error::Config(format!("{}:{line}: {what}", csv_path.display()));
        let mut outcomes = Vec::with_capacity(sidecar.n_outcomes);
        let mut header_seen = false;
        for (n, line) in text.lines().enumerate() {
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            if !header_seen {
                if line != HEADER.join(",") {
                    return Err(bad(n + 1, "unexpected header"));
                }
                header_seen = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(n + 1, "expected 4 fields"));
            }
            let parse_err = |_| bad(n + 1, "unparsable field");
            outcomes.push(WaitingTimeOutcome {
                index: f[0].parse().map_err(parse_err)?,
                tau: f[1].parse().map_err(|_| bad(n + 1, "unparsable tau"))?,
                censored: match f[2] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(bad(n + 1, "censored must be 0 or 1")),
                },
                steps: f[3].parse().map_err(|_| bad(n + 1, "unparsable steps"))?,
            });
        }
        if outcomes.len() != sidecar.n_outcomes {
            return Err(Error::Config(format!(
                "{} holds {} rows but its sidecar records {}",
                csv_path.display(),
                outcomes.len(),
                sidecar.n_outcomes
            )));
        }
        Ok(Self { outcomes, ..sidecar.meta })
    }
}
