//! The JSON report: configuration echo, results and a content hash.

use std::fs;
use std::path::Path;

use fatune::tuning::ExperimentReport;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const REPORT_FORMAT: &str = "fatune-report/1";
pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub format: String,
    /// SHA-256 over `blob <len>\0` followed by the compact JSON of
    /// `{"config": ..., "results": ...}`.
    pub content_hash: String,
    pub config: ExperimentConfig,
    pub results: ExperimentReport,
}

#[derive(Serialize)]
struct Hashed<'a> {
    config: &'a ExperimentConfig,
    results: &'a ExperimentReport,
}

pub fn content_hash(config: &ExperimentConfig, results: &ExperimentReport) -> String {
    let body = serde_json::to_vec(&Hashed { config, results }).expect("report serializes");
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", body.len()).as_bytes());
    hasher.update(&body);
    hex::encode(hasher.finalize())
}

impl ReportFile {
    pub fn new(config: ExperimentConfig, results: ExperimentReport) -> Self {
        Self {
            format: REPORT_FORMAT.to_string(),
            content_hash: content_hash(&config, &results),
            config,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn hash_matches(&self) -> bool {
        self.content_hash == content_hash(&self.config, &self.results)
    }

    /// Reads a report; unreadable files are I/O errors, unparsable ones
    /// count as missing data.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let report: ReportFile = serde_json::from_str(&text)
            .map_err(|e| CliError::MissingData(format!("{} is not a valid report: {e}", path.display())))?;
        if report.format != REPORT_FORMAT {
            return Err(CliError::MissingData(format!(
                "{} has format `{}`, expected `{REPORT_FORMAT}`",
                path.display(),
                report.format
            )));
        }
        let cells = report.results.methods.len() * report.results.problems.len();
        if report.results.cells.len() != cells {
            return Err(CliError::MissingData(format!(
                "{} holds {} result cells, expected {cells}",
                path.display(),
                report.results.cells.len()
            )));
        }
        Ok(report)
    }
}
