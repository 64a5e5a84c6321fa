use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ExperimentReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            other => Err(crate::error::invalid(format!("unknown report format {other:?}"))),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> Error + '_ {
    move |source| Error::Json {
        path: path.to_path_buf(),
        source,
    }
}

/// Location of the JSON file holding everything a CSV report leaves out.
pub fn csv_sidecar(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Per-trial rows: `trial,T,T1,T2,Tprime,stalled`, with empty phase cells for
/// stalled trials.
pub fn csv_rows(report: &ExperimentReport) -> String {
    let mut out = String::from("trial,T,T1,T2,Tprime,stalled\n");
    for rec in &report.trials {
        match rec.phases {
            Some(ph) => out.push_str(&format!(
                "{},{},{},{},{},false\n",
                rec.trial, ph.t, ph.t1, ph.t2, ph.t_prime
            )),
            None => out.push_str(&format!("{},,,,,true\n", rec.trial)),
        }
    }
    out
}

/// Writes `report` to `path`. CSV output additionally writes the config
/// echo and aggregates to [`csv_sidecar`] so the table stays one row per
/// trial.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).map_err(json_err(path))?;
            text.push('\n');
            fs::write(path, text).map_err(io_err(path))
        }
        ReportFormat::Csv => {
            let mut file = fs::File::create(path).map_err(io_err(path))?;
            file.write_all(csv_rows(report).as_bytes()).map_err(io_err(path))?;
            let meta_path = csv_sidecar(path);
            let mut meta = report.clone();
            meta.trials.clear();
            meta.traces = None;
            let text = serde_json::to_string_pretty(&meta).map_err(json_err(&meta_path))?;
            fs::write(&meta_path, text + "\n").map_err(io_err(&meta_path))
        }
    }
}

/// Reads a report written in JSON format.
pub fn load_report(path: &Path) -> Result<ExperimentReport> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(json_err(path))
}
