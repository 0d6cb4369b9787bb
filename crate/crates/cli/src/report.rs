//! The JSON run report shared by every subcommand.

use std::path::PathBuf;
use std::time::Instant;

use bpgc_core::Params;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset_io::write_to;
use crate::error::CliResult;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamValues {
    pub m10: f64,
    pub m01: f64,
    pub m11: f64,
    pub m02: f64,
    pub m12: f64,
}

impl From<[f64; 5]> for ParamValues {
    fn from(m: [f64; 5]) -> Self {
        Self {
            m10: m[0],
            m01: m[1],
            m11: m[2],
            m02: m[3],
            m12: m[4],
        }
    }
}

impl From<&Params> for ParamValues {
    fn from(p: &Params) -> Self {
        p.to_array().into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub bpgc_core: String,
    pub bpgc_cli: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub versions: Versions,
    pub seed: Option<u64>,
    /// Parameters supplied by the user or fixed by a template.
    pub params: Option<ParamValues>,
    pub estimates: Option<ParamValues>,
    /// Command-specific results.
    pub results: Value,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            versions: Versions {
                bpgc_core: bpgc_core::VERSION.to_string(),
                bpgc_cli: env!("CARGO_PKG_VERSION").to_string(),
            },
            seed: None,
            params: None,
            estimates: None,
            results: Value::Null,
            elapsed_seconds: 0.0,
        }
    }
}

/// Where the report goes and when the run started.
pub struct Sink {
    pub report_path: Option<PathBuf>,
    pub started: Instant,
}

impl Sink {
    /// Writes the report to `--report` if given, else to standard output;
    /// when standard output already carries data the report goes to
    /// standard error instead.
    pub fn emit(&self, mut report: RunReport, stdout_busy: bool) -> CliResult<()> {
        report.elapsed_seconds = self.started.elapsed().as_secs_f64();
        // serde_json prints the shortest decimal that parses back exactly
        let text = serde_json::to_string_pretty(&report).expect("report is always serializable");
        match (&self.report_path, stdout_busy) {
            (Some(p), _) => write_to(Some(p), |w| writeln!(w, "{text}")),
            (None, false) => write_to(None, |w| writeln!(w, "{text}")),
            (None, true) => {
                eprintln!("{text}");
                Ok(())
            }
        }
    }
}
