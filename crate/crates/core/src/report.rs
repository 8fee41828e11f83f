//! Machine-readable verification reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// At most this many failing points are kept in a report.
pub const MAX_FAILURES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub point: String,
    pub values: BTreeMap<String, f64>,
}

/// Record of one seeded verification run.
///
/// `pass` holds exactly when no failures were recorded and the largest
/// residual stays within the tolerance given to [`VerificationReport::finish`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub command: String,
    pub inputs: BTreeMap<String, String>,
    pub seed: u64,
    pub samples: u64,
    pub max_abs_residual: f64,
    pub failures: Vec<Failure>,
    pub pass: bool,
    pub wall_time_ms: u64,
}

impl VerificationReport {
    pub fn new(command: impl Into<String>, seed: u64, samples: u64) -> Self {
        Self {
            command: command.into(),
            inputs: BTreeMap::new(),
            seed,
            samples,
            max_abs_residual: 0.0,
            failures: Vec::new(),
            pass: false,
            wall_time_ms: 0,
        }
    }

    pub fn input(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    /// Folds a residual into `max_abs_residual`. NaN residuals poison the maximum.
    pub fn residual(&mut self, r: f64) {
        if r.is_nan() || self.max_abs_residual.is_nan() {
            self.max_abs_residual = f64::NAN;
        } else {
            self.max_abs_residual = self.max_abs_residual.max(r.abs());
        }
    }

    pub fn fail<'a>(
        &mut self,
        point: impl Into<String>,
        values: impl IntoIterator<Item = (&'a str, f64)>,
    ) {
        if self.failures.len() < MAX_FAILURES {
            self.failures.push(Failure {
                point: point.into(),
                values: values.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
            });
        }
    }

    /// Sets `pass` from the recorded failures and the residual tolerance.
    pub fn finish(&mut self, tol: f64) -> &mut Self {
        self.input("tol", tol);
        self.pass = self.failures.is_empty() && self.max_abs_residual <= tol;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

/// Writes the report as pretty-printed JSON.
pub fn emit_report(r: &VerificationReport, path: impl AsRef<Path>) -> Result<()> {
    let mut text = r.to_json();
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
