//! Deterministic JSON reports for check suites.
//!
//! Reports round every floating-point value through a fixed decimal
//! rendering (`{:e}`) before serialization, so two runs with the same
//! seed and configuration produce byte-identical output — the property the
//! command-line tool's `--json` mode is tested for.

use crate::axioms::AxiomReport;
use serde::Serialize;

/// Fixed decimal rendering used for every float that enters a report.
pub fn dec(x: f64) -> String {
    format!("{x:e}")
}

/// Echo of the configuration a suite ran under.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub seed: u64,
    pub trials: usize,
    pub tol: String,
    pub budget: usize,
    pub corpus: String,
}

/// One check's outcome inside a report.
#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub pass: bool,
    pub trials: usize,
    pub max_residual: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl From<&AxiomReport> for CheckEntry {
    fn from(r: &AxiomReport) -> Self {
        CheckEntry {
            name: r.name.clone(),
            pass: r.pass,
            trials: r.trials,
            max_residual: dec(r.max_residual),
            detail: r.worst.clone(),
        }
    }
}

/// A full suite run: tool identity, invocation, configuration echo, and
/// the ordered check outcomes.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ConfigEcho,
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(command: impl Into<String>, config: ConfigEcho) -> Self {
        SuiteReport {
            tool: "tanfold".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            checks: Vec::new(),
            pass: true,
        }
    }

    /// Append a check outcome, folding its pass flag into the suite's.
    pub fn push(&mut self, entry: CheckEntry) {
        self.pass &= entry.pass;
        self.checks.push(entry);
    }

    /// Pretty JSON with a trailing newline; field order is declaration
    /// order, so output is stable byte-for-byte.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }
}
