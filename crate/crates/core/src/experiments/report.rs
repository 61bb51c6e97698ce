use std::fmt::Write as _;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::evolve::{DiagnosticsSpec, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Value {
    Real(f64),
    Complex(Complex64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// One pass/fail comparison of a measured quantity against a limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
}

impl Check {
    /// NaN never passes.
    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.limit,
            Bound::AtLeast => self.value >= self.limit,
        }
    }
}

/// Column-labelled numeric table, written out as CSV by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn trajectory_columns(norms: &[(f64, f64)]) -> Vec<String> {
        let mut columns: Vec<String> = ["t", "Re M", "Im M", "Re E", "Im E", "leakage"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        columns.extend(norms.iter().map(|(s, sigma)| format!("E(s={s},sigma={sigma})")));
        columns
    }

    pub fn from_trajectory(traj: &Trajectory, diagnostics: &DiagnosticsSpec) -> Self {
        let rows = traj
            .times
            .iter()
            .zip(&traj.diagnostics)
            .map(|(&t, d)| {
                let mut row = vec![
                    t,
                    d.mass.re,
                    d.mass.im,
                    d.energy.re,
                    d.energy.im,
                    d.support_leakage,
                ];
                row.extend(&d.norms);
                row
            })
            .collect();
        Self {
            columns: Self::trajectory_columns(&diagnostics.norms),
            rows,
        }
    }
}

/// Outcome of one experiment. `passed` holds exactly when every check passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub claim_id: String,
    pub parameters: Vec<(String, String)>,
    pub measurements: Vec<Measurement>,
    pub checks: Vec<Check>,
    /// Headline tolerance of the experiment.
    pub tolerance: f64,
    pub passed: bool,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub series: Option<TimeSeries>,
    pub runtime_seconds: f64,
}

impl ExperimentReport {
    pub fn measurement(&self, name: &str) -> Option<Value> {
        self.measurements
            .iter()
            .find(|m| m.name == name)
            .map(|m| m.value)
    }

    pub fn real(&self, name: &str) -> Option<f64> {
        match self.measurement(name)? {
            Value::Real(v) => Some(v),
            Value::Complex(_) => None,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Equality of everything except the wall-clock runtime.
    pub fn same_outcome(&self, other: &Self) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.runtime_seconds = 0.0;
        b.runtime_seconds = 0.0;
        a == b
    }

    /// One `key = value` pair per line.
    pub fn to_record(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "experiment = {}", self.experiment);
        let _ = writeln!(out, "claim_id = {}", self.claim_id);
        let _ = writeln!(out, "passed = {}", self.passed);
        let _ = writeln!(out, "tolerance = {:e}", self.tolerance);
        let _ = writeln!(out, "runtime_seconds = {:.3}", self.runtime_seconds);
        for (k, v) in &self.parameters {
            let _ = writeln!(out, "parameter.{k} = {v}");
        }
        for m in &self.measurements {
            match m.value {
                Value::Real(v) => {
                    let _ = writeln!(out, "measurement.{} = {v:e}", m.name);
                }
                Value::Complex(z) => {
                    let _ = writeln!(out, "measurement.{}.re = {:e}", m.name, z.re);
                    let _ = writeln!(out, "measurement.{}.im = {:e}", m.name, z.im);
                }
            }
        }
        for c in &self.checks {
            let op = match c.bound {
                Bound::AtMost => "<=",
                Bound::AtLeast => ">=",
            };
            let verdict = if c.passed() { "pass" } else { "fail" };
            let _ = writeln!(
                out,
                "check.{} = {verdict} ({:e} {op} {:e})",
                c.name, c.value, c.limit
            );
        }
        for (i, n) in self.notes.iter().enumerate() {
            let _ = writeln!(out, "note.{i} = {n}");
        }
        out
    }
}

pub(crate) struct ReportBuilder {
    report: ExperimentReport,
    start: Instant,
}

impl ReportBuilder {
    pub fn new(experiment: &str, claim_id: &str, tolerance: f64) -> Self {
        Self {
            report: ExperimentReport {
                experiment: experiment.to_string(),
                claim_id: claim_id.to_string(),
                parameters: Vec::new(),
                measurements: Vec::new(),
                checks: Vec::new(),
                tolerance,
                passed: false,
                notes: Vec::new(),
                series: None,
                runtime_seconds: 0.0,
            },
            start: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.report.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn real(&mut self, name: &str, value: f64) -> &mut Self {
        self.report.measurements.push(Measurement {
            name: name.to_string(),
            value: Value::Real(value),
        });
        self
    }

    pub fn complex(&mut self, name: &str, value: Complex64) -> &mut Self {
        self.report.measurements.push(Measurement {
            name: name.to_string(),
            value: Value::Complex(value),
        });
        self
    }

    pub fn at_most(&mut self, name: &str, value: f64, limit: f64) -> &mut Self {
        self.push_check(name, value, Bound::AtMost, limit)
    }

    pub fn at_least(&mut self, name: &str, value: f64, limit: f64) -> &mut Self {
        self.push_check(name, value, Bound::AtLeast, limit)
    }

    fn push_check(&mut self, name: &str, value: f64, bound: Bound, limit: f64) -> &mut Self {
        self.report.checks.push(Check {
            name: name.to_string(),
            value,
            bound,
            limit,
        });
        self
    }

    pub fn note(&mut self, note: impl Into<String>) -> &mut Self {
        self.report.notes.push(note.into());
        self
    }

    pub fn series(&mut self, series: TimeSeries) -> &mut Self {
        self.report.series = Some(series);
        self
    }

    pub fn finish(&mut self) -> ExperimentReport {
        let mut report = self.report.clone();
        report.passed = !report.checks.is_empty() && report.checks.iter().all(Check::passed);
        report.runtime_seconds = self.start.elapsed().as_secs_f64();
        report
    }
}
