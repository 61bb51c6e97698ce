use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;

use nnls_core::equations::{CoefficientMode, EquationKind, EquationSpec};
use nnls_core::evolve::{DiagnosticsSpec, CFL_LIMIT};
use nnls_core::experiments::{
    make_initial_data, DataParams, InflationParams, InitialDataKind, PicardWindowParams,
    ScalingParams, EXPERIMENTS,
};
use nnls_core::{FrequencyGrid, SpectralField};
use serde::Deserialize;
use toml_edit::{DocumentMut, Item, Table, Value};

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_modes: usize,
    pub length: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            n_modes: 1024,
            length: 80.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EquationConfig {
    pub kind: EquationKind,
    pub alpha: f64,
    pub beta: f64,
    pub gauged_coefficient_mode: CoefficientMode,
}

impl Default for EquationConfig {
    fn default() -> Self {
        Self {
            kind: EquationKind::Nnls,
            alpha: 1.0,
            beta: 0.0,
            gauged_coefficient_mode: CoefficientMode::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InitialDataConfig {
    pub kind: InitialDataKind,
    pub params: DataParams,
}

impl Default for InitialDataConfig {
    fn default() -> Self {
        Self {
            kind: InitialDataKind::Gaussian,
            params: DataParams::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionConfig {
    #[serde(rename = "T")]
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: usize,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            t_final: 1.0,
            dt: 1e-3,
            sample_every: 100,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    /// Falls back to the experiment's own default when absent.
    pub tolerance: Option<f64>,
    /// Second α at which the two gauged gNdNLS coefficients differ.
    pub discriminating_alpha: f64,
    pub scaling: ScalingParams,
    pub picard: PicardWindowParams,
    pub inflation: InflationParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "conservation".into(),
            tolerance: None,
            discriminating_alpha: 2.0,
            scaling: ScalingParams::default(),
            picard: PicardWindowParams::default(),
            inflation: InflationParams::default(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsConfig {
    pub eps0: f64,
    /// `[s, sigma]` pairs.
    pub norms: Vec<[f64; 2]>,
}

impl DiagnosticsConfig {
    pub fn spec(&self) -> DiagnosticsSpec {
        DiagnosticsSpec {
            eps0: self.eps0,
            norms: self.norms.iter().map(|&[s, sigma]| (s, sigma)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, PartialOrd, Ord)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Record,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: String,
    pub formats: BTreeSet<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: "out".into(),
            formats: [OutputFormat::Csv, OutputFormat::Record].into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SweepValue {
    Integer(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    List(Vec<SweepValue>),
}

/// A dotted key and the values it takes, one run per value.
#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: String,
    pub values: Vec<SweepValue>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub equation: EquationConfig,
    pub initial_data: InitialDataConfig,
    pub evolution: EvolutionConfig,
    pub experiment: ExperimentConfig,
    pub diagnostics: DiagnosticsConfig,
    pub output: OutputConfig,
    pub sweep: Option<SweepConfig>,
}

impl RunConfig {
    pub fn grid(&self) -> nnls_core::Result<FrequencyGrid> {
        FrequencyGrid::new(self.grid.n_modes, self.grid.length)
    }

    pub fn equation(&self) -> nnls_core::Result<EquationSpec> {
        let e = &self.equation;
        EquationSpec::new(e.kind, e.alpha, e.beta, e.gauged_coefficient_mode)
    }

    pub fn initial_data(&self) -> nnls_core::Result<SpectralField> {
        make_initial_data(self.initial_data.kind, &self.initial_data.params, self.grid()?)
    }
}

/// Configuration problem pointing back at the offending input.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub origin: String,
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.origin)?;
        if let Some(line) = self.line {
            write!(f, ":{line}")?;
        }
        f.write_str(": ")?;
        if let Some(key) = &self.key {
            write!(f, "{key}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Parsed configuration plus the text it came from, for locating keys.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub document: DocumentMut,
    origin: String,
    text: String,
    overridden: Vec<String>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Reads `key=value`; values that are not valid TOML are taken as strings.
pub fn parse_override(raw: &str) -> Result<(String, Value), String> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("override `{raw}` is not of the form key=value"))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(format!("override `{raw}` has an empty key segment"));
    }
    let value = value.trim();
    let parsed = value
        .parse::<Value>()
        .unwrap_or_else(|_| Value::from(value));
    Ok((key.to_string(), parsed))
}

fn set_path(table: &mut Table, path: &[&str], value: Value) -> Result<(), String> {
    let (last, parents) = path.split_last().expect("non-empty key");
    let mut current = table;
    for (depth, part) in parents.iter().enumerate() {
        let entry = current.entry(part).or_insert_with(toml_edit::table);
        current = match entry {
            Item::Table(t) => t,
            Item::Value(Value::InlineTable(_)) => {
                let inline = entry.as_inline_table_mut().expect("inline table").clone();
                *entry = Item::Table(inline.into_table());
                entry.as_table_mut().expect("just converted")
            }
            _ => {
                return Err(format!(
                    "`{}` is not a table",
                    path[..=depth].join(".")
                ))
            }
        };
    }
    current.insert(last, Item::Value(value));
    Ok(())
}

impl LoadedConfig {
    pub fn parse(origin: &str, text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let err = |line, key: Option<String>, message: String| ConfigError {
            origin: origin.to_string(),
            line,
            key,
            message,
        };
        let mut document: DocumentMut = text.parse().map_err(|e: toml_edit::TomlError| {
            err(e.span().map(|s| line_of(text, s.start)), None, e.message().to_string())
        })?;
        let mut overridden = Vec::new();
        for raw in overrides {
            let (key, value) = parse_override(raw).map_err(|m| err(None, None, m))?;
            let path: Vec<&str> = key.split('.').collect();
            set_path(document.as_table_mut(), &path, value)
                .map_err(|m| err(None, Some(key.clone()), format!("--override: {m}")))?;
            overridden.push(key);
        }
        let text = document.to_string();
        let config: RunConfig = toml_edit::de::from_str(&text).map_err(|e| {
            err(e.span().map(|s| line_of(&text, s.start)), None, e.message().trim().to_string())
        })?;
        let loaded = Self {
            config,
            document,
            origin: origin.to_string(),
            text,
            overridden,
        };
        loaded.validate()?;
        Ok(loaded)
    }

    pub fn load(path: Option<&str>, overrides: &[String]) -> Result<Self, ConfigError> {
        match path {
            None => Self::parse("<defaults>", "", overrides),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| ConfigError {
                    origin: p.to_string(),
                    line: None,
                    key: None,
                    message: format!("cannot read: {e}"),
                })?;
                Self::parse(p, &text, overrides)
            }
        }
    }

    fn span_of(&self, key: &str) -> Option<Range<usize>> {
        let doc = toml_edit::Document::parse(self.text.clone()).ok()?;
        let mut item = doc.as_item();
        let mut span = None;
        for part in key.split('.') {
            item = item.get(part)?;
            span = item.span().or(span);
        }
        span
    }

    /// Error located at `key`, which is the deepest key that exists.
    pub fn error_at(&self, key: &str, message: impl Into<String>) -> ConfigError {
        let mut probe = key;
        let mut line = None;
        loop {
            if let Some(span) = self.span_of(probe) {
                line = Some(line_of(&self.text, span.start));
                break;
            }
            match probe.rsplit_once('.') {
                Some((parent, _)) => probe = parent,
                None => break,
            }
        }
        let mut message = message.into();
        if self
            .overridden
            .iter()
            .any(|o| o == key || key.starts_with(&format!("{o}.")) || o.starts_with(&format!("{key}.")))
        {
            // the line would point into the rewritten document, not the file
            line = None;
            message.push_str(" (set by --override)");
        } else if line.is_none() {
            message.push_str(" (default value)");
        }
        ConfigError {
            origin: self.origin.clone(),
            line,
            key: Some(key.to_string()),
            message,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let c = &self.config;
        let check = |ok: bool, key: &str, message: String| -> Result<(), ConfigError> {
            if ok {
                Ok(())
            } else {
                Err(self.error_at(key, message))
            }
        };
        check(
            c.grid.n_modes >= 4 && c.grid.n_modes % 2 == 0,
            "grid.n_modes",
            format!("must be even and at least 4, got {}", c.grid.n_modes),
        )?;
        check(
            c.grid.length.is_finite() && c.grid.length > 0.0,
            "grid.length",
            format!("must be positive and finite, got {}", c.grid.length),
        )?;
        let grid = c.grid().map_err(|e| self.error_at("grid", e.to_string()))?;
        c.equation().map_err(|e| self.error_at("equation", e.to_string()))?;
        check(
            c.evolution.t_final.is_finite() && c.evolution.t_final >= 0.0,
            "evolution.T",
            format!("must be finite and non-negative, got {}", c.evolution.t_final),
        )?;
        check(
            c.evolution.dt.is_finite() && c.evolution.dt > 0.0,
            "evolution.dt",
            format!("must be positive, got {}", c.evolution.dt),
        )?;
        let cfl = c.evolution.dt * grid.xi_max().powi(2);
        check(
            cfl <= CFL_LIMIT,
            "evolution.dt",
            format!("dt * xi_max^2 = {cfl:.3} exceeds the stability limit {CFL_LIMIT}"),
        )?;
        check(
            c.evolution.sample_every >= 1,
            "evolution.sample_every",
            "must be at least 1".into(),
        )?;
        make_initial_data(c.initial_data.kind, &c.initial_data.params, grid)
            .map_err(|e| self.error_at("initial_data", e.to_string()))?;
        check(
            EXPERIMENTS.iter().any(|e| e.name == c.experiment.name),
            "experiment.name",
            format!("unknown experiment `{}`; see `list`", c.experiment.name),
        )?;
        if let Some(tol) = c.experiment.tolerance {
            check(
                tol.is_finite() && tol > 0.0,
                "experiment.tolerance",
                format!("must be positive, got {tol}"),
            )?;
        }
        check(
            c.diagnostics.eps0.is_finite(),
            "diagnostics.eps0",
            "must be finite".into(),
        )?;
        check(
            c.diagnostics.norms.iter().flatten().all(|v| v.is_finite()),
            "diagnostics.norms",
            "entries must be finite".into(),
        )?;
        check(
            !c.output.directory.is_empty(),
            "output.directory",
            "must not be empty".into(),
        )?;
        if let Some(sweep) = &c.sweep {
            check(
                !sweep.parameter.is_empty(),
                "sweep.parameter",
                "must name a dotted key".into(),
            )?;
            check(!sweep.values.is_empty(), "sweep.values", "must not be empty".into())?;
        }
        Ok(())
    }

    /// Configurations for each sweep value, validated individually.
    pub fn sweep_members(&self) -> Result<Vec<(String, LoadedConfig)>, ConfigError> {
        let sweep = self
            .config
            .sweep
            .as_ref()
            .ok_or_else(|| self.error_at("sweep", "no [sweep] table"))?;
        let values = self
            .document
            .get("sweep")
            .and_then(|s| s.get("values"))
            .and_then(Item::as_array)
            .ok_or_else(|| self.error_at("sweep.values", "must be an array"))?;
        let mut table = self.document.as_table().clone();
        table.remove("sweep");
        let base = DocumentMut::from(table).to_string();
        values
            .iter()
            .map(|v| {
                let raw = v.to_string().trim().to_string();
                let label = raw.trim_matches('"').to_string();
                let origin = format!("{} [{}={label}]", self.origin, sweep.parameter);
                Self::parse(&origin, &base, &[format!("{}={raw}", sweep.parameter)]).map(|c| (label, c))
            })
            .collect()
    }
}
