//! JSON run configuration: parsing, defaults and aggregated validation.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thermobound::{
    log_spaced, BoundKind, Estimator, InfoKind, ModelSpec, Spacing, SweepSpec, SweepVariable,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Bound,
    Sweep,
    Verify,
    Plot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorFamily {
    #[default]
    #[serde(alias = "log-uniform")]
    LogUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorConfig {
    #[serde(default)]
    pub family: PriorFamily,
    pub a1: f64,
    pub a2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_nodes")]
    pub m: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            m: default_nodes(),
            spacing: Spacing::default(),
        }
    }
}

fn default_nodes() -> usize {
    thermobound::grid::DEFAULT_NODES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub estimator: Estimator,
    /// Optional per-trial CSV dump.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dump_path: Option<PathBuf>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            trials: default_trials(),
            seed: 0,
            estimator: Estimator::default(),
            dump_path: None,
        }
    }
}

fn default_trials() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogSpace {
    pub start: u64,
    pub stop: u64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub variable: SweepVariable,
    pub values: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub variable: SweepVariable,
    /// Explicit values; after resolution always populated.
    #[serde(default)]
    pub values: Vec<u64>,
    /// Alternative to `values`; expanded and cleared during resolution.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_space: Option<LogSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<SeriesConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    /// CSV table written by an earlier `sweep` run.
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot_path: Option<PathBuf>,
}

/// Top-level configuration. After [`RunConfig::resolve`] every default is
/// explicit, so serializing it reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorConfig>,
    #[serde(default = "default_v")]
    pub v: u64,
    #[serde(default)]
    pub bounds: Vec<BoundKind>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_v() -> u64 {
    1
}

/// One rejected field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Default)]
struct Problems(Vec<FieldError>);

impl Problems {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(FieldError {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, field: &str, message: impl Into<String>) {
        if !ok {
            self.push(field, message);
        }
    }
}

fn positive_finite(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn applies(var: SweepVariable, model: &ModelSpec) -> bool {
    matches!(
        (var, model),
        (SweepVariable::Repetitions, _)
            | (SweepVariable::Particles, ModelSpec::SpinGas { .. })
            | (SweepVariable::Levels, ModelSpec::NLevel { .. })
    )
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, Vec<FieldError>> {
        serde_json::from_str(text).map_err(|e| {
            vec![FieldError {
                field: "<document>".into(),
                message: e.to_string(),
            }]
        })
    }

    /// Fills defaults that depend on other fields and checks every field,
    /// reporting all problems at once.
    pub fn resolve(mut self) -> Result<Self, Vec<FieldError>> {
        let mut p = Problems::default();
        let needs_model = self.command != Command::Plot;

        match (&self.model, needs_model) {
            (None, true) => p.push("model", "required for this command"),
            (Some(ModelSpec::SpinGas { n, epsilon }), _) => {
                p.check(*n >= 1, "model.n", format!("must be at least 1, got {n}"));
                p.check(
                    positive_finite(*epsilon),
                    "model.epsilon",
                    format!("must be positive and finite, got {epsilon}"),
                );
            }
            (Some(ModelSpec::NLevel { levels, epsilon }), _) => {
                p.check(
                    *levels >= 2,
                    "model.N",
                    format!("must be at least 2, got {levels}"),
                );
                p.check(
                    positive_finite(*epsilon),
                    "model.epsilon",
                    format!("must be positive and finite, got {epsilon}"),
                );
            }
            (None, false) => {}
        }

        match (&self.prior, needs_model) {
            (None, true) => p.push("prior", "required for this command"),
            (Some(prior), _) => {
                p.check(
                    positive_finite(prior.a1),
                    "prior.a1",
                    format!("must be positive and finite, got {}", prior.a1),
                );
                p.check(
                    positive_finite(prior.a2),
                    "prior.a2",
                    format!("must be positive and finite, got {}", prior.a2),
                );
                p.check(
                    prior.a1 < prior.a2,
                    "prior.a2",
                    format!("must exceed a1 = {}", prior.a1),
                );
            }
            (None, false) => {}
        }

        p.check(self.v >= 1, "v", "must be at least 1");
        p.check(
            self.grid.m >= 5,
            "grid.m",
            format!("must be at least 5, got {}", self.grid.m),
        );

        if let Some(model) = &self.model {
            let info = model.info_kind();
            if self.bounds.is_empty() {
                self.bounds = vec![
                    BoundKind::optimal_biased(info),
                    BoundKind::cramer_rao_like(info),
                ];
            }
            for (i, k) in self.bounds.iter().enumerate() {
                if k.info_kind() != info {
                    let family = match info {
                        InfoKind::Classical => "classical",
                        InfoKind::Quantum => "quantum",
                    };
                    p.push(
                        &format!("bounds[{i}]"),
                        format!("{k} does not apply to a {family} model"),
                    );
                }
            }
            let mut seen = Vec::new();
            for (i, k) in self.bounds.iter().enumerate() {
                if seen.contains(k) {
                    p.push(&format!("bounds[{i}]"), format!("{k} listed twice"));
                }
                seen.push(*k);
            }
        }

        match self.command {
            Command::Sweep => self.resolve_sweep(&mut p),
            Command::Verify => {
                let mc = self.mc.get_or_insert_with(McConfig::default);
                p.check(
                    mc.trials >= 100,
                    "mc.trials",
                    format!("must be at least 100, got {}", mc.trials),
                );
            }
            Command::Plot => p.check(self.plot.is_some(), "plot", "required for the plot command"),
            Command::Bound => {}
        }
        if self.output.plot_path.is_some()
            && matches!(self.command, Command::Bound | Command::Verify)
        {
            p.push(
                "output.plot_path",
                "only the sweep and plot commands draw plots",
            );
        }

        if p.0.is_empty() {
            Ok(self)
        } else {
            Err(p.0)
        }
    }

    fn resolve_sweep(&mut self, p: &mut Problems) {
        let Some(sweep) = self.sweep.as_mut() else {
            p.push("sweep", "required for the sweep command");
            return;
        };
        match (&sweep.log_space, sweep.values.is_empty()) {
            (Some(_), false) => p.push("sweep", "give either values or log_space, not both"),
            (None, true) => p.push("sweep.values", "must not be empty"),
            (Some(ls), true) => {
                let ok = ls.start >= 1 && ls.start < ls.stop && ls.count >= 2;
                p.check(
                    ok,
                    "sweep.log_space",
                    "needs 1 <= start < stop and count >= 2",
                );
                if ok {
                    sweep.values = log_spaced(ls.start, ls.stop, ls.count);
                    sweep.log_space = None;
                }
            }
            (None, false) => {}
        }
        if let Some(model) = &self.model {
            p.check(
                applies(sweep.variable, model),
                "sweep.variable",
                format!("{} does not apply to this model", sweep.variable),
            );
            if let Some(series) = &sweep.series {
                p.check(
                    applies(series.variable, model),
                    "sweep.series.variable",
                    format!("{} does not apply to this model", series.variable),
                );
                p.check(
                    series.variable != sweep.variable,
                    "sweep.series.variable",
                    "must differ from sweep.variable",
                );
                p.check(
                    !series.values.is_empty(),
                    "sweep.series.values",
                    "must not be empty",
                );
            }
        }
        let minimum = |var: SweepVariable| match var {
            SweepVariable::Levels => 2,
            _ => 1,
        };
        if let Some(bad) = sweep.values.iter().find(|&&x| x < minimum(sweep.variable)) {
            p.push(
                "sweep.values",
                format!("{bad} is below the minimum for {}", sweep.variable),
            );
        }
        if let Some(series) = &sweep.series {
            if let Some(bad) = series
                .values
                .iter()
                .find(|&&x| x < minimum(series.variable))
            {
                p.push(
                    "sweep.series.values",
                    format!("{bad} is below the minimum for {}", series.variable),
                );
            }
        }
    }

    /// Core sweep description; for `bound` a single point with no sweep
    /// coordinate is represented as a one-value sweep over `v`.
    pub fn sweep_spec(&self) -> Option<SweepSpec> {
        let model = self.model?;
        let prior = self.prior.as_ref()?;
        let (variable, values, series) = match &self.sweep {
            Some(s) => (
                s.variable,
                s.values.clone(),
                s.series.as_ref().map(|s| (s.variable, s.values.clone())),
            ),
            None => (SweepVariable::Repetitions, vec![self.v], None),
        };
        Some(SweepSpec {
            model,
            a1: prior.a1,
            a2: prior.a2,
            v: self.v,
            grid_nodes: self.grid.m,
            spacing: self.grid.spacing,
            kinds: self.bounds.clone(),
            variable,
            values,
            series,
        })
    }
}
