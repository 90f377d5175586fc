//! TOML configuration schemas and their validation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use coldplasma::experiments::{ReducedModel, MAX_EPS};
use coldplasma::integrator::{StepperConfig, DEFAULT_SLOPE_THRESHOLD};
use coldplasma::models::{DispersiveModel, EllipticSolveParams, ModelKind, ModelState};
use coldplasma::{Field, PeriodicGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_points: usize,
    #[serde(default = "two_pi")]
    pub length: f64,
}

fn two_pi() -> f64 {
    2.0 * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteppingConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "one")]
    pub snapshot_stride: usize,
    #[serde(default = "default_threshold")]
    pub slope_blowup_threshold: f64,
}

fn one() -> usize {
    1
}

fn default_threshold() -> f64 {
    DEFAULT_SLOPE_THRESHOLD
}

impl SteppingConfig {
    pub fn stepper(&self) -> StepperConfig {
        StepperConfig::new(self.dt, self.t_end)
            .with_stride(self.snapshot_stride)
            .with_threshold(self.slope_blowup_threshold)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub a: f64,
    pub k: u32,
    #[serde(default)]
    pub phase: f64,
}

/// Initial profile; `k` counts periods over the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `a sin(k x)`
    Sine {
        a: f64,
        k: u32,
    },
    /// `a cos(k x)`
    Cosine {
        a: f64,
        k: u32,
    },
    /// `sum a sin(k x + phase)`
    TrigSum {
        terms: Vec<TrigTerm>,
    },
    /// `-a sin(x)`, minimum slope `-a`
    SteepSine {
        a: f64,
    },
    Constant {
        value: f64,
    },
}

impl Profile {
    fn terms(&self) -> Vec<TrigTerm> {
        match *self {
            Profile::Sine { a, k } => vec![TrigTerm { a, k, phase: 0.0 }],
            Profile::Cosine { a, k } => vec![TrigTerm {
                a,
                k,
                phase: PI / 2.0,
            }],
            Profile::TrigSum { ref terms } => terms.clone(),
            Profile::SteepSine { a } => vec![TrigTerm {
                a: -a,
                k: 1,
                phase: 0.0,
            }],
            Profile::Constant { .. } => vec![],
        }
    }

    fn constant(&self) -> f64 {
        match *self {
            Profile::Constant { value } => value,
            _ => 0.0,
        }
    }

    pub fn max_mode(&self) -> u32 {
        self.terms().iter().map(|t| t.k).max().unwrap_or(0)
    }

    fn problems(&self, name: &str, n_points: usize) -> Vec<String> {
        let mut out = Vec::new();
        let amplitudes_finite = self
            .terms()
            .iter()
            .all(|t| t.a.is_finite() && t.phase.is_finite())
            && self.constant().is_finite();
        if !amplitudes_finite {
            out.push(format!(
                "initial_data.fields.{name}: amplitudes must be finite"
            ));
        }
        if 3 * self.max_mode() as usize > n_points {
            out.push(format!(
                "initial_data.fields.{name}: mode {} exceeds n_points/3 = {}",
                self.max_mode(),
                n_points / 3
            ));
        }
        out
    }

    pub fn sample(&self, grid: &Arc<PeriodicGrid>) -> Field {
        let kappa = 2.0 * PI / grid.length();
        let terms = self.terms();
        let c = self.constant();
        Field::from_fn(grid, |x| {
            c + terms
                .iter()
                .map(|t| t.a * (t.k as f64 * kappa * x + t.phase).sin())
                .sum::<f64>()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData {
    #[serde(default)]
    pub mean_zero_project: bool,
    /// Keyed by field name; missing fields start at zero.
    #[serde(default)]
    pub fields: BTreeMap<String, Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub emit_snapshots: bool,
    #[serde(default = "yes")]
    pub emit_timeseries: bool,
    #[serde(default)]
    pub emit_plot_columns: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputsConfig {
    fn default() -> Self {
        Self {
            dir: None,
            emit_snapshots: false,
            emit_timeseries: true,
            emit_plot_columns: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub grid: GridConfig,
    pub stepping: SteppingConfig,
    #[serde(default)]
    pub initial_data: InitialData,
    #[serde(default)]
    pub elliptic: EllipticSolveParams,
    #[serde(default)]
    pub outputs: OutputsConfig,
}

fn grid_problems(grid: &GridConfig) -> Vec<String> {
    let mut out = Vec::new();
    if grid.n_points % 2 != 0 {
        out.push(format!(
            "grid.n_points must be even (n_points even), got {}",
            grid.n_points
        ));
    }
    if grid.n_points < 8 {
        out.push(format!(
            "grid.n_points must be at least 8, got {}",
            grid.n_points
        ));
    }
    if !(grid.length > 0.0 && grid.length.is_finite()) {
        out.push(format!("grid.length must be positive, got {}", grid.length));
    }
    out
}

fn elliptic_problems(p: &EllipticSolveParams) -> Vec<String> {
    match p.validate() {
        Ok(()) => vec![],
        Err(e) => vec![format!("elliptic: {e}")],
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Arc<PeriodicGrid>, CliError> {
        PeriodicGrid::new(self.grid.n_points, self.grid.length)
            .map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    /// Initial state with the mean-zero projection applied when requested.
    pub fn initial_state(&self) -> Result<ModelState, CliError> {
        let grid = self.grid()?;
        let fields = self
            .model
            .field_names()
            .iter()
            .map(|name| {
                let f = match self.initial_data.fields.get(*name) {
                    Some(p) => p.sample(&grid),
                    None => Field::zeros(&grid),
                };
                if self.initial_data.mean_zero_project {
                    f.mean_zero()
                } else {
                    f
                }
            })
            .collect();
        ModelState::from_fields(self.model, fields)
            .map_err(|e| CliError::Config(vec![e.to_string()]))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let mut problems = grid_problems(&self.grid);
        if let Err(e) = self.stepping.stepper().validate() {
            problems.push(format!("stepping: {e}"));
        }
        problems.extend(elliptic_problems(&self.elliptic));
        let names = self.model.field_names();
        for (name, profile) in &self.initial_data.fields {
            if !names.contains(&name.as_str()) {
                problems.push(format!(
                    "initial_data.fields.{name}: not a field of the {} model (expected one of {})",
                    self.model,
                    names.join(", ")
                ));
            }
            problems.extend(profile.problems(name, self.grid.n_points));
        }
        if !problems.is_empty() {
            return Err(CliError::Config(problems));
        }

        let state = self.initial_state()?;
        match self.model {
            ModelKind::Uni if !self.initial_data.mean_zero_project => {
                let mean = state.primary().mean();
                if mean.abs() > 1e-12 * (1.0 + state.primary().max_abs()) {
                    problems.push(format!(
                        "initial_data: uni model requires mean-zero data (h has mean {mean:e}); \
                         set mean_zero_project = true or remove the mean"
                    ));
                }
            }
            ModelKind::Full => {
                let min = state.primary().min();
                if min <= -1.0 {
                    problems.push(format!(
                        "initial_data: density N must exceed -1, minimum is {min}"
                    ));
                }
            }
            _ => {}
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(problems))
        }
    }
}

fn parse_toml<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(vec![e.message().to_string()]))
}

/// Parses and validates a run configuration, reporting every violated rule.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = parse_toml(text)?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ReducedModel,
    pub eps: Vec<f64>,
    #[serde(default = "unit_time")]
    pub t_cmp: f64,
    pub dt: f64,
    pub grid: GridConfig,
    /// Unit-scale profile; defaults to `sin x`.
    #[serde(default = "unit_sine")]
    pub profile: Profile,
    #[serde(default)]
    pub elliptic: EllipticSolveParams,
}

fn unit_time() -> f64 {
    1.0
}

fn unit_sine() -> Profile {
    Profile::Sine { a: 1.0, k: 1 }
}

pub fn parse_sweep_config(text: &str) -> Result<SweepConfig, CliError> {
    let cfg: SweepConfig = parse_toml(text)?;
    let mut problems = grid_problems(&cfg.grid);
    problems.extend(elliptic_problems(&cfg.elliptic));
    problems.extend(cfg.profile.problems("profile", cfg.grid.n_points));
    if cfg.eps.is_empty() {
        problems.push("eps: at least one value required".into());
    }
    for (i, &e) in cfg.eps.iter().enumerate() {
        if !(0.0..=MAX_EPS).contains(&e) {
            problems.push(format!("eps[{i}] = {e} outside [0, {MAX_EPS}]"));
        }
        if cfg.eps[..i].contains(&e) {
            problems.push(format!("eps[{i}] = {e} is a duplicate"));
        } else if i > 0 && e > cfg.eps[i - 1] {
            problems.push(format!("eps must be sorted descending (eps[{i}] = {e})"));
        }
    }
    if !(cfg.t_cmp > 0.0 && cfg.t_cmp <= 1.0) {
        problems.push(format!("t_cmp must lie in (0, 1], got {}", cfg.t_cmp));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        problems.push(format!("dt must be positive, got {}", cfg.dt));
    }
    if problems.is_empty() {
        let grid = PeriodicGrid::new(cfg.grid.n_points, cfg.grid.length)
            .map_err(|e| CliError::Config(vec![e.to_string()]))?;
        let p = cfg.profile.sample(&grid);
        if p.mean().abs() > 1e-12 * (1.0 + p.max_abs()) {
            problems.push("profile must have mean zero".into());
        }
    }
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Config(problems))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    pub model: DispersiveModel,
    pub modes: Vec<usize>,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    pub dt: f64,
    pub grid: GridConfig,
}

fn default_amplitude() -> f64 {
    1e-6
}

pub fn parse_dispersion_config(text: &str) -> Result<DispersionConfig, CliError> {
    let cfg: DispersionConfig = parse_toml(text)?;
    let mut problems = grid_problems(&cfg.grid);
    if cfg.modes.is_empty() {
        problems.push("modes: at least one mode required".into());
    }
    for &k in &cfg.modes {
        if 3 * k > cfg.grid.n_points {
            problems.push(format!("mode {k} exceeds n_points/3"));
        }
    }
    if !(cfg.amplitude > 0.0 && cfg.amplitude <= 1e-4) {
        problems.push(format!(
            "amplitude must lie in (0, 1e-4], got {}",
            cfg.amplitude
        ));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        problems.push(format!("dt must be positive, got {}", cfg.dt));
    }
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Config(problems))
    }
}
