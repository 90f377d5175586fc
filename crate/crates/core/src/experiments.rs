//! Consistency sweeps against the full system, linear dispersion
//! measurement, the far-field frame change and the wave-breaking probe.

use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{integrate, StepStatus, StepperConfig, DEFAULT_SLOPE_THRESHOLD};
use crate::models::{
    linear_dispersion, BiWaveState, BoussinesqState, DispersiveModel, EllipticSolveParams,
    FullPlasmaState, Model, ModelKind, ModelState, UniForm, UniState,
};
use crate::spectral::{forward_transform, Field, PeriodicGrid};

/// Largest amplitude parameter accepted for well-prepared data.
pub const MAX_EPS: f64 = 0.5;

/// Small-amplitude data `eps * profile` for every model in the hierarchy.
#[derive(Debug, Clone)]
pub struct WellPreparedData {
    eps: f64,
    profile: Field,
}

impl WellPreparedData {
    /// `eps = 0` is allowed and gives the equilibrium.
    pub fn new(eps: f64, profile: Field) -> Result<Self> {
        if !(0.0..=MAX_EPS).contains(&eps) {
            return Err(Error::InvalidArgument(format!(
                "eps must lie in [0, {MAX_EPS}], got {eps}"
            )));
        }
        if !profile.is_finite() {
            return Err(Error::NonFiniteField);
        }
        let tol = 1e-12 * (1.0 + profile.max_abs());
        if profile.mean().abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "profile must have mean zero, mean is {:e}",
                profile.mean()
            )));
        }
        Ok(Self { eps, profile })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn profile(&self) -> &Field {
        &self.profile
    }

    fn scaled(&self) -> Field {
        self.profile.scale(self.eps)
    }

    /// `N = U = eps * profile`.
    pub fn full(&self) -> FullPlasmaState {
        FullPlasmaState {
            density: self.scaled(),
            velocity: self.scaled(),
        }
    }

    pub fn boussinesq(&self) -> BoussinesqState {
        BoussinesqState {
            h: self.scaled(),
            v: self.scaled(),
        }
    }

    /// `h = eps * profile` and `g = -(h + h^2)_x`, the initial density
    /// tendency of the full system for the same data.
    pub fn biwave(&self) -> Result<BiWaveState> {
        let h = self.scaled();
        let flux = forward_transform(&h)?.axpy(1.0, &h.product_spectrum(&h)?);
        let g = flux
            .multiply(crate::spectral::MultiplierKind::Dx)
            .scale(-1.0)
            .to_field();
        Ok(BiWaveState { h, g })
    }

    pub fn uni(&self) -> UniState {
        UniState { h: self.scaled() }
    }

    pub fn state(&self, kind: ModelKind) -> Result<ModelState> {
        Ok(match kind {
            ModelKind::Full => ModelState::Full(self.full()),
            ModelKind::Boussinesq => ModelState::Boussinesq(self.boussinesq()),
            ModelKind::BiWave => ModelState::BiWave(self.biwave()?),
            ModelKind::Uni => ModelState::Uni(self.uni()),
        })
    }
}

/// Far-field frame change: returns `x -> h(x - t)`, exact on the grid.
pub fn far_field_shift(h: &Field, t: f64) -> Result<Field> {
    Ok(forward_transform(h)?.translated(t).to_field())
}

/// Slow time `tau = eps t` of the far-field variables.
pub fn slow_time(eps: f64, t: f64) -> f64 {
    eps * t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReducedModel {
    Boussinesq,
    #[serde(alias = "bidirectional")]
    BiWave,
    #[serde(alias = "unidirectional")]
    Uni,
}

impl ReducedModel {
    pub fn kind(self) -> ModelKind {
        match self {
            ReducedModel::Boussinesq => ModelKind::Boussinesq,
            ReducedModel::BiWave => ModelKind::BiWave,
            ReducedModel::Uni => ModelKind::Uni,
        }
    }

    pub fn name(self) -> &'static str {
        self.kind().name()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    pub model: ReducedModel,
    /// Comparison time in unscaled units.
    pub t_cmp: f64,
    pub dt: f64,
    #[serde(default)]
    pub elliptic: EllipticSolveParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    FullBreakdown,
    ModelBreakdown,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCell {
    pub eps: f64,
    pub status: CellStatus,
    /// `sup |h_model - N_full|` at the comparison time.
    pub error: Option<f64>,
    pub detail: Option<String>,
    pub full_steps: usize,
    pub model_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub model: ReducedModel,
    pub comparison_time: f64,
    pub dt: f64,
    pub n_points: usize,
    pub eps_list: Vec<f64>,
    pub errors: Vec<Option<f64>>,
    pub cells: Vec<ConsistencyCell>,
    /// Least-squares slope of `ln error` against `ln eps`; needs two usable cells.
    pub fitted_order: Option<f64>,
    /// Errors strictly decrease with `eps` over the successful cells.
    pub monotone: bool,
}

fn validate_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("eps list is empty".into()));
    }
    for w in eps_list.windows(2) {
        if w[1] == w[0] {
            return Err(Error::InvalidArgument(format!(
                "duplicate eps value {}",
                w[0]
            )));
        }
        if w[1] > w[0] {
            return Err(Error::InvalidArgument(
                "eps list must be sorted descending".into(),
            ));
        }
    }
    Ok(())
}

fn run_cell(profile: &Field, eps: f64, cfg: &ConsistencyConfig) -> ConsistencyCell {
    let mut cell = ConsistencyCell {
        eps,
        status: CellStatus::Failed,
        error: None,
        detail: None,
        full_steps: 0,
        model_steps: 0,
    };
    let stepper = StepperConfig::new(cfg.dt, cfg.t_cmp).with_stride(usize::MAX);
    let data = match WellPreparedData::new(eps, profile.clone()) {
        Ok(d) => d,
        Err(e) => {
            cell.detail = Some(e.to_string());
            return cell;
        }
    };
    let run = |model: Model| -> Result<(StepStatus, usize, Field)> {
        let state0 = data.state(model.kind())?;
        let (out, _) = integrate(&model, &state0, &stepper, |_, _, _| {})?;
        Ok((out.status, out.steps_taken, out.state.primary().clone()))
    };

    let full = run(Model::Full(cfg.elliptic));
    let reduced = run(match cfg.model {
        ReducedModel::Boussinesq => Model::Boussinesq,
        ReducedModel::BiWave => Model::BiWave,
        ReducedModel::Uni => Model::Uni(UniForm::Conservation),
    });
    let (full_status, full_steps, n_full) = match full {
        Ok(r) => r,
        Err(e) => {
            cell.detail = Some(format!("full system: {e}"));
            return cell;
        }
    };
    cell.full_steps = full_steps;
    let (model_status, model_steps, h_model) = match reduced {
        Ok(r) => r,
        Err(e) => {
            cell.detail = Some(format!("{}: {e}", cfg.model.name()));
            return cell;
        }
    };
    cell.model_steps = model_steps;
    if full_status != StepStatus::Ok {
        cell.status = CellStatus::FullBreakdown;
        cell.detail = Some(format!("full system: {full_status:?}"));
        return cell;
    }
    if model_status != StepStatus::Ok {
        cell.status = CellStatus::ModelBreakdown;
        cell.detail = Some(format!("{}: {model_status:?}", cfg.model.name()));
        return cell;
    }
    let h_cmp = match cfg.model {
        ReducedModel::Uni => match far_field_shift(&h_model, cfg.t_cmp) {
            Ok(f) => f,
            Err(e) => {
                cell.detail = Some(e.to_string());
                return cell;
            }
        },
        _ => h_model,
    };
    cell.status = CellStatus::Ok;
    cell.error = Some(h_cmp.max_abs_diff(&n_full));
    cell
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Runs the full system and a reduced model from the same well-prepared
/// data for each `eps`, one thread per cell, and compares the densities at
/// `t_cmp`. The unidirectional solution is moved to the lab frame by
/// [`far_field_shift`] first. Breakdowns are recorded per cell.
pub fn run_consistency(
    profile: &Field,
    eps_list: &[f64],
    cfg: &ConsistencyConfig,
) -> Result<ConsistencyReport> {
    validate_eps_list(eps_list)?;
    for &eps in eps_list {
        WellPreparedData::new(eps, profile.clone())?;
    }
    if !(cfg.t_cmp > 0.0 && cfg.t_cmp <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "t_cmp must lie in (0, 1], got {}",
            cfg.t_cmp
        )));
    }
    StepperConfig::new(cfg.dt, cfg.t_cmp).validate()?;
    cfg.elliptic.validate()?;

    let cells: Vec<ConsistencyCell> = thread::scope(|scope| {
        let handles: Vec<_> = eps_list
            .iter()
            .map(|&eps| scope.spawn(move || run_cell(profile, eps, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("consistency cell panicked"))
            .collect()
    });

    let usable: Vec<(f64, f64)> = cells
        .iter()
        .filter_map(|c| match c.error {
            Some(e) if c.eps > 0.0 && e > 0.0 => Some((c.eps, e)),
            _ => None,
        })
        .collect();
    let ok_errors: Vec<f64> = cells.iter().filter_map(|c| c.error).collect();
    let monotone = ok_errors.windows(2).all(|w| w[1] < w[0]);
    Ok(ConsistencyReport {
        model: cfg.model,
        comparison_time: cfg.t_cmp,
        dt: StepperConfig::new(cfg.dt, cfg.t_cmp).step_size(),
        n_points: profile.grid().n_points(),
        eps_list: eps_list.to_vec(),
        errors: cells.iter().map(|c| c.error).collect(),
        fitted_order: fit_log_log(&usable),
        monotone,
        cells,
    })
}

/// Evolves `amplitude * cos(k x)` over one linear period and returns the
/// frequency `omega` read off the unwrapped phase of mode `k`, for the
/// convention `exp(i(k x - omega t))`. Bidirectional data are launched as
/// a single travelling wave.
pub fn measure_dispersion(
    model: DispersiveModel,
    k: usize,
    amplitude: f64,
    grid: &Arc<PeriodicGrid>,
    dt: f64,
) -> Result<f64> {
    if !(amplitude > 0.0 && amplitude <= 1e-4) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must lie in (0, 1e-4], got {amplitude}"
        )));
    }
    if k > grid.max_dealiased_mode() {
        return Err(Error::InvalidArgument(format!(
            "mode {k} exceeds the dealiased band {}",
            grid.max_dealiased_mode()
        )));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let kw = grid.wavenumbers()[k];
    let omega_guess = linear_dispersion(model, kw);
    let h0 = Field::from_fn(grid, |x| amplitude * (kw * x).cos());
    let (state0, model_rhs) = match model {
        DispersiveModel::BiWave => {
            let g0 = Field::from_fn(grid, |x| amplitude * omega_guess * (kw * x).sin());
            (
                ModelState::BiWave(BiWaveState { h: h0, g: g0 }),
                Model::BiWave,
            )
        }
        DispersiveModel::Uni => (
            ModelState::Uni(UniState { h: h0 }),
            Model::Uni(UniForm::Conservation),
        ),
    };
    let period = 2.0 * std::f64::consts::PI / omega_guess.abs();
    let stepper = StepperConfig::new(dt, period);
    let mode = k as i64;
    let phase_of =
        |s: &ModelState| -> Result<f64> { Ok(forward_transform(s.primary())?.mode(mode).arg()) };

    let mut last_phase = phase_of(&state0)?;
    let mut unwrapped = 0.0;
    let mut failure = None;
    let (out, _) = integrate(&model_rhs, &state0, &stepper, |_, s, _| match phase_of(s) {
        Ok(p) => {
            let mut d = p - last_phase;
            d -= 2.0 * std::f64::consts::PI * (d / (2.0 * std::f64::consts::PI)).round();
            unwrapped += d;
            last_phase = p;
        }
        Err(e) => failure = Some(e),
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if out.status != StepStatus::Ok {
        return Err(Error::NonFiniteField);
    }
    let spectrum = forward_transform(out.state.primary())?;
    if 2 * k <= grid.n_points() / 2 {
        let ratio = spectrum.mode_energy(2 * mode) / spectrum.mode_energy(mode);
        if ratio > 1e-6 {
            return Err(Error::SignalTooNonlinear { ratio });
        }
    }
    Ok(-unwrapped / period)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakingProbeConfig {
    pub amplitude: f64,
    pub n_points: usize,
    pub dt: f64,
    pub threshold: f64,
    /// Defaults to five Riccati times.
    pub t_max: Option<f64>,
    /// Constant of the slope hypothesis `m(0) <= -C`.
    pub hypothesis_c: f64,
}

impl BreakingProbeConfig {
    pub fn new(amplitude: f64, n_points: usize, dt: f64) -> Self {
        Self {
            amplitude,
            n_points,
            dt,
            threshold: DEFAULT_SLOPE_THRESHOLD,
            t_max: None,
            hypothesis_c: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakingReport {
    pub amplitude: f64,
    pub n_points: usize,
    pub dt: f64,
    /// Initial minimum slope.
    pub m0: f64,
    pub t_max: f64,
    pub status: StepStatus,
    pub breakdown_detected: bool,
    pub breakdown_bracket: Option<(f64, f64)>,
    pub t_b_detected: Option<f64>,
    /// `-1/m0`.
    pub riccati_bound_time: f64,
    pub within_twice_riccati: bool,
    /// `m0 <= -C`.
    pub slope_hypothesis_met: bool,
    pub l2_sq_initial: f64,
    /// Smallest value of `M(0) + (1 + ||h0||^2)t/4 - M(t)` over the trace.
    pub linfty_min_slack: f64,
    pub linfty_bound_satisfied: bool,
    /// Smallest value of `m(t) - m(0) + (1 + ||h0||^2)t/4` for the infimum of `h`.
    pub linfty_lower_min_slack: f64,
    /// The slope minimum never increases after it first decreases.
    pub slope_monotone: bool,
    pub slope_trace: Vec<(f64, f64)>,
}

/// Integrates the unidirectional equation from `h0 = -a sin x` until the
/// slope threshold is crossed or `t_max`, then checks the sup bound
/// `M(t) <= M(0) + (1 + ||h0||^2) t / 4` and the Riccati time `-1/m0`.
pub fn run_breaking_probe(cfg: &BreakingProbeConfig) -> Result<BreakingReport> {
    if !(cfg.amplitude > 0.0 && cfg.amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "amplitude must be positive, got {}",
            cfg.amplitude
        )));
    }
    let grid = PeriodicGrid::standard(cfg.n_points)?;
    let a = cfg.amplitude;
    let h0 = Field::from_fn(&grid, |x| -a * x.sin());
    let m0 = h0.dx()?.min();
    let riccati = -1.0 / m0;
    let t_max = cfg.t_max.unwrap_or(5.0 * riccati);
    let stepper = StepperConfig::new(cfg.dt, t_max).with_threshold(cfg.threshold);
    let state0 = ModelState::Uni(UniState { h: h0 });

    let (out, records) = integrate(
        &Model::Uni(UniForm::Conservation),
        &state0,
        &stepper,
        |_, _, _| {},
    )?;
    let first = &records[0];
    let rate = 0.25 * (1.0 + first.l2_h);
    let upper_slack = records
        .iter()
        .map(|r| first.max_h + rate * r.t - r.max_h)
        .fold(f64::INFINITY, f64::min);
    let lower_slack = records
        .iter()
        .map(|r| r.min_h - first.min_h + rate * r.t)
        .fold(f64::INFINITY, f64::min);
    let slope_trace: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.min_slope)).collect();
    let slope_monotone = slope_is_monotone(&slope_trace);
    let breakdown_detected = out.status == StepStatus::BreakdownSlope;
    let t_b = if breakdown_detected {
        out.breakdown_time()
    } else {
        None
    };

    Ok(BreakingReport {
        amplitude: a,
        n_points: cfg.n_points,
        dt: stepper.step_size(),
        m0,
        t_max,
        status: out.status,
        breakdown_detected,
        breakdown_bracket: out.breakdown_bracket,
        t_b_detected: t_b,
        riccati_bound_time: riccati,
        within_twice_riccati: t_b.is_some_and(|t| t <= 2.0 * riccati),
        slope_hypothesis_met: m0 <= -cfg.hypothesis_c,
        l2_sq_initial: first.l2_h,
        linfty_min_slack: upper_slack,
        linfty_bound_satisfied: upper_slack >= -1e-6,
        linfty_lower_min_slack: lower_slack,
        slope_monotone,
        slope_trace,
    })
}

fn slope_is_monotone(trace: &[(f64, f64)]) -> bool {
    let start = trace.windows(2).position(|w| w[1].1 < w[0].1);
    match start {
        None => true,
        Some(i) => trace[i..].windows(2).all(|w| w[1].1 <= w[0].1),
    }
}
