//! Fixed-step classical RK4 with breakdown detection.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{record, BlowupAccumulator, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::models::{Model, ModelState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    /// Largest admissible step; the effective step divides `t_end` evenly.
    pub dt: f64,
    pub t_end: f64,
    /// Diagnostics are recorded every this many steps, and at the final time.
    pub snapshot_stride: usize,
    pub slope_blowup_threshold: f64,
    pub scheme: Scheme,
}

pub const DEFAULT_SLOPE_THRESHOLD: f64 = -1e3;

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        Self {
            dt,
            t_end,
            snapshot_stride: 1,
            slope_blowup_threshold: DEFAULT_SLOPE_THRESHOLD,
            scheme: Scheme::Rk4,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.slope_blowup_threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            problems.push(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            problems.push(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.snapshot_stride == 0 {
            problems.push("snapshot_stride must be >= 1".to_string());
        }
        if !(self.slope_blowup_threshold < 0.0) {
            problems.push(format!(
                "slope_blowup_threshold must be negative, got {}",
                self.slope_blowup_threshold
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }

    /// Number of uniform steps covering `[0, t_end]` with step at most `dt`.
    pub fn n_steps(&self) -> usize {
        if self.t_end == 0.0 {
            return 0;
        }
        (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize
    }

    pub fn step_size(&self) -> f64 {
        match self.n_steps() {
            0 => self.dt,
            n => self.t_end / n as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepStatus {
    Ok,
    BreakdownNonfinite,
    BreakdownSlope,
}

#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub status: StepStatus,
    /// Time of `state`: `t_end` on success, the last good time on breakdown.
    pub t_reached: f64,
    /// Last state that passed the breakdown checks.
    pub state: ModelState,
    pub steps_taken: usize,
    /// `(last good t, first bad t)` when the run broke down.
    pub breakdown_bracket: Option<(f64, f64)>,
}

impl StepOutcome {
    /// Midpoint of the breakdown bracket.
    pub fn breakdown_time(&self) -> Option<f64> {
        self.breakdown_bracket.map(|(a, b)| 0.5 * (a + b))
    }
}

pub fn rk4_step(model: &Model, state: &ModelState, dt: f64) -> Result<ModelState> {
    let k1 = model.rhs(state)?;
    let k2 = model.rhs(&state.axpy(0.5 * dt, &k1))?;
    let k3 = model.rhs(&state.axpy(0.5 * dt, &k2))?;
    let k4 = model.rhs(&state.axpy(dt, &k3))?;
    Ok(state
        .axpy(dt / 6.0, &k1)
        .axpy(dt / 3.0, &k2)
        .axpy(dt / 3.0, &k3)
        .axpy(dt / 6.0, &k4))
}

/// Non-finite samples anywhere, or a primary-field slope below `threshold`.
pub fn detect_breakdown(state: &ModelState, threshold: f64) -> StepStatus {
    if !state.is_finite() {
        return StepStatus::BreakdownNonfinite;
    }
    match state.primary().dx() {
        Ok(slope) if slope.min() < threshold => StepStatus::BreakdownSlope,
        Ok(_) => StepStatus::Ok,
        Err(_) => StepStatus::BreakdownNonfinite,
    }
}

/// Integrates to `t_end` or the first breakdown. The observer sees every
/// recorded snapshot, including `t = 0` and the final state.
pub fn integrate<F>(
    model: &Model,
    state0: &ModelState,
    cfg: &StepperConfig,
    mut observer: F,
) -> Result<(StepOutcome, Vec<DiagnosticsRecord>)>
where
    F: FnMut(f64, &ModelState, &DiagnosticsRecord),
{
    cfg.validate()?;
    if state0.kind() != model.kind() {
        return Err(Error::ModelMismatch {
            model: model.kind().name(),
        });
    }
    let kind = model.kind();
    let n_steps = cfg.n_steps();
    let dt = cfg.step_size();
    let mut acc = BlowupAccumulator::new();
    let mut records = Vec::new();
    let mut state = state0.clone();

    let status0 = detect_breakdown(&state, cfg.slope_blowup_threshold);
    if status0 != StepStatus::Ok {
        return Ok((
            StepOutcome {
                status: status0,
                t_reached: 0.0,
                state,
                steps_taken: 0,
                breakdown_bracket: Some((0.0, 0.0)),
            },
            records,
        ));
    }
    let rec = record(kind, &state, 0.0, &mut acc)?;
    observer(0.0, &state, &rec);
    records.push(rec);

    let time_of = |step: usize| {
        if step == n_steps {
            cfg.t_end
        } else {
            step as f64 * dt
        }
    };

    for step in 1..=n_steps {
        let t_prev = time_of(step - 1);
        let t = time_of(step);
        let status = match rk4_step(model, &state, dt) {
            Ok(next) => {
                let status = detect_breakdown(&next, cfg.slope_blowup_threshold);
                if status == StepStatus::Ok {
                    state = next;
                }
                status
            }
            Err(Error::NonFiniteField) => StepStatus::BreakdownNonfinite,
            Err(e) => return Err(e),
        };
        if status != StepStatus::Ok {
            return Ok((
                StepOutcome {
                    status,
                    t_reached: t_prev,
                    state,
                    steps_taken: step - 1,
                    breakdown_bracket: Some((t_prev, t)),
                },
                records,
            ));
        }
        if step % cfg.snapshot_stride == 0 || step == n_steps {
            let rec = record(kind, &state, t, &mut acc)?;
            observer(t, &state, &rec);
            records.push(rec);
        }
    }

    Ok((
        StepOutcome {
            status: StepStatus::Ok,
            t_reached: cfg.t_end,
            state,
            steps_taken: n_steps,
            breakdown_bracket: None,
        },
        records,
    ))
}

/// Advisory step `0.5 dx / (1 + sum of field sup norms)`; nothing enforces it.
pub fn suggested_dt(state: &ModelState) -> f64 {
    let amplitude: f64 = state.fields().iter().map(|f| f.max_abs()).sum();
    0.5 * state.grid().dx() / (1.0 + amplitude)
}
