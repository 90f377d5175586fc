//! Command implementations behind the binary's subcommands.

use std::cell::RefCell;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use coldplasma::experiments::{
    measure_dispersion, run_breaking_probe, run_consistency, BreakingProbeConfig, BreakingReport,
    ConsistencyCell, ConsistencyConfig, ConsistencyReport,
};
use coldplasma::integrator::{integrate, StepStatus};
use coldplasma::models::{linear_dispersion, Model, UniForm};
use coldplasma::{Error, PeriodicGrid};
use serde::Serialize;

use crate::config::{DispersionConfig, RunConfig, SweepConfig};
use crate::error::{exit, CliError};
use crate::output::*;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct GridSummary {
    pub n_points: usize,
    pub length: f64,
    pub dx: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConservedEntry {
    pub name: String,
    pub initial: f64,
    #[serde(rename = "final")]
    pub final_value: f64,
    /// `|final - initial|`.
    pub drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub grid: GridSummary,
    pub dt_effective: f64,
    pub n_steps: usize,
    pub steps_taken: usize,
    pub wall_time_s: f64,
    /// `ok`, `breakdown_slope`, `breakdown_nonfinite` or `elliptic_failure`.
    pub status: String,
    pub t_reached: f64,
    pub breakdown_bracket: Option<(f64, f64)>,
    pub error: Option<String>,
    pub conserved: Vec<ConservedEntry>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub status: StepStatus,
    pub manifest: Manifest,
}

impl RunOutcome {
    pub fn exit_code(&self) -> u8 {
        match self.status {
            StepStatus::Ok => exit::OK,
            StepStatus::BreakdownSlope => exit::BREAKDOWN_SLOPE,
            StepStatus::BreakdownNonfinite => exit::BREAKDOWN_NONFINITE,
        }
    }
}

fn status_name(s: StepStatus) -> &'static str {
    match s {
        StepStatus::Ok => "ok",
        StepStatus::BreakdownSlope => "breakdown_slope",
        StepStatus::BreakdownNonfinite => "breakdown_nonfinite",
    }
}

const CONSERVED: [&str; 6] = [
    "mass_h",
    "mass_v",
    "l2_h",
    "energy",
    "cross_I",
    "momentum_bi",
];

fn model_for(cfg: &RunConfig) -> Model {
    match Model::of_kind(cfg.model) {
        Model::Full(_) => Model::Full(cfg.elliptic),
        Model::Uni(_) => Model::Uni(UniForm::Conservation),
        m => m,
    }
}

/// Integrates one configured run and writes its manifest, time series,
/// snapshots and plot columns under `out`.
pub fn run_command(cfg: &RunConfig, out: &Path) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    ensure_dir(out)?;
    let state0 = cfg.initial_state()?;
    let grid = state0.grid().clone();
    let stepper = cfg.stepping.stepper();
    let snap_dir = out.join("snapshots");
    if cfg.outputs.emit_snapshots {
        ensure_dir(&snap_dir)?;
    }

    let started = Instant::now();
    let snapshot_error: RefCell<Option<CliError>> = RefCell::new(None);
    let mut index = 0usize;
    let result = integrate(&model_for(cfg), &state0, &stepper, |t, state, _| {
        if cfg.outputs.emit_snapshots && snapshot_error.borrow().is_none() {
            let path = snap_dir.join(format!("snapshot_{index:05}.txt"));
            if let Err(e) = write_snapshot(&path, t, state) {
                *snapshot_error.borrow_mut() = Some(e);
            }
        }
        index += 1;
    });
    let wall_time_s = started.elapsed().as_secs_f64();
    if let Some(e) = snapshot_error.into_inner() {
        return Err(e);
    }

    let mut manifest = Manifest {
        tool: "coldplasma",
        version: VERSION,
        config: cfg.clone(),
        grid: GridSummary {
            n_points: grid.n_points(),
            length: grid.length(),
            dx: grid.dx(),
        },
        dt_effective: stepper.step_size(),
        n_steps: stepper.n_steps(),
        steps_taken: 0,
        wall_time_s,
        status: String::new(),
        t_reached: 0.0,
        breakdown_bracket: None,
        error: None,
        conserved: vec![],
    };

    let (outcome, records) = match result {
        Ok(r) => r,
        Err(e @ (Error::EllipticNoConvergence { .. } | Error::VacuumDensity { .. })) => {
            manifest.status = "elliptic_failure".into();
            manifest.error = Some(e.to_string());
            write_json(&out.join("manifest.json"), &manifest)?;
            return Err(CliError::Elliptic(e));
        }
        Err(e) => return Err(e.into()),
    };

    let cols = timeseries_columns(cfg.model);
    if let (Some(first), Some(last)) = (records.first(), records.last()) {
        manifest.conserved = CONSERVED
            .iter()
            .filter(|c| cols.contains(c))
            .map(|c| {
                let (a, b) = (column_value(first, c), column_value(last, c));
                ConservedEntry {
                    name: c.to_string(),
                    initial: a,
                    final_value: b,
                    drift: (b - a).abs(),
                }
            })
            .collect();
    }
    manifest.status = status_name(outcome.status).into();
    manifest.steps_taken = outcome.steps_taken;
    manifest.t_reached = outcome.t_reached;
    manifest.breakdown_bracket = outcome.breakdown_bracket;

    if cfg.outputs.emit_timeseries {
        write_timeseries_csv(&out.join("timeseries.csv"), cfg.model, &records)?;
    }
    if cfg.outputs.emit_plot_columns {
        write_timeseries_columns(&out.join("timeseries.dat"), cfg.model, &records)?;
        write_profile_columns(&out.join("profile_final.dat"), &outcome.state)?;
    }
    write_json(&out.join("manifest.json"), &manifest)?;
    Ok(RunOutcome {
        status: outcome.status,
        manifest,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepFile<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: &'a SweepConfig,
    pub report: &'a ConsistencyReport,
}

#[derive(Debug, Clone, Serialize)]
struct CellManifest<'a> {
    version: &'static str,
    index: usize,
    model: &'static str,
    t_cmp: f64,
    dt: f64,
    cell: &'a ConsistencyCell,
}

/// Runs an eps sweep and writes `report.json` plus one manifest per cell.
pub fn sweep_command(cfg: &SweepConfig, out: &Path) -> Result<ConsistencyReport, CliError> {
    let grid = PeriodicGrid::new(cfg.grid.n_points, cfg.grid.length)?;
    let profile = cfg.profile.sample(&grid);
    let ccfg = ConsistencyConfig {
        model: cfg.model,
        t_cmp: cfg.t_cmp,
        dt: cfg.dt,
        elliptic: cfg.elliptic,
    };
    let report = run_consistency(&profile, &cfg.eps, &ccfg)
        .map_err(|e| CliError::Config(vec![e.to_string()]))?;
    ensure_dir(out)?;
    for (i, cell) in report.cells.iter().enumerate() {
        let dir = out.join(format!("cell_{i:02}"));
        ensure_dir(&dir)?;
        let m = CellManifest {
            version: VERSION,
            index: i,
            model: cfg.model.name(),
            t_cmp: cfg.t_cmp,
            dt: report.dt,
            cell,
        };
        write_json(&dir.join("manifest.json"), &m)?;
    }
    let file = SweepFile {
        tool: "coldplasma",
        version: VERSION,
        config: cfg,
        report: &report,
    };
    write_json(&out.join("report.json"), &file)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispersionRow {
    pub k: usize,
    pub omega_analytic: f64,
    pub omega_measured: Option<f64>,
    pub abs_err: Option<f64>,
    /// `ok`, `signal_too_nonlinear` or `error`.
    pub status: String,
}

pub fn dispersion_rows(cfg: &DispersionConfig) -> Result<Vec<DispersionRow>, CliError> {
    let grid = PeriodicGrid::new(cfg.grid.n_points, cfg.grid.length)?;
    Ok(cfg
        .modes
        .iter()
        .map(|&k| {
            let analytic = linear_dispersion(cfg.model, grid.wavenumbers()[k]);
            match measure_dispersion(cfg.model, k, cfg.amplitude, &grid, cfg.dt) {
                Ok(w) => DispersionRow {
                    k,
                    omega_analytic: analytic,
                    omega_measured: Some(w),
                    abs_err: Some((w - analytic).abs()),
                    status: "ok".into(),
                },
                Err(e) => DispersionRow {
                    k,
                    omega_analytic: analytic,
                    omega_measured: None,
                    abs_err: None,
                    status: match e {
                        Error::SignalTooNonlinear { .. } => "signal_too_nonlinear".into(),
                        _ => "error".into(),
                    },
                },
            }
        })
        .collect())
}

/// Whitespace-separated table; failed measurements print `nan`.
pub fn write_dispersion_table(rows: &[DispersionRow], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "# k omega_analytic omega_measured abs_err status")?;
    let opt = |v: Option<f64>| v.map_or("nan".to_string(), |x| format!("{x:.15e}"));
    for r in rows {
        writeln!(
            w,
            "{} {:.15e} {} {} {}",
            r.k,
            r.omega_analytic,
            opt(r.omega_measured),
            opt(r.abs_err),
            r.status
        )?;
    }
    Ok(())
}

/// Runs the breaking probe and writes `breaking_report.json` and `slope_trace.dat`.
pub fn breaking_probe_command(
    cfg: &BreakingProbeConfig,
    out: &Path,
) -> Result<BreakingReport, CliError> {
    let report = run_breaking_probe(cfg).map_err(|e| match e {
        Error::InvalidArgument(_) | Error::InvalidGrid(_) => CliError::Config(vec![e.to_string()]),
        e => CliError::Core(e),
    })?;
    ensure_dir(out)?;
    write_json(&out.join("breaking_report.json"), &report)?;
    write_columns(
        &out.join("slope_trace.dat"),
        &["t", "min_slope"],
        report.slope_trace.iter().map(|&(t, m)| vec![t, m]),
    )?;
    Ok(report)
}
