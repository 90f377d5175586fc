use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coldplasma::experiments::BreakingProbeConfig;
use coldplasma::integrator::DEFAULT_SLOPE_THRESHOLD;
use coldplasma_cli::*;

#[derive(Parser)]
#[command(
    name = "coldplasma",
    version,
    about = "Pseudospectral runs, consistency sweeps and breaking probes for the cold-plasma models",
    after_help = "Exit codes: 0 ok, 1 I/O error, 2 config error, 3 slope breakdown, \
                  4 non-finite breakdown, 5 elliptic failure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one model from a TOML config
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `outputs.dir`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a reduced model with the full system over an eps sweep
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print measured against analytic linear frequencies
    Dispersion {
        #[arg(long)]
        config: PathBuf,
    },
    /// Integrate h0 = -a sin x until slope breakdown
    BreakingProbe {
        #[arg(long)]
        amplitude: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1024)]
        n_points: usize,
        #[arg(long, default_value_t = 1e-5)]
        dt: f64,
        #[arg(long, default_value_t = DEFAULT_SLOPE_THRESHOLD, allow_hyphen_values = true)]
        threshold: f64,
        #[arg(long)]
        t_max: Option<f64>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn dispatch(cmd: Command) -> Result<u8, CliError> {
    match cmd {
        Command::Run { config, out } => {
            let cfg = parse_config(&read(&config)?)?;
            let dir = out
                .or_else(|| cfg.outputs.dir.clone().map(PathBuf::from))
                .ok_or_else(|| {
                    CliError::Config(vec![
                        "no output directory: pass --out or set outputs.dir".into()
                    ])
                })?;
            let outcome = run_command(&cfg, &dir)?;
            let m = &outcome.manifest;
            println!(
                "{}: status {} at t = {} after {} steps",
                cfg.model, m.status, m.t_reached, m.steps_taken
            );
            Ok(outcome.exit_code())
        }
        Command::Sweep { config, out } => {
            let cfg = parse_sweep_config(&read(&config)?)?;
            let report = sweep_command(&cfg, &out)?;
            for cell in &report.cells {
                println!(
                    "eps {} error {:?} status {:?}",
                    cell.eps, cell.error, cell.status
                );
            }
            match report.fitted_order {
                Some(p) => println!("fitted order {p:.4}"),
                None => println!("fitted order unavailable"),
            }
            Ok(exit::OK)
        }
        Command::Dispersion { config } => {
            let cfg = parse_dispersion_config(&read(&config)?)?;
            let rows = dispersion_rows(&cfg)?;
            write_dispersion_table(&rows, &mut std::io::stdout().lock())
                .map_err(|e| CliError::io("<stdout>", e))?;
            Ok(exit::OK)
        }
        Command::BreakingProbe {
            amplitude,
            out,
            n_points,
            dt,
            threshold,
            t_max,
        } => {
            let mut cfg = BreakingProbeConfig::new(amplitude, n_points, dt);
            cfg.threshold = threshold;
            cfg.t_max = t_max;
            let r = breaking_probe_command(&cfg, &out)?;
            match r.t_b_detected {
                Some(t) => println!(
                    "breakdown at t = {t:.6} (Riccati time {:.6})",
                    r.riccati_bound_time
                ),
                None => println!("no breakdown before t = {}", r.t_max),
            }
            Ok(exit::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
