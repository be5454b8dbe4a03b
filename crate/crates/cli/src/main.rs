//! `qba`: spectra, variances, calibration and bath-temperature fits from the
//! command line.

mod commands;
mod config;
mod error;

use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Units;
use error::CliError;

#[derive(Parser)]
#[command(name = "qba", version, about = "Back-action noise spectra of a spin oscillator cascaded with an optomechanical cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Output PSD and its per-source decomposition as CSV.
    Spectrum { config: PathBuf },
    /// Variance from the PSD area inside a band.
    Variance {
        config: PathBuf,
        /// Band edges in Hz, `lo,hi`.
        #[arg(long, value_parser = parse_band)]
        band: (f64, f64),
        #[arg(long, value_enum, default_value = "sn")]
        units: Units,
        /// Integrate one column (a CSV label or `qba`) instead of `total - 1`.
        #[arg(long)]
        column: Option<String>,
    },
    /// Back-action to thermal ratio from vacuum and white-noise driven peak heights.
    CalibrateSpin {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        nwn: f64,
        #[arg(long, default_value_t = 1.0)]
        eta: f64,
    },
    /// Fit the membrane bath temperature to a measured spectrum.
    FitBath {
        config: PathBuf,
        /// CSV with `freq_hz` and `total_sn` (or `psd`) columns.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        tmin: f64,
        #[arg(long)]
        tmax: f64,
    },
    /// Print built-in parameter sets in config syntax.
    Presets { name: Option<String> },
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(lo)?, p(hi)?))
}

fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("QBA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("QBA_THREADS: expected a non-negative integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("QBA_THREADS: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Spectrum { config } => commands::spectrum_cmd(&config, &mut out)?,
        Command::Variance { config, band, units, column } => {
            commands::variance_cmd(&config, band, units, column.as_deref(), &mut out)?
        }
        Command::CalibrateSpin { a, b, nwn, eta } => commands::calibrate_spin_cmd(a, b, nwn, eta, &mut out)?,
        Command::FitBath { config, data, tmin, tmax } => commands::fit_bath_cmd(&config, &data, tmin, tmax, &mut out)?,
        Command::Presets { name } => commands::presets_cmd(name.as_deref(), &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        // Downstream closed the pipe (`qba spectrum cfg | head`).
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
