//! `edgecb` command-line front end.
//!
//! Subcommands: `sweep` (flux sweep to CSV/JSON/SVG), `scan-temperature`
//! (peak reports across temperatures), `selftest` (invariant suite) and
//! `describe-state` (sector decomposition table). Batch-oriented: all results
//! land in files; exit codes are 0 success, 2 configuration error,
//! 3 numerical guard violation, 4 I/O error. Failures also emit a
//! machine-readable JSON object on stderr.
//!
//! `EDGECB_WORKERS` limits the rayon worker count for sweeps.

mod config;
mod output;
mod selftest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edgecb::analysis::{classify_periods, find_peaks, sweep_flux, temperature_scan, AnalysisError};
use edgecb::edge::display_charge;
use num_rational::Rational64;
use serde_json::json;

use config::{ConfigError, RunConfig};

#[derive(Parser)]
#[command(
    name = "edgecb",
    version,
    about = "Coulomb-blockade conductance of FQH islands"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. --set t=0.5 (repeatable, applied in order).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the island conductance over a flux range.
    Sweep(RunArgs),
    /// Sweep at each temperature in t_list and report the peaks.
    ScanTemperature(RunArgs),
    /// Run the invariant suite and print one line per check.
    Selftest {
        /// Test hook: inject a deliberate fault ("cz-sign").
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Print validation and the charged/neutral decomposition of a state.
    DescribeState {
        /// State preset ("rr-z3" or "laughlin:<d_h>").
        #[arg(long)]
        state: String,
    },
}

enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("writing {}: {e}", path.display()))
}

fn main() -> ExitCode {
    init_workers();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(args) => run_sweep(&args),
        Command::ScanTemperature(args) => run_scan(&args),
        Command::Selftest { inject_fault } => run_selftest(inject_fault.as_deref()),
        Command::DescribeState { state } => run_describe(&state),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let doc = json!({
                "error": {
                    "kind": e.kind(),
                    "exit": e.exit_code(),
                    "message": e.message(),
                }
            });
            eprintln!("{doc}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn init_workers() {
    if let Ok(value) = std::env::var("EDGECB_WORKERS") {
        if let Ok(n) = value.parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}

fn run_sweep(args: &RunArgs) -> Result<(), CliError> {
    let config = RunConfig::from_sources(args.config.as_deref(), &args.set)?;
    let state = config.build_state()?;
    let sector = config.build_sector(&state)?;
    let params = config.thermo_params();

    let trace = sweep_flux(
        &state,
        &sector,
        &params,
        config.phi_min,
        config.phi_max,
        config.phi_points,
    )?;
    let mut report = find_peaks(&trace)?;
    report.classification = classify_periods(&report, &state).ok();

    let csv_path = Path::new(&config.out_csv);
    output::write_csv(csv_path, &trace).map_err(io_err(csv_path))?;

    let document = output::SweepDocument {
        library_version: edgecb::VERSION,
        config: &config,
        state: state.id(),
        n_points: trace.len(),
        report: output::report_to_json(&report),
    };
    let json_path = Path::new(&config.out_json);
    output::write_json(json_path, &document).map_err(io_err(json_path))?;

    if !config.out_svg.is_empty() {
        let svg_path = Path::new(&config.out_svg);
        output::write_svg(svg_path, &trace, &report.peaks).map_err(io_err(svg_path))?;
    }
    println!(
        "sweep: {} points, {} peaks -> {}, {}",
        trace.len(),
        report.peaks.len(),
        config.out_csv,
        config.out_json
    );
    Ok(())
}

fn run_scan(args: &RunArgs) -> Result<(), CliError> {
    let config = RunConfig::from_sources(args.config.as_deref(), &args.set)?;
    let state = config.build_state()?;
    let sector = config.build_sector(&state)?;
    let params = config.thermo_params();

    let scans = temperature_scan(
        &state,
        &sector,
        &params,
        &config.t_list,
        (config.phi_min, config.phi_max, config.phi_points),
    )?;
    let document = output::ScanDocument {
        library_version: edgecb::VERSION,
        config: &config,
        state: state.id(),
        scans: scans
            .iter()
            .map(|(t, report)| output::ScanEntry {
                t: *t,
                report: output::report_to_json(report),
            })
            .collect(),
    };
    let json_path = Path::new(&config.out_json);
    output::write_json(json_path, &document).map_err(io_err(json_path))?;
    println!(
        "scan-temperature: {} temperatures -> {}",
        scans.len(),
        config.out_json
    );
    Ok(())
}

fn run_selftest(fault: Option<&str>) -> Result<(), CliError> {
    let fault = match fault {
        None => None,
        Some("cz-sign") => Some(selftest::Fault::CzSign),
        Some(other) => return Err(CliError::Config(format!("unknown fault '{other}'"))),
    };
    let report = selftest::run(fault);
    selftest::print_report(&report);
    if report.all_passed() {
        Ok(())
    } else {
        Err(CliError::Numerical("selftest failures, see report".into()))
    }
}

fn run_describe(preset: &str) -> Result<(), CliError> {
    let config = RunConfig::from_sources(None, &[format!("state={preset}")])?;
    let state = config.build_state()?;
    let sector = config.build_sector(&state)?;
    let m = state.filling.modulus();

    println!("state:            {}", state.id());
    println!("filling factor:   {}", state.filling);
    println!("lattice modulus:  m = {m}");
    println!("neutral c:        {}", state.neutral.central_charge());
    let delta_el = state.electron_dimension();
    println!(
        "electron:         Delta_el = {delta_el}, statistics 2*Delta_el = {}",
        delta_el * Rational64::from_integer(2)
    );
    println!();
    println!("vacuum-sector decomposition (charge label, neutral sector):");
    println!(
        "{:>3} {:>7} {:>8} {:>10} {:>14} {:>11}",
        "s", "l", "neutral", "Delta", "leading exp", "admissible"
    );
    let pairs = state
        .decompose_sector(&sector)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    for (s, (l, neutral)) in pairs.iter().enumerate() {
        let name = state.neutral.sector_name(*neutral).unwrap_or("?");
        let weight = state.neutral.weight(*neutral).unwrap_or_default();
        let leading = state
            .neutral
            .character(*neutral, Rational64::from_integer(0))
            .map(|c| c.leading_exponent().to_string())
            .unwrap_or_else(|_| "?".into());
        let admissible = state.pairing_admissible(*l, *neutral).unwrap_or(false);
        println!(
            "{s:>3} {:>7} {name:>8} {:>10} {leading:>14} {admissible:>11}",
            display_charge(*l, m),
            weight.to_string(),
        );
    }
    Ok(())
}
