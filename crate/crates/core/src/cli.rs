//! Command-line front end.
//!
//! `run` takes the argument list and output streams explicitly and returns
//! the process exit code, so the binary is a thin wrapper and the whole
//! interface can be driven from tests.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::circuit::{circuit_matrix, unitarity_residual};
use crate::error::Error;
use crate::experiments::{fd_histogram, run_experiment, ExperimentKind, ExperimentSpec, FidelityConvention};
use crate::generators::{CircuitFamily, Family};
use crate::netlist::{serialize, Metadata};
use crate::noise::NoiseParams;
use crate::results::{histogram_csv, per_trial_csv, read_per_trial, ResultsDocument};
use crate::verify::run_suite;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Environment variable holding the default worker count for `simulate`.
pub const WORKERS_ENV: &str = "MULTIPORT_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "multiport",
    version,
    about = "Linear-optical QFT and Grover circuits: netlists, checks and noise Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the JSON netlist of a generated circuit.
    Netlist {
        #[command(flatten)]
        circuit: CircuitArgs,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the transfer matrix of a generated circuit.
    Matrix {
        #[command(flatten)]
        circuit: CircuitArgs,
    },
    /// Check every construction against its analytic reference.
    Verify {
        /// Largest mode count to check.
        #[arg(long, default_value_t = 32)]
        max_dim: usize,
    },
    /// Run a fabrication-noise Monte Carlo experiment.
    Simulate(SimulateArgs),
    /// Recompute the Freedman–Diaconis histogram of a per-trial file.
    Histogram {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct CircuitArgs {
    /// qft, shuffle, v, w, phi, prep, oracle or grover-search.
    family: String,
    /// Mode count d (shuffle and phi act on 2d modes).
    #[arg(long, visible_alias = "items")]
    modes: usize,
    /// Marked mode (1-based) for oracle and grover-search.
    #[arg(long)]
    solution: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// qft or grover.
    kind: String,
    #[arg(long, visible_alias = "items")]
    modes: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// TOML file of noise parameters; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bs_mean: Option<f64>,
    #[arg(long)]
    bs_std: Option<f64>,
    #[arg(long)]
    swap_mean: Option<f64>,
    #[arg(long)]
    swap_std: Option<f64>,
    #[arg(long)]
    loss_mean: Option<f64>,
    #[arg(long)]
    loss_std: Option<f64>,
    /// unnormalized or normalized.
    #[arg(long, default_value = "unnormalized")]
    convention: String,
    /// Results file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-trial fidelities here.
    #[arg(long)]
    per_trial: Option<PathBuf>,
    /// Worker threads (all cores if unset). Does not affect the results.
    #[arg(long, env = WORKERS_ENV)]
    workers: Option<usize>,
}

enum Failure {
    Usage(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Usage(format!("stdout: {e}"))),
    }
}

fn build(args: &CircuitArgs) -> Result<(Family, crate::circuit::Circuit), Failure> {
    let family: Family = args.family.parse()?;
    let circuit = CircuitFamily { family, modes: args.modes, solution: args.solution }.build()?;
    Ok((family, circuit))
}

fn cmd_netlist(args: &CircuitArgs, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (family, circuit) = build(args)?;
    let mut params = vec![("modes", args.modes as u64)];
    if let Some(s) = args.solution.filter(|_| family.needs_solution()) {
        params.push(("solution", s as u64));
    }
    let mut text = serialize(&circuit, Metadata::for_family(family.name(), params));
    text.push('\n');
    emit(&text, out, stdout)
}

fn entry(z: num_complex::Complex64) -> String {
    // `+ 0.0` turns a negative zero into a positive one.
    format!("{:.12}{:+.12}i", z.re + 0.0, z.im + 0.0)
}

fn cmd_matrix(args: &CircuitArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (family, circuit) = build(args)?;
    let m = circuit_matrix(&circuit);
    let mut text = format!("# {family} modes={}\n", circuit.modes());
    for row in m.row_iter() {
        text.push_str(&row.iter().map(|z| entry(*z)).collect::<Vec<_>>().join("  "));
        text.push('\n');
    }
    text.push_str(&format!("# unitarity residual {:.3e}\n", unitarity_residual(&m)));
    emit(&text, None, stdout)
}

fn cmd_verify(max_dim: usize, stdout: &mut dyn Write) -> Result<(), Failure> {
    let checks = run_suite(max_dim)?;
    let mut text: String = checks.iter().map(|c| format!("{c}\n")).collect();
    let failed = checks.iter().filter(|c| !c.passed()).count();
    text.push_str(&format!("{} checks, {failed} failed\n", checks.len()));
    emit(&text, None, stdout)?;
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn noise_params(args: &SimulateArgs) -> Result<NoiseParams, Failure> {
    let mut noise = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => NoiseParams::default(),
    };
    let overrides = [
        (&mut noise.bs_mean, args.bs_mean),
        (&mut noise.bs_std, args.bs_std),
        (&mut noise.swap_mean, args.swap_mean),
        (&mut noise.swap_std, args.swap_std),
        (&mut noise.loss_mean, args.loss_mean),
        (&mut noise.loss_std, args.loss_std),
    ];
    for (field, flag) in overrides {
        if let Some(v) = flag {
            *field = v;
        }
    }
    Ok(noise)
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let kind: ExperimentKind = args.kind.parse()?;
    let convention: FidelityConvention = args.convention.parse()?;
    if args.workers == Some(0) {
        return Err(Failure::Usage("--workers must be at least 1".into()));
    }
    let spec = ExperimentSpec {
        kind,
        modes: args.modes,
        trials: args.trials,
        noise: noise_params(args)?,
        seed: args.seed,
        convention,
    };
    let result = run_experiment(&spec, args.workers)?;
    if let Some(path) = &args.per_trial {
        fs::write(path, per_trial_csv(&result.fidelities)).map_err(|e| io_failure(path, e))?;
    }
    emit(&ResultsDocument::from_result(&result).to_csv(), args.out.as_deref(), stdout)
}

fn cmd_histogram(input: &Path, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    let text = fs::read_to_string(input).map_err(|e| io_failure(input, e))?;
    let values = read_per_trial(&text)?;
    emit(&histogram_csv(&fd_histogram(&values)?), out, stdout)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let outcome = match &cli.command {
        Command::Netlist { circuit, out } => cmd_netlist(circuit, out.as_deref(), stdout),
        Command::Matrix { circuit } => cmd_matrix(circuit, stdout),
        Command::Verify { max_dim } => cmd_verify(*max_dim, stdout),
        Command::Simulate(args) => cmd_simulate(args, stdout),
        Command::Histogram { input, out } => cmd_histogram(input, out.as_deref(), stdout),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Check) => {
            let _ = writeln!(stderr, "error: verification failed");
            EXIT_FAILURE
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
    }
}
