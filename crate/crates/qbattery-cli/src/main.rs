//! `qbattery`: simulate a driven charger-battery pair whose coupling through
//! a lossy auxiliary mode makes the energy flow one-way.
//!
//! Every data-producing subcommand writes `<name>.csv` plus `<name>.meta.json`
//! into `--out-dir` and prints a short summary. Exit codes: 0 on success, 2
//! when individual grid points failed but the dataset was still written
//! (their status column says why), 1 on anything fatal.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod output;
mod params;

use params::ParamArgs;

#[derive(Debug, Parser)]
#[command(
    name = "qbattery",
    version,
    about = "Nonreciprocal quantum battery simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the reduced two-mode parameters and the timescale-separation report
    Reduce(ReduceArgs),
    /// Integrate the moment equations and write a trajectory dataset
    Simulate(SimulateArgs),
    /// Evaluate the closed-form resonant solution on a time grid
    Analytic(AnalyticArgs),
    /// Solve for the steady state of the reduced model
    Steady(SteadyArgs),
    /// Evaluate observables over a parameter grid (up to two axes)
    Sweep(SweepArgs),
    /// Solve for parameter values that place the drift at an exceptional point
    Ep(EpArgs),
    /// Generate the bundled figure datasets
    Figures(FiguresArgs),
    /// Run the validation suite and report every criterion
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct OutDirArg {
    /// Directory for output files (created if missing).
    #[arg(long, value_name = "DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Also write the report as `reduce.json` in --out-dir.
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Dynamical model: effective (two-mode), full (three-mode), or both.
    /// `both` pairs the reduced model with the three-mode system rebuilt
    /// from it, so the files are directly comparable.
    #[arg(long, default_value = "effective", value_name = "WHICH")]
    model: String,
    #[arg(long, default_value_t = 200.0, value_name = "T")]
    t_end: f64,
    #[arg(long, default_value_t = 2001, value_name = "N")]
    samples: usize,
    /// Override the integrator's relative tolerance.
    #[arg(long, value_name = "TOL")]
    rtol: Option<f64>,
    /// Override the integrator's absolute tolerance.
    #[arg(long, value_name = "TOL")]
    atol: Option<f64>,
    /// Base name of the output files.
    #[arg(long, default_value = "trajectory", value_name = "NAME")]
    name: String,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Debug, Args)]
struct AnalyticArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 200.0, value_name = "T")]
    t_end: f64,
    #[arg(long, default_value_t = 2001, value_name = "N")]
    samples: usize,
    #[arg(long, default_value = "analytic", value_name = "NAME")]
    name: String,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Debug, Args)]
struct SteadyArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = "steady", value_name = "NAME")]
    name: String,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Sweep axis `name:min:max:count[:linear|log]`; repeat for a 2-D grid.
    /// Axis names are the config keys plus the reduced-model extras
    /// (delta_b_p, r).
    #[arg(long = "axis", value_name = "SPEC")]
    axes: Vec<String>,
    /// Observable column: e_a, e_b, eta, power, or trajectory. Repeatable;
    /// defaults to e_a, e_b, eta.
    #[arg(long = "output", value_name = "WHAT")]
    outputs: Vec<String>,
    #[arg(long, default_value_t = 200.0, value_name = "T")]
    t_end: f64,
    #[arg(long, default_value_t = 201, value_name = "N")]
    samples: usize,
    #[arg(long, default_value = "effective", value_name = "WHICH")]
    model: String,
    /// Per-point re-solve: `nonreciprocal` locks (J, phi) to the one-way
    /// condition, `ep` locks J to the exceptional point.
    #[arg(long, default_value = "none", value_name = "WHICH")]
    lock: String,
    #[arg(long, default_value = "sweep", value_name = "NAME")]
    name: String,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Debug, Args)]
struct EpArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Variable(s) the solver may adjust: j, phi, delta_b_p, or r.
    /// One variable zeroes the discriminant along a line; two solve both
    /// of its real equations at once.
    #[arg(long = "free", value_name = "VAR", required = true, num_args = 1)]
    free: Vec<String>,
    #[arg(long, default_value = "ep", value_name = "NAME")]
    name: String,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Debug, Args)]
struct FiguresArgs {
    /// Dataset names (default: all of them).
    #[arg(value_name = "FIG")]
    figures: Vec<String>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value = "effective", value_name = "WHICH")]
    model: String,
    #[command(flatten)]
    out: OutDirArg,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Multiply every acceptance threshold by this factor.
    #[arg(long, default_value_t = 1.0, value_name = "X")]
    tol_scale: f64,
}

fn main() -> ExitCode {
    // Restore default SIGPIPE handling so `qbattery ... | head` dies quietly
    // like any Unix filter instead of panicking on the closed pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's default exit status (2) is reserved for partial dataset
            // failures here, so usage errors map to 1 and --help/--version to 0.
            let code = u8::from(e.use_stderr());
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> qbattery::Result<u8> {
    match &cli.command {
        Command::Reduce(a) => commands::reduce(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Analytic(a) => commands::analytic(a),
        Command::Steady(a) => commands::steady(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Ep(a) => commands::ep(a),
        Command::Figures(a) => commands::figures(a),
        Command::Validate(a) => commands::validate(a),
    }
}
