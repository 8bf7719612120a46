//! `diamag`: compute, verify and export response data for configured media.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use diamag_cli::commands::{self, Common};
use diamag_cli::CliError;

#[derive(Parser)]
#[command(name = "diamag", version, about = "Causal magnetic response of model insulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// scenario file
    #[arg(long)]
    config: PathBuf,
    /// output directory, overriding `[output] dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// basis cutoff for box mode, overriding `[box] n_max`
    #[arg(long)]
    n_max: Option<u32>,
}

impl From<CommonArgs> for Common {
    fn from(a: CommonArgs) -> Self {
        Common { config: a.config, out: a.out, n_max: a.n_max }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate eps, mu and eps*mu on the configured grid (response.csv)
    Respond(CommonArgs),
    /// Run the consistency checks; exits 1 if any check fails
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// multiply every threshold by this factor
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
    /// Enumerate box transitions and write the moment cache
    Box(CommonArgs),
    /// Solve the dispersion branches at the configured wavevectors (branches.csv)
    Polariton {
        #[command(flatten)]
        common: CommonArgs,
        /// linewidth scale for the damped roots, overriding `[polariton] gamma_scale`
        #[arg(long)]
        gamma_scale: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Respond(c) => commands::respond(&commands::load(&c.into())?),
        Command::Verify { common, tolerance_scale } => {
            commands::verify(&commands::load(&common.into())?, tolerance_scale)
        }
        Command::Box(c) => commands::box_cache(&commands::load(&c.into())?),
        Command::Polariton { common, gamma_scale } => {
            commands::polariton(&commands::load(&common.into())?, gamma_scale)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
