//! `krein-dual`: stability, duals, band tables and figure data from the command line.

/// `println!` that ignores a closed stdout pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

mod args;
mod commands;
mod figures;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use args::{ChainArgs, ModelArgs, ToleranceArgs};

#[derive(Debug, Parser)]
#[command(name = "krein-dual", version, about = "Number-conserving duals of stable quadratic bosonic Hamiltonians")]
struct Cli {
    /// Directory for CSV/JSON outputs and manifest.json.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Dynamical and thermodynamic stability of a model.
    Stability {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Number-conserving dual of a stable model.
    Dualize {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
        /// Also write K^D entries as k_dual.csv.
        #[arg(long)]
        csv: bool,
    },
    /// Stability of the Kitaev chain over a (phi, s) grid.
    Sweep {
        #[command(flatten)]
        grid: commands::SweepArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Harmonic-chain band with truncated duals (rho = 0..3).
    Bands {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Dual hopping amplitudes of the harmonic chain.
    Hoppings {
        #[command(flatten)]
        chain: ChainArgs,
    },
    /// Band of the dual truncated at range rho.
    Truncate {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long, default_value_t = 1)]
        rho: usize,
    },
    /// Krein and dual Berry connections along a one-parameter family.
    Berry {
        #[command(flatten)]
        args: commands::BerryArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
    },
    /// Built-in closed-form checks.
    Verify,
    /// Data behind the figures.
    Figure {
        #[arg(value_enum)]
        name: figures::Figure,
        /// Grid points along phi (fig3).
        #[arg(long, default_value_t = 61)]
        phi_points: usize,
        /// Grid points along s (fig3).
        #[arg(long, default_value_t = 51)]
        s_points: usize,
    },
    /// Model utilities.
    Model {
        #[arg(value_enum)]
        action: ModelAction,
        #[command(flatten)]
        model: ModelArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelAction {
    /// Print the model in the JSON file format.
    Emit,
}

fn run(cli: Cli) -> output::CliResult<()> {
    let out = cli.out.as_path();
    match cli.command {
        Command::Stability { model, tol } => commands::stability(out, &model, &tol.resolve()),
        Command::Dualize { model, tol, csv } => commands::dualize(out, &model, &tol.resolve(), csv),
        Command::Sweep { grid, tol } => commands::sweep(out, &grid, &tol.resolve()),
        Command::Bands { chain } => commands::bands(out, &chain),
        Command::Hoppings { chain } => commands::hoppings(out, &chain),
        Command::Truncate { chain, rho } => commands::truncate(out, &chain, rho),
        Command::Berry { args, tol } => commands::berry(out, &args, &tol.resolve()),
        Command::Verify => verify::run(out),
        Command::Figure { name, phi_points, s_points } => figures::emit(out, name, phi_points, s_points),
        Command::Model { action: ModelAction::Emit, model } => commands::emit_model(out, &model),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
