//! `passmod`: filter design, impedance sweeps, depth budgets and link simulation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod budget;
mod design;
mod error;
mod output;
mod simulate;
mod sweep;

use error::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "passmod",
    version,
    about = "Passive-modulation I2C link design and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesize a filter from a spec file and verify it.
    Design(design::DesignArgs),
    /// Input impedance of a synthesized filter over frequency.
    Sweep(sweep::SweepArgs),
    /// Modulation depth against node count for one filter and pull-up.
    Budget(budget::BudgetArgs),
    /// Run a link scenario and report metrics.
    Simulate(simulate::SimulateArgs),
    /// Run the built-in eight-sensor scenario.
    Demo(simulate::DemoArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    Csv,
    #[default]
    Json,
}

/// Output location and encoding shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Directory for result files; results go to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// Parasitic model selection.
#[derive(Args, Debug, Clone)]
pub struct LossArgs {
    /// Ideal elements and pins.
    #[arg(long, conflicts_with = "q")]
    pub lossless: bool,
    /// Inductor quality factor for the lossy model.
    #[arg(long)]
    pub q: Option<f64>,
}

impl LossArgs {
    pub fn model(&self) -> Result<passmod_core::analysis::LossModel, CliError> {
        use passmod_core::analysis::LossModel;
        let m = match (self.lossless, self.q) {
            (true, _) => LossModel::lossless(),
            (false, Some(q)) => LossModel::lossy_with_q(q),
            (false, None) => LossModel::lossy(),
        };
        m.validate().map_err(CliError::Input)?;
        Ok(m)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Design(a) => design::run(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Budget(a) => budget::run(&a),
        Command::Simulate(a) => simulate::run(&a),
        Command::Demo(a) => simulate::demo(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
