use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qmc_cli::commands::{
    cmd_evaluate, cmd_fit, cmd_generate, cmd_plotdata, cmd_predict, EvaluateArgs, FitArgs, GenerateArgs,
    PlotdataArgs, PredictArgs,
};
use qmc_cli::{CliError, EXIT_INPUT};

/// Density-matrix kernel density estimation and classification on a
/// simulated qudit circuit.
#[derive(Debug, Parser)]
#[command(name = "qmc", version)]
struct Cli {
    /// Worker threads for prediction.
    #[arg(long, env = "QMC_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic dataset or evaluation grid as CSV.
    Generate(GenerateArgs),
    /// Train a model on a CSV dataset.
    Fit(FitArgs),
    /// Run the prediction circuit on every row of a CSV dataset.
    Predict(PredictArgs),
    /// Score predictions against labels or an analytic density.
    Evaluate(EvaluateArgs),
    /// Evaluate a model on a dense grid for plotting.
    Plotdata(PlotdataArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::input(e.to_string()))?;
    }
    let summary = match &cli.command {
        Command::Generate(a) => cmd_generate(a)?,
        Command::Fit(a) => cmd_fit(a)?,
        Command::Predict(a) => cmd_predict(a)?,
        Command::Evaluate(a) => cmd_evaluate(a)?.1,
        Command::Plotdata(a) => cmd_plotdata(a)?,
    };
    println!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
