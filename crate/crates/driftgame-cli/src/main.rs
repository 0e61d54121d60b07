//! The `driftgame` binary: thin argument parsing around the library
//! commands, with exit status 0 on success (and all saddle
//! inequalities passing), 1 on usage or config errors, and 2 when a
//! saddle inequality is violated beyond the Monte Carlo margin.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use driftgame_cli::{
    cmd_exponents, cmd_paths, cmd_saddle, cmd_value, CliError, ExperimentConfig, OutputFormat,
};
use std::io::Write;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "driftgame",
    version,
    about = "Covert drift-injection games on a scalar diffusion: values, saddle certificates, paths, exponents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed from the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form equilibrium quantities.
    Value(CommonArgs),
    /// Monte Carlo saddle-point certificate.
    Saddle(CommonArgs),
    /// Simulated sample paths in plot-ready form.
    Paths(CommonArgs),
    /// Exponent curve of the miss probability over horizons.
    Exponents(CommonArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Value(args)
            | Command::Saddle(args)
            | Command::Paths(args)
            | Command::Exponents(args) => args,
        }
    }
}

fn open_sink(args: &CommonArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &args.out {
        Some(path) => Box::new(std::io::BufWriter::new(std::fs::File::create(path)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let args = cli.command.common();
    let experiment = ExperimentConfig::load(&args.config)?;
    let mut out = open_sink(args)?;
    let code = match &cli.command {
        Command::Value(_) => {
            cmd_value(&experiment, args.format, &mut out)?;
            0
        }
        Command::Saddle(_) => {
            let report = cmd_saddle(
                &experiment,
                args.format,
                args.seed,
                &mut out,
                &mut std::io::stderr().lock(),
            )?;
            if report.all_pass {
                0
            } else {
                2
            }
        }
        Command::Paths(_) => {
            cmd_paths(&experiment, args.format, args.seed, &mut out)?;
            0
        }
        Command::Exponents(_) => {
            cmd_exponents(&experiment, args.format, &mut out)?;
            0
        }
    };
    out.flush()?;
    Ok(code)
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(CliError::Output(io_err)) if io_err.kind() == std::io::ErrorKind::BrokenPipe => {
            std::process::exit(0);
        }
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(1);
        }
    }
}
