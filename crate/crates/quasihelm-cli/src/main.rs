use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use quasihelm_cli::{run, ConfigError, Experiment, RawConfig, RunConfig, RunError};

#[derive(Parser)]
#[command(name = "quasihelm", version, about = "Helmholtz solver for locally perturbed quasiperiodic media")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Half-line solution, DtN coefficient and half-guide field.
    Halfline(RunArgs),
    /// Whole-line solution with transparent conditions at +-a.
    Wholeline(RunArgs),
    /// Half-line error against a truncated reference over the inv_h ladder.
    Convergence(RunArgs),
    /// Eigenvalues of the propagation operator and band counts.
    Spectrum(RunArgs),
    /// Samples of the broken line x theta mod 1.
    Fibrage(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides as `--key value`.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    overrides: Vec<String>,
}

fn load(args: &RunArgs) -> Result<(RawConfig, RunConfig), ConfigError> {
    let (mut raw, base) = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (RawConfig::parse(&text)?, base)
        }
        None => (RawConfig::default(), PathBuf::from(".")),
    };
    raw.apply_overrides(&args.overrides)?;
    let cfg = RunConfig::from_raw(&raw, &base)?;
    Ok((raw, cfg))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (kind, args) = match &cli.command {
        Command::Halfline(a) => (Experiment::Halfline, a),
        Command::Wholeline(a) => (Experiment::Wholeline, a),
        Command::Convergence(a) => (Experiment::Convergence, a),
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Fibrage(a) => (Experiment::Fibrage, a),
    };
    let (raw, cfg) = match load(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error [cli]: {e}");
            return ExitCode::from(2);
        }
    };
    match run(kind, &cfg) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&e, &raw);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn report(e: &RunError, raw: &RawConfig) {
    let msg = e.to_string();
    if msg.starts_with('[') {
        eprintln!("error {msg}");
    } else {
        eprintln!("error [{}]: {msg}", e.module());
    }
    eprintln!("configuration:");
    for line in raw.echo().lines() {
        eprintln!("  {line}");
    }
}
