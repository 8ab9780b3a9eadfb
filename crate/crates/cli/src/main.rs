use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kflow::Tolerances;
use kflow_cli::schema::GenerateSpec;
use kflow_cli::{execute, exit, generate, to_json, CliError, RunOptions};

#[derive(Parser)]
#[command(name = "kflow", version, about = "Spectral flow and index computations on finite von Neumann models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the task described by a JSON task file.
    Run {
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write eigenvalue tracks of the task's path as CSV.
        #[arg(long)]
        tracks: Option<PathBuf>,
        #[arg(long)]
        tol_kernel: Option<f64>,
        #[arg(long)]
        tol_gap: Option<f64>,
        #[arg(long)]
        max_depth: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print a model task file.
    Generate {
        #[command(subcommand)]
        model: Model,
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum Model {
    /// Truncated circle Dirac operator with a winding unitary.
    Dirac {
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        k: i64,
    },
    /// Random path with a prescribed schedule of zero crossings.
    Crossing {
        #[arg(long)]
        n: usize,
        /// Comma separated list of `+` (upward) and `-` (downward) crossings.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        crossings: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        weight: Option<f64>,
    },
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Schema(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main_inner(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { file, out, tracks, tol_kernel, tol_gap, max_depth, seed } => {
            let text = std::fs::read_to_string(&file)
                .map_err(|e| CliError::Schema(format!("{}: {e}", file.display())))?;
            let opts = RunOptions { tol_kernel, tol_gap, max_depth, seed, tracks: tracks.is_some() };
            let artifacts = execute(&text, &opts)?;
            if let (Some(path), Some(csv)) = (tracks.as_deref(), artifacts.tracks_csv.as_deref()) {
                write_output(Some(path), csv)?;
            }
            write_output(out.as_deref(), &artifacts.json)
        }
        Command::Generate { model, out } => {
            let (spec, seed) = match model {
                Model::Dirac { m, k } => (GenerateSpec::Dirac { m, k }, 0),
                Model::Crossing { n, crossings, seed, weight } => {
                    let crossings = crossings
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect();
                    (GenerateSpec::Crossing { n, crossings, weight }, seed)
                }
            };
            let file = generate(&spec, seed, &Tolerances::default())?;
            write_output(out.as_deref(), &to_json(&file))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::SCHEMA } else { exit::OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
