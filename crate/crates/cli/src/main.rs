//! `qtran <subcommand> --config <path> [--out <path>]`

mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Command;
use crate::config::{parse_config, RunConfig};
use crate::error::{Category, CliError};

#[derive(Parser)]
#[command(name = "qtran", version, about = "Transient transport through open two-terminal devices")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Io {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output file; stdout when absent and the config names none.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Sub {
    /// Print the equilibrium density matrix and occupations.
    GroundState(Io),
    /// Propagate and write the CSV trace.
    Propagate(Io),
    /// Steady current, or an I–V table when the config has a `steady` section.
    Steady(Io),
    /// T(ε) sweep as CSV.
    Transmission(Io),
    /// Finite-band full-system run compared against the reduced propagation.
    Oracle(Io),
    /// Validate a config and print it in normalized form.
    Check(Io),
    /// Run the acceptance checks.
    Verify {
        /// Accepted for symmetry with the other subcommands; not read.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated criterion numbers; all when absent.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, &e))?;
    parse_config(&text).map_err(|e| e.context(path.display()))
}

fn run(cli: Cli) -> Result<(String, bool), CliError> {
    let (cmd, io) = match cli.command {
        Sub::Verify { out, only, .. } => return commands::verify(&only, out.as_deref()),
        Sub::Check(io) => {
            let mut json = load(&io.config)?.to_json();
            json.push('\n');
            return match io.out {
                Some(p) => output::write_file(&p, &json).map(|_| (String::new(), true)),
                None => Ok((json, true)),
            };
        }
        Sub::GroundState(io) => (Command::GroundState, io),
        Sub::Propagate(io) => (Command::Propagate, io),
        Sub::Steady(io) => (Command::Steady, io),
        Sub::Transmission(io) => (Command::Transmission, io),
        Sub::Oracle(io) => (Command::Oracle, io),
    };
    let cfg = load(&io.config)?;
    Ok((commands::execute(cmd, &cfg, io.out.as_deref())?, true))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((text, ok)) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout.write_all(text.as_bytes()) {
                eprintln!("{}", CliError::io(Path::new("<stdout>"), &e));
                return ExitCode::from(Category::Io.exit_code());
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("NUMERIC: acceptance checks failed");
                ExitCode::from(Category::Numeric.exit_code())
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.category.exit_code())
        }
    }
}
