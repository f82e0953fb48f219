// SPDX-License-Identifier: Apache-2.0

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use semiflow::Execution;
use semiflow_cli::commands::{self, CliError, Exit};

#[derive(Parser)]
#[command(
    name = "semiflow",
    version,
    about = "Split-step experiments for coupled semigroups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Problem catalog.
    Gallery {
        #[command(subcommand)]
        action: GalleryAction,
    },
    /// Convergence tables for every problem and scheme in a config file.
    Run { config: PathBuf },
    /// Lemma checks for every problem in a config file.
    VerifyLemmas { config: PathBuf },
    /// Fractional-coupling sweep against a bounded control.
    Instability {
        /// Fractional exponents in (0, 1]; repeat for several.
        #[arg(long = "beta", num_args = 1..)]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long = "n-max", default_value_t = 1024)]
        n_max: u64,
        /// Write the table here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GalleryAction {
    List {
        #[arg(long)]
        json: bool,
    },
}

#[cfg(feature = "parallel")]
fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("SEMIFLOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = value.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "SEMIFLOW_THREADS must be an integer, got `{value}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

#[cfg(not(feature = "parallel"))]
fn configure_threads() -> Result<(), CliError> {
    Ok(())
}

fn dispatch(cli: Cli) -> Result<Exit, CliError> {
    configure_threads()?;
    let exec = Execution::default();
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Gallery {
            action: GalleryAction::List { json },
        } => commands::gallery_list(json, &mut stdout),
        Command::Run { config } => {
            let cfg = commands::load_config(&config)?;
            commands::run(&cfg, exec, &mut stdout)
        }
        Command::VerifyLemmas { config } => {
            let cfg = commands::load_config(&config)?;
            commands::verify_lemmas(&cfg, exec, &mut stdout)
        }
        Command::Instability {
            betas,
            t,
            n_max,
            output,
        } => commands::instability(
            &betas,
            t,
            n_max,
            output.as_deref(),
            exec,
            &mut stdout,
            &mut io::stderr(),
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("semiflow: {e}");
            ExitCode::from(e.exit() as u8)
        }
    }
}
