use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use latent_idm_cli::catalog::{custom_dir_from_env, listing};
use latent_idm_cli::{catalog, resolve, run_scenario, selftest, write_atomic, CliError, Format};

#[derive(Parser)]
#[command(
    name = "latent-idm",
    version,
    about = "Imprecise Dirichlet inference through noisy observations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario given as a file path or a catalogue name.
    Run {
        scenario: String,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "doc")]
        format: Format,
        /// Record wall-clock time in the document (breaks byte-identical re-runs).
        #[arg(long)]
        timing: bool,
    },
    /// List bundled scenarios, then those in $LATENT_IDM_SCENARIO_DIR.
    List,
    /// Run every bundled scenario against its assertion manifest.
    Selftest,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let custom = custom_dir_from_env();
    match cli.command {
        Command::Run {
            scenario,
            out,
            format,
            timing,
        } => {
            let sc = resolve(&scenario, custom.as_deref())?;
            let start = Instant::now();
            let mut report = run_scenario(&sc)?;
            let elapsed = start.elapsed();
            eprintln!("{}: finished in {:.3} s", sc.name, elapsed.as_secs_f64());
            if timing {
                report = report.with_timing(elapsed);
            }
            let text = report.render(format)?;
            match out {
                Some(path) => write_atomic(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::List => print!("{}", listing(&catalog(custom.as_deref())?)),
        Command::Selftest => {
            let summary = selftest()?;
            print!("{}", summary.render());
            if summary.failures() > 0 {
                return Err(CliError::Selftest(format!(
                    "{} checks failed",
                    summary.failures()
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
