use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use entham::config::{ExperimentConfig, SCHEMA};
use entham::workbench::{self, exit};
use entham::Error;

/// Free-fermion entanglement Hamiltonian workbench.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Run { config: PathBuf },
    /// Compare the free-fermion pipeline with spin exact diagonalization (N <= 12).
    OracleCheck { config: PathBuf },
    /// Print the config-file grammar.
    PrintConfigSchema,
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
        field: "<file>".into(),
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    ExperimentConfig::parse(&text)
}

fn fail(err: &Error) -> i32 {
    eprintln!("error: {err}");
    workbench::exit_code(err)
}

fn execute(command: Command) -> i32 {
    match command {
        Command::PrintConfigSchema => {
            print!("{SCHEMA}");
            exit::OK
        }
        Command::Run { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match workbench::run(&cfg) {
                Ok(report) => {
                    println!("points: {}, failed: {}", report.points, report.failed);
                    for f in &report.files {
                        println!("wrote {}", cfg.output_dir.join(f).display());
                    }
                    report.exit_code()
                }
                Err(e) => fail(&e),
            }
        }
        Command::OracleCheck { config } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            match workbench::oracle_check(&cfg) {
                Ok(report) => {
                    print!("{}", report.render());
                    println!("{}", if report.passed() { "oracle-check: ok" } else { "oracle-check: MISMATCH" });
                    report.exit_code()
                }
                Err(e) => fail(&e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(execute(cli.command) as u8)
}
