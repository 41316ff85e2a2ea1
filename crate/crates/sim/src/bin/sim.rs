use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crossdrop_sim::{run_scenario, verify_log, Scenario};

#[derive(Parser)]
#[command(name = "sim", about = "Deterministic scenario runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its event log.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 60)]
        tick_hz: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a log with a golden file; exit 1 when they differ.
    Verify {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        golden: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { scenario, tick_hz, out } => {
            let result = Scenario::load(&scenario)
                .map_err(|e| e.to_string())
                .and_then(|s| run_scenario(&s, tick_hz).map_err(|e| e.to_string()))
                .and_then(|log| log.write(&out).map_err(|e| format!("{}: {e}", out.display())).map(|_| log));
            match result {
                Ok(log) => {
                    eprintln!("wrote {} records to {}", log.records.len(), out.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Verify { log, golden } => match verify_log(&log, &golden) {
            Ok(d) if d.is_empty() => ExitCode::SUCCESS,
            Ok(d) => {
                println!("{}", d.rendered);
                ExitCode::from(1)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
    }
}
