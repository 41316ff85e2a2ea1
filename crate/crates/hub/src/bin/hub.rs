use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crossdrop_hub::{serve, ClockMode, HubConfig, ServerOptions};
use tokio::net::TcpListener;
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(name = "hub", about = "Content-transfer hub")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a config and serve until interrupted.
    Serve {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the port from the config file.
        #[arg(long)]
        port: Option<u16>,
        /// Advance time by exactly 1/tick_hz per tick instead of reading the wall clock.
        #[arg(long)]
        virtual_clock: bool,
    },
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let Command::Serve {
        config,
        port,
        virtual_clock,
    } = Cli::parse().command;
    let cfg = match HubConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let engine = match cfg.build_engine() {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let runtime = tokio::runtime::Runtime::new().expect("tokio runtime");
    runtime.block_on(async move {
        let port = port.unwrap_or(cfg.port);
        let listener = match TcpListener::bind(("0.0.0.0", port)).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("error: cannot bind port {port}: {e}");
                return ExitCode::from(1);
            }
        };
        let opts = ServerOptions {
            tick_hz: cfg.tick_hz,
            clock: if virtual_clock { ClockMode::Virtual } else { ClockMode::Wall },
        };
        let handle = serve(engine, listener, opts).expect("listener address");
        println!("listening on {}", handle.local_addr());
        let _ = tokio::signal::ctrl_c().await;
        handle.shutdown().await;
        ExitCode::SUCCESS
    })
}
