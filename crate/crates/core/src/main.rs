use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use omsq::runner::config::RunConfig;
use omsq::runner::{figures, init_thread_pool, selfcheck, sweep};
use omsq::Error;

/// Frequency-domain simulator for a two-phonon-driven optomechanical cavity.
#[derive(Parser)]
#[command(name = "omsq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the quantities requested in a config over its sweep and grid.
    Sweep {
        config: PathBuf,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit the data behind a figure preset (fig2 … fig8).
    Figure {
        name: String,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Tabulate stability over the sweep parameter and the `[map]` axis.
    StabilityMap {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance self-check suite.
    Check {
        /// Also write the machine-readable report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

const EXIT_CHECK: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    init_thread_pool()?;
    match cli.command {
        Command::Sweep { config, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let res = sweep::run_sweep(&cfg, &dir)?;
            for f in res.files.iter().chain([&res.sidecar]) {
                println!("{}", f.display());
            }
        }
        Command::Figure { name, out } => {
            let fig = figures::build(&name)?;
            for notice in &fig.notices {
                eprintln!("notice: {notice}");
            }
            for f in figures::write(&fig, &out)? {
                println!("{}", f.display());
            }
        }
        Command::StabilityMap { config, out } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
            let res = sweep::run_stability_map(&cfg, &dir)?;
            for f in res.files.iter().chain([&res.sidecar]) {
                println!("{}", f.display());
            }
        }
        Command::Check { json } => {
            let report = selfcheck::run(&selfcheck::Oracles::default());
            for line in report.lines() {
                println!("{line}");
            }
            if let Some(path) = json {
                let s = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))?;
                std::fs::write(&path, s + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
            let failed = report.checks.iter().filter(|c| !c.passed).count();
            println!("{} of {} checks passed", report.checks.len() - failed, report.checks.len());
            if failed > 0 {
                return Ok(EXIT_CHECK);
            }
        }
    }
    Ok(0)
}

fn load(path: &std::path::Path) -> Result<RunConfig, Error> {
    RunConfig::load(path).map_err(|e| match e {
        Error::Config { line: Some(l), message } => {
            Error::Config { line: None, message: format!("{}:{l}: {message}", path.display()) }
        }
        Error::Config { line: None, message } => {
            Error::Config { line: None, message: format!("{}: {message}", path.display()) }
        }
        other => other,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
