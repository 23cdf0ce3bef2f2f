use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use obstacle_dpp::app;
use obstacle_dpp::config::{Command, RunConfig};

/// Double-obstacle p-Laplacian solver and tug-of-war simulator.
#[derive(Parser, Debug)]
#[command(name = "obstacle-dpp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Solve the discrete problem and write solution.csv and report.json
    Solve(Args),
    /// Solve, then estimate the game value at the probe points
    Simulate(Args),
    /// Solve and run the independent checks
    Validate(Args),
    /// Radius table and p-sweep benchmarks
    Bench(Args),
}

#[derive(clap::Args, Debug)]
struct Args {
    /// TOML config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a config key (repeatable), e.g. --set tolerance=1e-6
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn init_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("DPP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("DPP_THREADS must be a non-negative integer, got `{raw}`"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = init_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let (command, args) = match cli.command {
        Cmd::Solve(a) => (Command::Solve, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Validate(a) => (Command::Validate, a),
        Cmd::Bench(a) => (Command::Bench, a),
    };
    let result = RunConfig::load(args.config.as_deref(), &args.set, Some(command))
        .and_then(|config| app::run(&config, &args.out));
    match result {
        Ok(report) => {
            if let Some(solve) = report.get("solve") {
                println!("solve: {solve}");
            }
            println!("wrote report to {}", args.out.join("report.json").display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
