use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cmix_bandit::experiment::{
    evaluate_bounds, run_experiment, summary_slopes, BoundsRequest, ExperimentConfig, Summary,
};
use cmix_bandit::Error;

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "cmix", version, about = "Bandit experiments with mixing reward processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment grid and write runs.csv, summary.json and regret_vs_T.csv.
    Run {
        config: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long, env = "CMIX_WORKERS")]
        workers: Option<usize>,
        /// Output directory, overriding the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the log-log regret slope of every (env, policy) group in a summary.
    Slope { summary: PathBuf },
    /// Evaluate the regret bounds for the parameters in a JSON file.
    Bounds { params: PathBuf },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::ParameterDomain { .. } | Error::Structural(_) => CONFIG_ERROR,
        _ => RUNTIME_ERROR,
    }
}

fn read(path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(CONFIG_ERROR)
    })
}

fn run(config: &Path, workers: Option<usize>, out: Option<PathBuf>) -> Result<(), ExitCode> {
    let text = read(config)?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(|e| {
        eprintln!("error: {}: {e}", config.display());
        ExitCode::from(exit_code(&e))
    })?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    let output = run_experiment(&cfg, workers).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(exit_code(&e))
    })?;
    for f in &output.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn slope(path: &Path) -> Result<(), ExitCode> {
    let text = read(path)?;
    let summary: Summary = serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: {}: line {}, column {}: {e}", path.display(), e.line(), e.column());
        ExitCode::from(CONFIG_ERROR)
    })?;
    let mut failed = false;
    println!("env\tpolicy\tslope");
    for (env, policy, result) in summary_slopes(&summary) {
        match result {
            Ok(s) => println!("{env}\t{policy}\t{s}"),
            Err(e) => {
                eprintln!("error: {env}/{policy}: {e}");
                failed = true;
            }
        }
    }
    if failed {
        Err(ExitCode::from(CONFIG_ERROR))
    } else {
        Ok(())
    }
}

fn bounds(path: &Path) -> Result<(), ExitCode> {
    let text = read(path)?;
    let req: BoundsRequest = serde_json::from_str(&text).map_err(|e| {
        eprintln!("error: {}: line {}, column {}: {e}", path.display(), e.line(), e.column());
        ExitCode::from(CONFIG_ERROR)
    })?;
    let value = evaluate_bounds(&req);
    println!("{}", serde_json::to_string_pretty(&value).expect("json value serializes"));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            workers,
            out,
        } => run(&config, workers, out),
        Command::Slope { summary } => slope(&summary),
        Command::Bounds { params } => bounds(&params),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}
