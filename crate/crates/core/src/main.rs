use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use alstop::corpus::SynthParams;
use alstop::engine::QueryStrategy;
use alstop::harness::{run_experiment, ExperimentConfig, Overrides};
use alstop::svm::DistanceKind;
use alstop::Error;

#[derive(Parser)]
#[command(name = "alstop", version, about = "Active learning stopping-method experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment grid described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strategy: Option<QueryStrategy>,
        #[arg(long)]
        distance: Option<DistanceKind>,
        #[arg(long)]
        batch_fraction: Option<f64>,
        #[arg(long)]
        stop_set_fraction: Option<f64>,
    },
    /// Write a synthetic two-category corpus to DIR/corpus.jsonl.
    Synth {
        #[arg(long)]
        docs: usize,
        #[arg(long)]
        terms: usize,
        #[arg(long)]
        sep: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn exit_code(e: &Error) -> ExitCode {
    if e.is_config() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
            strategy,
            distance,
            batch_fraction,
            stop_set_fraction,
        } => ExperimentConfig::load(&config)
            .map_err(as_config_error)
            .and_then(|mut cfg| {
                cfg.apply(&Overrides {
                    seed,
                    workers,
                    out,
                    strategy,
                    distance,
                    batch_fraction,
                    stop_set_fraction,
                })?;
                let report = run_experiment(&cfg)?;
                print!("{}", report.table()?.to_text());
                Ok(())
            }),
        Command::Synth {
            docs,
            terms,
            sep,
            seed,
            out,
        } => SynthParams {
            n_docs: docs,
            n_terms: terms,
            class_separation: sep,
            seed,
        }
        .generate()
        .map_err(|e| Error::config("synth", e.to_string()))
        .and_then(|corpus| {
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let path = out.join("corpus.jsonl");
            fs::write(&path, corpus.to_jsonl()).map_err(|e| Error::io(&path, e))
        }),
        Command::Validate { config } => ExperimentConfig::load(&config).map_err(as_config_error).map(|cfg| {
            print!("{}", cfg.to_config_string());
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// An unreadable config file is a config error, not a runtime one.
fn as_config_error(e: Error) -> Error {
    match e {
        Error::Io { path, source } => Error::config("config", format!("{}: {source}", path.display())),
        other => other,
    }
}
