//! `quantrl`: run the research pipeline stage by stage.
//!
//! On failure the last line on stderr is `error[<class>]: <message>` and the
//! process exits with status 1 (2 for usage errors, from clap).

use clap::{Args, Parser, Subcommand, ValueEnum};
use quantrl_core::experiment::{self, ExperimentConfig, ExperimentError, Profile, StageSummary};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "quantrl", version, about = "Multi-indicator RL trading research pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load, align and clean the source CSV into a cached frame.
    Ingest(Common),
    /// Compute indicator features from the ingest cache.
    Features(Common),
    /// Train the actor-critic agent on the training split.
    Train {
        #[command(flatten)]
        common: Common,
        /// Train this many consecutive seeds concurrently, starting at the configured seed.
        #[arg(long, default_value_t = 1)]
        parallel_seeds: u64,
    },
    /// Evaluate strategies on the test split.
    Backtest {
        #[command(flatten)]
        common: Common,
        /// a2c, random, hold, index, arima or ma<N>; all configured strategies when omitted.
        #[arg(long)]
        strategy: Option<String>,
        /// Agent checkpoint; defaults to the final checkpoint of the configured seed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Merge backtest results into one comparison table.
    Report(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment TOML file; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the agent seed (and use it as the only strategy seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Desk => Profile::Desk,
            ProfileArg::Paper => Profile::Paper,
        }
    }
}

fn load_config(c: &Common) -> Result<ExperimentConfig, ExperimentError> {
    let profile = c.profile.map(Profile::from);
    let mut cfg = match &c.config {
        Some(path) => ExperimentConfig::load(path, profile)?,
        None => ExperimentConfig::for_profile(profile.unwrap_or_default()),
    };
    if let Some(seed) = c.seed {
        cfg.agent.seed = seed;
        cfg.backtest.seeds = vec![seed];
    }
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    Ok(cfg)
}

fn print(summary: &StageSummary) {
    for note in &summary.notes {
        println!("{}: {note}", summary.stage);
    }
    for path in &summary.outputs {
        println!("{}: wrote {}", summary.stage, path.display());
    }
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Ingest(c) => print(&experiment::cmd_ingest(&load_config(&c)?)?),
        Command::Features(c) => print(&experiment::cmd_features(&load_config(&c)?)?),
        Command::Train { common, parallel_seeds } => {
            let cfg = load_config(&common)?;
            if parallel_seeds <= 1 {
                print(&experiment::cmd_train(&cfg)?);
            } else {
                let seeds: Vec<u64> = (0..parallel_seeds).map(|k| cfg.agent.seed + k).collect();
                let mut first_err = None;
                for result in experiment::cmd_train_seeds(&cfg, &seeds) {
                    match result {
                        Ok(s) => print(&s),
                        Err(e) => {
                            eprintln!("train: {e}");
                            first_err.get_or_insert(e);
                        }
                    }
                }
                if let Some(e) = first_err {
                    return Err(e);
                }
            }
        }
        Command::Backtest {
            common,
            strategy,
            checkpoint,
        } => {
            let cfg = load_config(&common)?;
            let choice = strategy.as_deref().map(experiment::parse_strategy).transpose()?;
            print(&experiment::cmd_backtest(&cfg, choice, checkpoint.as_deref())?);
        }
        Command::Report(c) => print(&experiment::cmd_report(&load_config(&c)?.output_dir)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::FAILURE
        }
    }
}
