//! Command-line driver for the newsprom pipeline.

pub mod config;
pub mod error;
pub mod stages;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigError, Overrides, PipelineConfig};
pub use error::{CliError, Coded};

#[derive(Debug, Parser)]
#[command(name = "newsprom", version, about = "Homepage prominence pipeline: ingest, extract, pairs, train, eval, rank, agree, report")]
pub struct Cli {
    /// Flat TOML pipeline config; flags override its keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Validate bundles and copy them into the store.
    Ingest {
        /// Bundle directories; defaults to every subdirectory of bundles_dir.
        bundles: Vec<PathBuf>,
    },
    /// Extract article cards and layout for every stored snapshot.
    Extract,
    /// Build preference pairs and the train/test split.
    Pairs,
    /// Train one comparator per outlet.
    Train,
    /// Score each model on its outlet's test pairs.
    Eval,
    /// Rank every article set with every model.
    Rank,
    /// Rank-agreement matrix between models plus the similarity baseline.
    Agree,
    /// Render reports in the configured format.
    Report,
}

/// Runs one command and returns its summary line.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = PipelineConfig::resolve(cli.config.as_deref(), &cli.overrides).map_err(|e| e.at("config"))?;
    run_with(&cfg, &cli.command)
}

pub fn run_with(cfg: &PipelineConfig, command: &Command) -> Result<String, CliError> {
    match command {
        Command::Ingest { bundles } => stages::ingest(cfg, bundles),
        Command::Extract => stages::extract(cfg),
        Command::Pairs => stages::pairs(cfg),
        Command::Train => stages::train(cfg),
        Command::Eval => stages::eval(cfg),
        Command::Rank => stages::rank(cfg),
        Command::Agree => stages::agree(cfg),
        Command::Report => stages::report(cfg),
    }
}
