//! Command-line arguments and their merge into a [`RunConfig`].

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "bdar",
    version,
    about = "Bivariate discrete autoregressive models for ordinal time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Read two numeric columns and summarize them.
    Ingest,
    /// Map the raw series onto ordinal states.
    Discretize,
    /// Kendall's tau between and within the ordinal series.
    Diagnose,
    /// Fit one model variant.
    Fit,
    /// Fit several variants and select among them by AIC, BIC and LRT.
    Compare,
    /// Simulate a path from a parameter file.
    Simulate,
    /// Monte-Carlo forecast from a parameter file.
    Forecast,
    /// Simulate-and-refit study for parameter recovery.
    ReplicateStudy,
}

/// Flags that override the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input CSV with a header row.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// The two series columns, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub columns: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub time_column: Option<String>,
    /// `ordinal`, `quantiles:k`, `unemployment`, or comma-separated breakpoints.
    #[arg(long, global = true)]
    pub discretization: Option<String>,
    /// Model variants, e.g. `M1,M5`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub variants: Option<Vec<String>>,
    #[arg(long, global = true)]
    pub copula_alpha: Option<String>,
    #[arg(long, global = true)]
    pub copula_eps: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub n_sims: Option<usize>,
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Parameter JSON file.
    #[arg(long, global = true)]
    pub params: Option<PathBuf>,
    /// 1-based state pair to forecast from, e.g. `2,1`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub last_state: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    pub length: Option<usize>,
    #[arg(long, global = true)]
    pub burn_in: Option<usize>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Jittered optimizer restarts on top of the default starting points.
    #[arg(long, global = true)]
    pub extra_starts: Option<usize>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
}

impl Overrides {
    /// Loads the config file (if any) and applies the flags on top.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = &self.$field {
                    cfg.$field = v.clone().into();
                }
            )*};
        }
        set!(
            columns,
            discretization,
            variants,
            copula_alpha,
            copula_eps,
            seed,
            n_sims,
            horizon,
            output_dir,
            length,
            burn_in,
            lengths,
            replicates
        );
        if let Some(v) = &self.input {
            cfg.input = Some(v.clone());
        }
        if let Some(v) = &self.time_column {
            cfg.time_column = Some(v.clone());
        }
        if let Some(v) = &self.params {
            cfg.params = Some(v.clone());
        }
        if let Some(v) = &self.last_state {
            let [a, b] = v.as_slice() else {
                bail!("--last-state takes two states");
            };
            cfg.last_state = Some((*a, *b));
        }
        if let Some(v) = self.extra_starts {
            cfg.fit.extra_starts = v;
        }
        if let Some(v) = self.max_iter {
            cfg.fit.max_iter = v;
        }
        cfg.fit.seed = cfg.seed;
        Ok(cfg)
    }
}

/// Runs a parsed command line and returns the text to print.
pub fn run(args: Cli) -> Result<String> {
    let cfg = args.overrides.resolve()?;
    cfg.validate()?;
    run_command(args.command, &cfg)
}

pub fn run_command(command: Command, cfg: &RunConfig) -> Result<String> {
    match command {
        Command::Ingest => commands::run_ingest(cfg),
        Command::Discretize => commands::run_discretize(cfg),
        Command::Diagnose => commands::run_diagnose(cfg),
        Command::Fit => commands::run_fit(cfg),
        Command::Compare => commands::run_compare(cfg),
        Command::Simulate => commands::run_simulate(cfg),
        Command::Forecast => commands::run_forecast(cfg),
        Command::ReplicateStudy => commands::run_replicate_study(cfg),
    }
}
