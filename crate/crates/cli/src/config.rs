//! Run configuration: a TOML file whose keys may each be overridden on the
//! command line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use bdar::copula::CopulaFamily;
use bdar::inference::FitOptions;
use bdar::model::Variant;
use serde::Deserialize;

use crate::data::DiscretizationRule;

/// Every setting the subcommands read. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// CSV file with a header row.
    pub input: Option<PathBuf>,
    /// The two series columns.
    pub columns: Vec<String>,
    /// Optional time-index column carried into outputs.
    pub time_column: Option<String>,
    /// `ordinal`, `quantiles:k`, `unemployment`, or comma-separated breakpoints.
    pub discretization: String,
    pub variants: Vec<String>,
    pub copula_alpha: String,
    pub copula_eps: String,
    pub fit: FitOptions,
    /// Master seed for every random substream.
    pub seed: u64,
    pub n_sims: usize,
    pub horizon: usize,
    /// Parameter JSON for `simulate`, `forecast` and `replicate-study`.
    pub params: Option<PathBuf>,
    /// 1-based pair to forecast from; defaults to the last observation.
    pub last_state: Option<(usize, usize)>,
    pub output_dir: PathBuf,
    pub length: usize,
    pub burn_in: usize,
    pub lengths: Vec<usize>,
    pub replicates: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            input: None,
            columns: Vec::new(),
            time_column: None,
            discretization: "ordinal".into(),
            variants: Variant::ALL.iter().map(|v| v.label().to_string()).collect(),
            copula_alpha: "frank".into(),
            copula_eps: "frank".into(),
            fit: FitOptions::default(),
            seed: 0,
            n_sims: bdar::forecast::DEFAULT_N_SIMS,
            horizon: 12,
            params: None,
            last_state: None,
            output_dir: PathBuf::from("out"),
            length: 104,
            burn_in: 0,
            lengths: vec![100, 1000],
            replicates: 100,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).context("invalid configuration")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .context("no input file given (set `input` or pass --input)")
    }

    pub fn column_pair(&self) -> Result<(&str, &str)> {
        match self.columns.as_slice() {
            [a, b] => Ok((a, b)),
            [] => bail!("no series columns given (set `columns` or pass --columns)"),
            other => bail!("expected two series columns, got {}", other.len()),
        }
    }

    pub fn rule(&self) -> Result<DiscretizationRule> {
        DiscretizationRule::from_str(&self.discretization)
    }

    pub fn variant_list(&self) -> Result<Vec<Variant>> {
        if self.variants.is_empty() {
            bail!("no model variants requested");
        }
        self.variants
            .iter()
            .map(|v| Variant::from_str(v).map_err(Into::into))
            .collect()
    }

    pub fn families(&self) -> Result<(CopulaFamily, CopulaFamily)> {
        let parse = |s: &str| CopulaFamily::from_str(s).map_err(anyhow::Error::from);
        Ok((parse(&self.copula_alpha)?, parse(&self.copula_eps)?))
    }

    pub fn params_path(&self) -> Result<&Path> {
        self.params
            .as_deref()
            .context("no parameter file given (set `params` or pass --params)")
    }

    /// Checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<()> {
        if self.n_sims == 0 {
            bail!("n_sims must be at least 1");
        }
        if self.horizon == 0 {
            bail!("horizon must be at least 1");
        }
        self.rule()?;
        self.variant_list()?;
        self.families()?;
        Ok(())
    }
}
