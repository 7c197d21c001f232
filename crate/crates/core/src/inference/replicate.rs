use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copula::CopulaFamily;
use crate::error::Result;
use crate::model::{simulate, Bdar1Params};
use crate::rng::substream;

use super::fit::{fit, FitOptions};
use super::reparam::ParamLayout;

/// A simulation study: simulate from `truth` at each length, refit the same
/// variant, and collect the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateStudy {
    pub truth: Bdar1Params,
    pub lengths: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub options: FitOptions,
}

/// Outcome of one simulated-and-refitted replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateRecord {
    pub length: usize,
    pub replicate: usize,
    /// Estimates in [`ReplicateStudy::param_names`] order; empty when the
    /// fit failed.
    pub estimates: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub error: Option<String>,
}

/// Per-length, per-parameter summary of a study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub length: usize,
    pub param: String,
    pub truth: f64,
    pub median: f64,
    pub iqr: f64,
    /// Median over replicates of the absolute error.
    pub median_abs_error: f64,
    pub n_ok: usize,
}

/// Type-7 quantile of ascending data (linear interpolation between order
/// statistics), `q` in `[0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    let h = (n - 1) as f64 * q.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl ReplicateStudy {
    fn families(&self) -> (CopulaFamily, CopulaFamily) {
        let fam = |spec: &crate::copula::CopulaSpec, used: bool| {
            if used {
                spec.family()
            } else {
                CopulaFamily::Product
            }
        };
        let v = self.truth.variant();
        (
            fam(self.truth.copula_alpha(), v.has_alpha_copula()),
            fam(self.truth.copula_eps(), v.has_eps_copula()),
        )
    }

    fn layout(&self) -> Result<ParamLayout> {
        let (a, e) = self.families();
        ParamLayout::new(self.truth.variant(), a, e, self.truth.d1(), self.truth.d2())
    }

    pub fn param_names(&self) -> Result<Vec<String>> {
        Ok(self.layout()?.names())
    }

    /// True parameter values in [`ReplicateStudy::param_names`] order.
    pub fn truth_vector(&self) -> Result<Vec<f64>> {
        Ok(self.layout()?.reported(&self.truth))
    }

    fn run_one(&self, length: usize, replicate: usize) -> ReplicateRecord {
        let (alpha, eps) = self.families();
        let mut rng = substream(self.seed, &format!("replicate-T{length}"), replicate as u64);
        let result = simulate(&self.truth, length, 0, &mut rng)
            .and_then(|data| fit(&data, self.truth.variant(), alpha, eps, &self.options));
        match result {
            Ok(r) => ReplicateRecord {
                length,
                replicate,
                estimates: r.estimates,
                loglik: r.loglik,
                converged: r.converged,
                error: None,
            },
            Err(e) => ReplicateRecord {
                length,
                replicate,
                estimates: Vec::new(),
                loglik: f64::NAN,
                converged: false,
                error: Some(e.to_string()),
            },
        }
    }

    /// Per-parameter medians, IQRs and median absolute errors by length.
    pub fn summarize(&self, records: &[ReplicateRecord]) -> Result<Vec<ParamSummary>> {
        let names = self.param_names()?;
        let truth = self.truth_vector()?;
        let mut out = Vec::new();
        for &length in &self.lengths {
            let ok: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.length == length && r.error.is_none())
                .collect();
            for (k, name) in names.iter().enumerate() {
                let mut est: Vec<f64> = ok.iter().map(|r| r.estimates[k]).collect();
                let mut err: Vec<f64> = est.iter().map(|e| (e - truth[k]).abs()).collect();
                est.sort_by(f64::total_cmp);
                err.sort_by(f64::total_cmp);
                out.push(ParamSummary {
                    length,
                    param: name.clone(),
                    truth: truth[k],
                    median: quantile(&est, 0.5),
                    iqr: quantile(&est, 0.75) - quantile(&est, 0.25),
                    median_abs_error: quantile(&err, 0.5),
                    n_ok: ok.len(),
                });
            }
        }
        Ok(out)
    }
}

/// Runs every `(length, replicate)` cell in parallel. Each cell owns the
/// random substream `("replicate-T{length}", replicate)`, so the records do
/// not depend on the number of worker threads. Records come back ordered by
/// length (as listed) and then replicate.
pub fn run_replicates(study: &ReplicateStudy) -> Vec<ReplicateRecord> {
    let cells: Vec<(usize, usize)> = study
        .lengths
        .iter()
        .flat_map(|&len| (0..study.replicates).map(move |r| (len, r)))
        .collect();
    cells.par_iter().map(|&(len, r)| study.run_one(len, r)).collect()
}
