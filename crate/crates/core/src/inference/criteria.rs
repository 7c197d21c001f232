use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

use super::fit::FitReport;

/// `(AIC, BIC)` for a conditional log-likelihood over `t_len` observations.
///
/// The likelihood has `t_len - 1` terms, and that count is the BIC sample
/// size: `bic = -2 loglik + n_params ln(t_len - 1)`.
pub fn information_criteria(loglik: f64, n_params: usize, t_len: usize) -> (f64, f64) {
    let k = n_params as f64;
    let n = t_len.saturating_sub(1).max(1) as f64;
    (-2.0 * loglik + 2.0 * k, -2.0 * loglik + k * n.ln())
}

/// Upper tail of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if df == 0 || x <= 0.0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).map(|d| d.sf(x)).unwrap_or(f64::NAN)
}

/// Likelihood-ratio test of a nested model against a larger one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LrtResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// LRT from raw log-likelihoods. Small negative statistics from optimizer
/// noise (above `-1e-8`) are clamped to zero.
pub fn lrt_from_logliks(loglik_full: f64, loglik_nested: f64, df: usize) -> Result<LrtResult> {
    if df == 0 {
        return Err(Error::InvalidArgument(
            "LRT needs a positive difference in parameter counts".into(),
        ));
    }
    let raw = 2.0 * (loglik_full - loglik_nested);
    if raw < -1e-8 {
        return Err(Error::InvalidArgument(format!(
            "nested model fits better than the full model (statistic {raw:.3e}); the fit of the full model has not converged"
        )));
    }
    let statistic = raw.max(0.0);
    Ok(LrtResult {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    })
}

/// LRT between two fitted reports; the reference distribution is a central
/// chi-square with `df = full.n_params - nested.n_params`.
///
/// Only parameter counts are validated. Testing a copula parameter at its
/// independence value puts the null on the boundary, where the chi-square
/// reference is conservative.
pub fn likelihood_ratio_test(full: &FitReport, nested: &FitReport) -> Result<LrtResult> {
    if nested.n_params >= full.n_params {
        return Err(Error::InvalidArgument(format!(
            "nested model has {} parameters, full model {}",
            nested.n_params, full.n_params
        )));
    }
    if !nested.variant().is_nested_in(full.variant()) {
        return Err(Error::InvalidArgument(format!(
            "{} is not nested in {}",
            nested.variant(),
            full.variant()
        )));
    }
    lrt_from_logliks(full.loglik, nested.loglik, full.n_params - nested.n_params)
}
