use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::jointdiscrete::CategoricalMarginal;
use crate::model::{dar1_conditional_pmf, Bdar1Params, BivariateOrdinalSeries, TransitionKernel};

/// Probabilities below this are treated as impossible observations.
pub const MIN_PROB: f64 = 1e-300;

/// Sufficient statistics for the conditional likelihood: how often each
/// `(previous pair, next pair)` transition occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCounts {
    d1: usize,
    d2: usize,
    /// Zero-based `(s, l, i, j)`, count and first (1-based) time of occurrence.
    entries: Vec<([usize; 4], u64, usize)>,
    n_terms: usize,
}

impl TransitionCounts {
    pub fn from_series(data: &BivariateOrdinalSeries) -> Self {
        let mut map: BTreeMap<[usize; 4], (u64, usize)> = BTreeMap::new();
        for t in 1..data.len() {
            let (s, l) = data.pair(t - 1);
            let (i, j) = data.pair(t);
            let e = map.entry([s - 1, l - 1, i - 1, j - 1]).or_insert((0, t + 1));
            e.0 += 1;
        }
        Self {
            d1: data.d1(),
            d2: data.d2(),
            entries: map.into_iter().map(|(k, (c, t))| (k, c, t)).collect(),
            n_terms: data.len() - 1,
        }
    }

    /// Number of conditional terms, `T - 1`.
    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// Log-likelihood under a precomputed kernel.
    pub fn loglik(&self, kernel: &TransitionKernel) -> Result<f64> {
        if kernel.d1() < self.d1 || kernel.d2() < self.d2 {
            return Err(Error::InvalidArgument(format!(
                "data has {}x{} states but the model only {}x{}",
                self.d1,
                self.d2,
                kernel.d1(),
                kernel.d2()
            )));
        }
        let mut total = 0.0;
        for &([s, l, i, j], count, t) in &self.entries {
            let p = kernel.prob0(s, l, i, j);
            if !(p >= MIN_PROB) {
                return Err(Error::ZeroProbability { t, prob: p });
            }
            total += count as f64 * p.ln();
        }
        Ok(total)
    }
}

/// `l(theta) = sum_{t=2}^T log P(Z_t = z_t | Z_{t-1} = z_{t-1})`.
pub fn conditional_loglik(params: &Bdar1Params, data: &BivariateOrdinalSeries) -> Result<f64> {
    TransitionCounts::from_series(data).loglik(&params.kernel())
}

/// Conditional log-likelihood of a univariate DAR(1) path of 1-based states.
pub fn dar1_conditional_loglik(phi: f64, marginal: &CategoricalMarginal, z: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for t in 1..z.len() {
        let p = dar1_conditional_pmf(phi, marginal, z[t - 1])?;
        let prob = *p.get(z[t].wrapping_sub(1)).ok_or(Error::StateOutOfRange {
            series: 1,
            state: z[t],
            states: marginal.states(),
        })?;
        if !(prob >= MIN_PROB) {
            return Err(Error::ZeroProbability { t: t + 1, prob });
        }
        total += prob.ln();
    }
    Ok(total)
}
