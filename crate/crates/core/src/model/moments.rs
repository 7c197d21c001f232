use serde::Serialize;

use crate::error::{Error, Result};

use super::params::Bdar1Params;

/// Means, cross-covariance matrices `Gamma(k)` and cross-correlation
/// matrices `rho(k)` of the stationary process for lags `0..=max_lag`.
///
/// `gamma[k][0][1]` is `Cov(Z_1t, Z_2,t-k)` and `gamma[k][1][0]` is
/// `Cov(Z_1,t-k, Z_2t)`; for `k > 0` they decay at rates `phi1` and `phi2`
/// respectively, so `Gamma(k)` is not symmetric in general.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossMoments {
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: Vec<[[f64; 2]; 2]>,
    pub rho: Vec<[[f64; 2]; 2]>,
}

impl CrossMoments {
    pub fn gamma(&self, lag: usize) -> [[f64; 2]; 2] {
        self.gamma[lag]
    }

    pub fn rho(&self, lag: usize) -> [[f64; 2]; 2] {
        self.rho[lag]
    }

    pub fn max_lag(&self) -> usize {
        self.gamma.len() - 1
    }
}

/// Cross moments with states valued by their indices `1..=d`.
pub fn cross_moments(params: &Bdar1Params, max_lag: usize) -> CrossMoments {
    let v1: Vec<f64> = (1..=params.d1()).map(|s| s as f64).collect();
    let v2: Vec<f64> = (1..=params.d2()).map(|s| s as f64).collect();
    cross_moments_with_values(params, max_lag, &v1, &v2).expect("index values match state counts")
}

/// Cross moments with explicit numeric values for the states of each series.
pub fn cross_moments_with_values(
    params: &Bdar1Params,
    max_lag: usize,
    values1: &[f64],
    values2: &[f64],
) -> Result<CrossMoments> {
    if values1.len() != params.d1() || values2.len() != params.d2() {
        return Err(Error::InvalidArgument(format!(
            "expected {} and {} state values, got {} and {}",
            params.d1(),
            params.d2(),
            values1.len(),
            values2.len()
        )));
    }
    let (mu1, var1) = params.marginal1().moments(values1);
    let (mu2, var2) = params.marginal2().moments(values2);

    let innov = params.innovation();
    let mut e12 = 0.0;
    for (i, x) in values1.iter().enumerate() {
        for (j, y) in values2.iter().enumerate() {
            e12 += innov.get(i, j) * x * y;
        }
    }

    let mech = params.mechanism();
    let (phi1, phi2, phi12) = (params.phi1(), params.phi2(), mech.phi12());
    let g12_0 = (1.0 - phi1 - phi2 + phi12) * (e12 - mu1 * mu2) / (1.0 - phi12);

    let mut gamma = Vec::with_capacity(max_lag + 1);
    gamma.push([[var1, g12_0], [g12_0, var2]]);
    for k in 1..=max_lag {
        let prev: [[f64; 2]; 2] = gamma[k - 1];
        gamma.push([
            [phi1 * prev[0][0], phi1 * prev[0][1]],
            [phi2 * prev[1][0], phi2 * prev[1][1]],
        ]);
    }

    let scale = [var1.sqrt(), var2.sqrt()];
    let rho = gamma
        .iter()
        .map(|g| {
            let mut r = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    r[a][b] = g[a][b] / (scale[a] * scale[b]);
                }
            }
            r
        })
        .collect();

    Ok(CrossMoments { mu1, mu2, gamma, rho })
}
