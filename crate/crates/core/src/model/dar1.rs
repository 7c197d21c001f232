//! The univariate DAR(1) process `Z_t = a_t Z_{t-1} + (1 - a_t) eps_t`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::jointdiscrete::{CategoricalMarginal, CellSampler};

fn check_phi(phi: f64) -> Result<()> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::InvalidParams(format!("phi = {phi} outside [0, 1)")));
    }
    Ok(())
}

/// `P(Z_t = i | Z_{t-1} = prev) = (1 - phi) p_i + phi 1{i = prev}`, for
/// 1-based `prev`. Entry `k` of the result is the probability of state `k + 1`.
pub fn dar1_conditional_pmf(phi: f64, marginal: &CategoricalMarginal, prev: usize) -> Result<Vec<f64>> {
    check_phi(phi)?;
    let d = marginal.states();
    if prev == 0 || prev > d {
        return Err(Error::StateOutOfRange {
            series: 1,
            state: prev,
            states: d,
        });
    }
    Ok(marginal
        .probs()
        .iter()
        .enumerate()
        .map(|(k, p)| (1.0 - phi) * p + if k + 1 == prev { phi } else { 0.0 })
        .collect())
}

/// Simulates a stationary DAR(1) path of 1-based states.
pub fn dar1_simulate<R: Rng + ?Sized>(
    phi: f64,
    marginal: &CategoricalMarginal,
    length: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_phi(phi)?;
    if length < 2 {
        return Err(Error::InvalidArgument(format!(
            "path length must be at least 2, got {length}"
        )));
    }
    let innov = CellSampler::from_cells(marginal.probs(), marginal.states());
    let mut state = innov.index(rng.gen::<f64>());
    let mut out = Vec::with_capacity(length);
    out.push(state + 1);
    for _ in 1..length {
        let keep = rng.gen::<f64>() < phi;
        let fresh = innov.index(rng.gen::<f64>());
        if !keep {
            state = fresh;
        }
        out.push(state + 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(p: &[f64]) -> CategoricalMarginal {
        CategoricalMarginal::new(p.to_vec()).unwrap()
    }

    #[test]
    fn conditional_examples() {
        let marg = m(&[0.2, 0.8]);
        assert_eq!(dar1_conditional_pmf(0.0, &marg, 2).unwrap(), vec![0.2, 0.8]);
        let c = dar1_conditional_pmf(0.5, &marg, 1).unwrap();
        assert!((c[0] - 0.6).abs() < 1e-15 && (c[1] - 0.4).abs() < 1e-15);

        let table1 = m(&[0.143, 0.164, 0.270, 0.423]);
        let c = dar1_conditional_pmf(0.857, &table1, 3).unwrap();
        assert!((c[2] - 0.89561).abs() < 1e-12);
        assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(dar1_conditional_pmf(0.5, &marg, 3).is_err());
        assert!(dar1_conditional_pmf(1.0, &marg, 1).is_err());
    }

    #[test]
    fn simulated_path_statistics() {
        let marg = m(&[0.1, 0.2, 0.3, 0.4]);
        let phi = 0.6;
        let z = dar1_simulate(phi, &marg, 100_000, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let n = z.len() as f64;
        for s in 1..=4 {
            let freq = z.iter().filter(|&&x| x == s).count() as f64 / n;
            assert!((freq - marg.prob(s)).abs() < 0.01, "state {s}: {freq}");
        }
        // Lag-1 autocorrelation of a DAR(1) equals phi.
        let x: Vec<f64> = z.iter().map(|&s| s as f64).collect();
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let cov = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum::<f64>() / n;
        assert!((cov / var - phi).abs() < 0.03, "acf {}", cov / var);
    }

    #[test]
    fn no_persistence_is_iid() {
        let marg = m(&[0.5, 0.5]);
        let z = dar1_simulate(0.0, &marg, 50_000, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let same = z.windows(2).filter(|w| w[0] == w[1]).count() as f64 / (z.len() - 1) as f64;
        assert!((same - 0.5).abs() < 0.01);
    }
}
