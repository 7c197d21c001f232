use rand::Rng;

use crate::error::{Error, Result};
use crate::jointdiscrete::{CellSampler, JointTable};

use super::params::Bdar1Params;
use super::series::BivariateOrdinalSeries;

/// Where a simulated path starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialState {
    /// A draw from the stationary joint pmf; no burn-in is needed.
    #[default]
    Stationary,
    /// A fixed 1-based pair; a burn-in of about 100 steps is advisable.
    Fixed(usize, usize),
}

/// Simulates `length` observations of the BDAR(1) recursion
/// `Z_t = alpha_t . Z_{t-1} + (1 - alpha_t) . eps_t`, starting from a
/// stationary draw and discarding `burn_in` steps.
pub fn simulate<R: Rng + ?Sized>(
    params: &Bdar1Params,
    length: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<BivariateOrdinalSeries> {
    simulate_from(params, length, burn_in, InitialState::Stationary, rng)
}

/// [`simulate`] with an explicit initial state.
///
/// Each step draws the mechanism pair and then the innovation pair, each
/// with one uniform, so a seed fixes the whole path.
pub fn simulate_from<R: Rng + ?Sized>(
    params: &Bdar1Params,
    length: usize,
    burn_in: usize,
    initial: InitialState,
    rng: &mut R,
) -> Result<BivariateOrdinalSeries> {
    if length < 2 {
        return Err(Error::InvalidArgument(format!(
            "path length must be at least 2, got {length}"
        )));
    }
    let kernel = params.kernel();
    let mech = CellSampler::new(kernel.mechanism().matrix());
    let innov = CellSampler::new(kernel.innovation().matrix());

    let (mut s1, mut s2) = match initial {
        InitialState::Stationary => CellSampler::new(&kernel.stationary()?).sample(rng),
        InitialState::Fixed(a, b) => {
            kernel.check_state(1, a)?;
            kernel.check_state(2, b)?;
            (a - 1, b - 1)
        }
    };

    let mut z1 = Vec::with_capacity(length);
    let mut z2 = Vec::with_capacity(length);
    for t in 0..burn_in + length {
        if t > 0 {
            let (a1, a2) = mech.sample(rng);
            let (e1, e2) = innov.sample(rng);
            if a1 == 0 {
                s1 = e1;
            }
            if a2 == 0 {
                s2 = e2;
            }
        }
        if t >= burn_in {
            z1.push(s1 + 1);
            z2.push(s2 + 1);
        }
    }
    BivariateOrdinalSeries::new(z1, z2, params.d1(), params.d2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::CopulaSpec;
    use crate::jointdiscrete::CategoricalMarginal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(p: &[f64]) -> CategoricalMarginal {
        CategoricalMarginal::new(p.to_vec()).unwrap()
    }

    #[test]
    fn deterministic_under_seed() {
        let g = CopulaSpec::gumbel(2.0).unwrap();
        let p = Bdar1Params::full(0.4, 0.25, g, g, m(&[0.15, 0.6, 0.25]), m(&[0.2, 0.3, 0.5])).unwrap();
        let a = simulate(&p, 500, 0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = simulate(&p, 500, 0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let c = simulate(&p, 500, 0, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn fixed_start_and_burn_in() {
        let p = Bdar1Params::independent(0.5, 0.5, m(&[0.5, 0.5]), m(&[0.5, 0.5])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = simulate_from(&p, 10, 0, InitialState::Fixed(2, 1), &mut rng).unwrap();
        assert_eq!(s.pair(0), (2, 1));
        let s = simulate_from(&p, 10, 100, InitialState::Fixed(2, 1), &mut rng).unwrap();
        assert_eq!(s.len(), 10);
        assert!(simulate_from(&p, 10, 0, InitialState::Fixed(3, 1), &mut rng).is_err());
        assert!(simulate(&p, 1, 0, &mut rng).is_err());
    }

    #[test]
    fn common_mechanism_run_lengths() {
        // A shared mechanism with phi = 0.99 holds the pair for a geometric
        // number of steps with mean 1/(1-phi) = 100. Innovations that happen to
        // repeat the current pair lengthen runs by a factor 1/(1 - q); spreading
        // mass over 16 cells keeps q below 0.1.
        let u = m(&[0.25; 4]);
        let p = Bdar1Params::common_mechanism(0.99, CopulaSpec::frank(2.0).unwrap(), u.clone(), u).unwrap();
        let s = simulate(&p, 100_000, 0, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let mut runs = Vec::new();
        let mut len = 1usize;
        for t in 1..s.len() {
            if s.pair(t) == s.pair(t - 1) {
                len += 1;
            } else {
                runs.push(len);
                len = 1;
            }
        }
        let mean = runs.iter().sum::<usize>() as f64 / runs.len() as f64;
        assert!((mean - 100.0).abs() / 100.0 < 0.2, "mean run length {mean}");
    }
}
