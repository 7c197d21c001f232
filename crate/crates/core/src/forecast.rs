//! h-step-ahead forecasting by Monte-Carlo simulation and by exact
//! propagation of the joint transition operator.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jointdiscrete::{argmax_first, CellSampler, ProbMatrix};
use crate::model::{Bdar1Params, TransitionKernel};
use crate::rng::substream;

/// Default number of simulated trajectories.
pub const DEFAULT_N_SIMS: usize = 10_000;

/// Trajectories per parallel work item.
const CHUNK: usize = 4096;

/// Predictive frequencies for steps `1..=horizon`.
///
/// Index `h - 1` of each vector refers to step `h`. Modal states are
/// 1-based, and ties go to the lowest state index (for pairs, the first
/// cell in row-major order). The joint mode need not combine the two
/// marginal modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub n_sims: usize,
    pub seed: u64,
    pub last_state: (usize, usize),
    pub marginal1: Vec<Vec<f64>>,
    pub marginal2: Vec<Vec<f64>>,
    pub joint: Vec<ProbMatrix>,
    pub modal1: Vec<usize>,
    pub modal2: Vec<usize>,
    pub modal_joint: Vec<(usize, usize)>,
}

fn check_request(kernel: &TransitionKernel, last_state: (usize, usize), horizon: usize) -> Result<()> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be at least 1".into()));
    }
    kernel.check_state(1, last_state.0)?;
    kernel.check_state(2, last_state.1)
}

/// Monte-Carlo forecast from `last_state` (1-based) over `horizon` steps.
///
/// Each trajectory draws the next pair jointly from the one-step
/// conditional pmf. Trajectory `k` uses the substream `("forecast", k)` of
/// `seed` and counts are aggregated as integers, so the result is identical
/// for any number of worker threads.
///
/// ```
/// use bdar::forecast::forecast;
/// use bdar::jointdiscrete::CategoricalMarginal;
/// use bdar::model::Bdar1Params;
///
/// let m = CategoricalMarginal::new(vec![0.3, 0.7])?;
/// let params = Bdar1Params::independent(0.8, 0.5, m.clone(), m)?;
/// let fc = forecast(&params, (1, 1), 3, 2000, 7)?;
/// assert_eq!(fc.modal1[0], 1);
/// assert_eq!(fc.marginal1.len(), 3);
/// # Ok::<(), bdar::Error>(())
/// ```
pub fn forecast(
    params: &Bdar1Params,
    last_state: (usize, usize),
    horizon: usize,
    n_sims: usize,
    seed: u64,
) -> Result<ForecastResult> {
    let kernel = params.kernel();
    check_request(&kernel, last_state, horizon)?;
    if n_sims == 0 {
        return Err(Error::InvalidArgument("n_sims must be at least 1".into()));
    }
    let (d1, d2) = (kernel.d1(), kernel.d2());
    let cells = d1 * d2;
    let samplers: Vec<CellSampler> = (0..cells)
        .map(|k| CellSampler::new(&kernel.conditional0(k / d2, k % d2)))
        .collect();
    let start = (last_state.0 - 1) * d2 + (last_state.1 - 1);

    let n_chunks = n_sims.div_ceil(CHUNK);
    let counts = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut counts = vec![0u64; horizon * cells];
            for traj in c * CHUNK..((c + 1) * CHUNK).min(n_sims) {
                let mut rng = substream(seed, "forecast", traj as u64);
                let mut state = start;
                for h in 0..horizon {
                    let (i, j) = samplers[state].sample(&mut rng);
                    state = i * d2 + j;
                    counts[h * cells + state] += 1;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; horizon * cells],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let n = n_sims as f64;
    let mut result = ForecastResult {
        horizon,
        n_sims,
        seed,
        last_state,
        marginal1: Vec::with_capacity(horizon),
        marginal2: Vec::with_capacity(horizon),
        joint: Vec::with_capacity(horizon),
        modal1: Vec::with_capacity(horizon),
        modal2: Vec::with_capacity(horizon),
        modal_joint: Vec::with_capacity(horizon),
    };
    for h in 0..horizon {
        let step = &counts[h * cells..(h + 1) * cells];
        let mut c1 = vec![0u64; d1];
        let mut c2 = vec![0u64; d2];
        for (k, &c) in step.iter().enumerate() {
            c1[k / d2] += c;
            c2[k % d2] += c;
        }
        let f1: Vec<f64> = c1.iter().map(|&c| c as f64 / n).collect();
        let f2: Vec<f64> = c2.iter().map(|&c| c as f64 / n).collect();
        let joint = ProbMatrix::from_cells_unchecked(d1, d2, step.iter().map(|&c| c as f64 / n).collect());
        let (a, b) = joint.argmax();
        result.modal1.push(argmax_first(&f1) + 1);
        result.modal2.push(argmax_first(&f2) + 1);
        result.modal_joint.push((a + 1, b + 1));
        result.marginal1.push(f1);
        result.marginal2.push(f2);
        result.joint.push(joint);
    }
    Ok(result)
}

/// Exact joint pmfs of `Z_{t+1}, .., Z_{t+horizon}` given `Z_t = last_state`,
/// by repeated application of the `(d1 d2) x (d1 d2)` transition matrix.
pub fn exact_forecast_pmf(params: &Bdar1Params, last_state: (usize, usize), horizon: usize) -> Result<Vec<ProbMatrix>> {
    let kernel = params.kernel();
    check_request(&kernel, last_state, horizon)?;
    let (d1, d2) = (kernel.d1(), kernel.d2());
    let trans = kernel.transition_matrix()?;
    let n = d1 * d2;
    let mut dist = vec![0.0; n];
    dist[(last_state.0 - 1) * d2 + (last_state.1 - 1)] = 1.0;
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let mut next = vec![0.0; n];
        for (src, &w) in dist.iter().enumerate() {
            if w != 0.0 {
                for (dst, &p) in trans[src].iter().enumerate() {
                    next[dst] += w * p;
                }
            }
        }
        dist = next;
        out.push(ProbMatrix::from_cells_unchecked(d1, d2, dist.clone()));
    }
    Ok(out)
}
