//! Exact one-step and stationary pmfs of the BDAR(1) process.

use crate::error::{Error, Result};
use crate::jointdiscrete::{InnovationTable, MechanismTable, ProbMatrix};

use super::params::Bdar1Params;

/// Largest joint state space handled by dense `(d1 d2) x (d1 d2)` operators.
pub const MAX_DENSE_STATES: usize = 10_000;

/// One-step transition probabilities with the mechanism and innovation
/// tables evaluated once.
///
/// ```text
/// P(i, j | s, l) = pi11 1{(i,j)=(s,l)} + pi00 p_ij + pi10 1{i=s} p2_j + pi01 p1_i 1{j=l}
/// ```
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    mechanism: MechanismTable,
    innovation: InnovationTable,
    p1: Vec<f64>,
    p2: Vec<f64>,
}

impl TransitionKernel {
    pub fn new(mechanism: MechanismTable, innovation: InnovationTable) -> Self {
        let p1 = innovation.marginal1().probs().to_vec();
        let p2 = innovation.marginal2().probs().to_vec();
        Self {
            mechanism,
            innovation,
            p1,
            p2,
        }
    }

    pub fn mechanism(&self) -> &MechanismTable {
        &self.mechanism
    }

    pub fn innovation(&self) -> &InnovationTable {
        &self.innovation
    }

    pub fn d1(&self) -> usize {
        self.p1.len()
    }

    pub fn d2(&self) -> usize {
        self.p2.len()
    }

    /// Transition probability with zero-based states: from `(s, l)` to `(i, j)`.
    #[inline]
    pub fn prob0(&self, s: usize, l: usize, i: usize, j: usize) -> f64 {
        let m = &self.mechanism;
        let mut p = m.pi00() * self.innovation.get(i, j);
        if i == s {
            p += m.pi10() * self.p2[j];
        }
        if j == l {
            p += m.pi01() * self.p1[i];
        }
        if i == s && j == l {
            p += m.pi11();
        }
        p
    }

    /// Conditional pmf of the next pair given 1-based previous states.
    pub fn conditional(&self, prev1: usize, prev2: usize) -> Result<ProbMatrix> {
        self.check_state(1, prev1)?;
        self.check_state(2, prev2)?;
        Ok(self.conditional0(prev1 - 1, prev2 - 1))
    }

    pub(crate) fn conditional0(&self, s: usize, l: usize) -> ProbMatrix {
        let (d1, d2) = (self.d1(), self.d2());
        let mut cells = Vec::with_capacity(d1 * d2);
        for i in 0..d1 {
            for j in 0..d2 {
                cells.push(self.prob0(s, l, i, j));
            }
        }
        ProbMatrix::from_cells_unchecked(d1, d2, cells)
    }

    pub(crate) fn check_state(&self, series: usize, state: usize) -> Result<()> {
        let states = if series == 1 { self.d1() } else { self.d2() };
        if state == 0 || state > states {
            return Err(Error::StateOutOfRange { series, state, states });
        }
        Ok(())
    }

    /// Stationary joint pmf:
    /// `p_ij = ((pi10 + pi01) p1_i p2_j + pi00 p_eps_ij) / (1 - pi11)`.
    pub fn stationary(&self) -> Result<ProbMatrix> {
        let m = &self.mechanism;
        let denom = 1.0 - m.pi11();
        if denom <= 1e-14 {
            return Err(Error::DegenerateMechanism(m.pi11()));
        }
        let cross = m.pi10() + m.pi01();
        let (d1, d2) = (self.d1(), self.d2());
        let mut cells = Vec::with_capacity(d1 * d2);
        for i in 0..d1 {
            for j in 0..d2 {
                cells.push((cross * self.p1[i] * self.p2[j] + m.pi00() * self.innovation.get(i, j)) / denom);
            }
        }
        Ok(ProbMatrix::from_cells_unchecked(d1, d2, cells))
    }

    /// Dense transition matrix over flattened joint states; row `s * d2 + l`
    /// holds the conditional pmf given zero-based `(s, l)`.
    pub fn transition_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let n = self.d1() * self.d2();
        if n > MAX_DENSE_STATES {
            return Err(Error::StateSpaceTooLarge(n));
        }
        Ok((0..n)
            .map(|k| self.conditional0(k / self.d2(), k % self.d2()).cells().to_vec())
            .collect())
    }
}

/// `P(Z_t = (i, j) | Z_{t-1} = (prev1, prev2))` as a `d1 x d2` matrix.
///
/// `prev1` and `prev2` are 1-based states; the returned matrix is indexed
/// from zero.
pub fn joint_conditional_pmf(params: &Bdar1Params, prev1: usize, prev2: usize) -> Result<ProbMatrix> {
    params.kernel().conditional(prev1, prev2)
}

/// Time-invariant joint distribution of `(Z_1t, Z_2t)`.
pub fn stationary_joint_pmf(params: &Bdar1Params) -> Result<ProbMatrix> {
    params.kernel().stationary()
}
