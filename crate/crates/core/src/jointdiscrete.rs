//! Joint pmfs of two discrete variables built from their marginals and a
//! copula: the 2x2 Bernoulli mechanism table and the `d1 x d2` innovation
//! table.
//!
//! Cells are addressed with zero-based `(row, col)` coordinates. Row `i`
//! corresponds to state `i + 1` of the first variable.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::copula::{rectangle_mass_raw, CopulaSpec};
use crate::error::{Error, Result};

/// Tolerance for "sums to one" checks on user-supplied probabilities.
pub const SUM_TOLERANCE: f64 = 1e-10;

/// Probability vector over an ordered finite state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CategoricalMarginal {
    probs: Vec<f64>,
}

impl TryFrom<Vec<f64>> for CategoricalMarginal {
    type Error = Error;

    fn try_from(probs: Vec<f64>) -> Result<Self> {
        CategoricalMarginal::new(probs)
    }
}

impl From<CategoricalMarginal> for Vec<f64> {
    fn from(m: CategoricalMarginal) -> Self {
        m.probs
    }
}

impl CategoricalMarginal {
    /// Every probability must lie in `(0, 1]`, there must be at least two
    /// states and the total must be 1 within [`SUM_TOLERANCE`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidMarginal(format!(
                "need at least 2 states, got {}",
                probs.len()
            )));
        }
        if let Some((k, p)) = probs.iter().enumerate().find(|(_, &p)| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::InvalidMarginal(format!(
                "probability of state {} is {p}; every state needs probability in (0, 1]",
                k + 1
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidMarginal(format!("probabilities sum to {total}")));
        }
        Ok(Self { probs })
    }

    /// Uniform distribution over `d` states.
    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(vec![1.0 / d as f64; d.max(1)])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn states(&self) -> usize {
        self.probs.len()
    }

    /// Probability of the 1-based `state`.
    pub fn prob(&self, state: usize) -> f64 {
        self.probs[state - 1]
    }

    /// `[F(s_0), F(s_1), ..., F(s_d)]` with `F(s_0) = 0` and the last entry
    /// forced to exactly 1.
    pub fn cdf(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.probs.len() + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for p in &self.probs {
            acc += p;
            out.push(acc.min(1.0));
        }
        *out.last_mut().unwrap() = 1.0;
        out
    }

    /// Mean and variance when state `k` takes the numeric value `values[k-1]`.
    pub fn moments(&self, values: &[f64]) -> (f64, f64) {
        let mean: f64 = self.probs.iter().zip(values).map(|(p, x)| p * x).sum();
        let var = self
            .probs
            .iter()
            .zip(values)
            .map(|(p, x)| p * (x - mean) * (x - mean))
            .sum();
        (mean, var)
    }
}

/// Dense row-major probability matrix over `rows x cols` joint states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbMatrix {
    #[serde(rename = "states1")]
    rows: usize,
    #[serde(rename = "states2")]
    cols: usize,
    cells: Vec<f64>,
}

impl ProbMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cells: vec![0.0; rows * cols],
        }
    }

    /// Validates shape, non-negativity and unit total.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(Error::InvalidTable(format!(
                "{} cells do not fill a {rows}x{cols} table",
                cells.len()
            )));
        }
        if cells.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidTable("negative or NaN cell".into()));
        }
        let total: f64 = cells.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidTable(format!("cells sum to {total}")));
        }
        Ok(Self { rows, cols, cells })
    }

    pub(crate) fn from_cells_unchecked(rows: usize, cols: usize, cells: Vec<f64>) -> Self {
        debug_assert_eq!(cells.len(), rows * cols);
        Self { rows, cols, cells }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// Cell at zero-based `(row, col)`.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.cells[row * self.cols + col]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.cells.chunks(self.cols).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.cells.chunks(self.cols) {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.cells.iter().sum()
    }

    pub fn max_abs_diff(&self, other: &ProbMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Zero-based coordinates of the largest cell; ties go to the first cell
    /// in row-major order.
    pub fn argmax(&self) -> (usize, usize) {
        let k = argmax_first(&self.cells);
        (k / self.cols, k % self.cols)
    }

    /// Outer product of two marginals.
    pub fn outer(m1: &CategoricalMarginal, m2: &CategoricalMarginal) -> Self {
        let cells = m1
            .probs()
            .iter()
            .flat_map(|a| m2.probs().iter().map(move |b| a * b))
            .collect();
        Self::from_cells_unchecked(m1.states(), m2.states(), cells)
    }
}

/// Index of the largest entry; ties resolve to the lowest index.
pub fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Any table that can be sampled cell-wise.
pub trait JointTable {
    fn matrix(&self) -> &ProbMatrix;
}

impl JointTable for ProbMatrix {
    fn matrix(&self) -> &ProbMatrix {
        self
    }
}

/// Joint pmf of the two Bernoulli selection mechanisms.
///
/// `pi[a1][a2] = P(alpha_1 = a1, alpha_2 = a2)`; `pi[1][1]` is the cross
/// moment `phi_12 = E(alpha_1 alpha_2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismTable {
    pi: [[f64; 2]; 2],
    phi1: f64,
    phi2: f64,
    matrix: ProbMatrix,
}

impl MechanismTable {
    fn from_pi(pi: [[f64; 2]; 2], phi1: f64, phi2: f64) -> Self {
        let matrix = ProbMatrix::from_cells_unchecked(2, 2, vec![pi[0][0], pi[0][1], pi[1][0], pi[1][1]]);
        Self { pi, phi1, phi2, matrix }
    }

    /// A single mechanism shared by both series: `pi11 = phi`, `pi00 = 1 - phi`.
    pub fn comonotone(phi: f64) -> Result<Self> {
        check_phi(phi)?;
        Ok(Self::from_pi([[1.0 - phi, 0.0], [0.0, phi]], phi, phi))
    }

    pub fn pi(&self, a1: usize, a2: usize) -> f64 {
        self.pi[a1][a2]
    }

    pub fn pi00(&self) -> f64 {
        self.pi[0][0]
    }

    pub fn pi01(&self) -> f64 {
        self.pi[0][1]
    }

    pub fn pi10(&self) -> f64 {
        self.pi[1][0]
    }

    pub fn pi11(&self) -> f64 {
        self.pi[1][1]
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    /// `E(alpha_1 alpha_2)`.
    pub fn phi12(&self) -> f64 {
        self.pi[1][1]
    }
}

impl JointTable for MechanismTable {
    fn matrix(&self) -> &ProbMatrix {
        &self.matrix
    }
}

fn check_phi(phi: f64) -> Result<()> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::Domain(format!(
            "selection probability must lie in [0, 1), got {phi}"
        )));
    }
    Ok(())
}

/// Builds the 2x2 mechanism table from Bernoulli margins and a copula.
///
/// With `F(0) = 1 - phi` and `F(1) = 1` the rectangle construction gives
/// `pi00 = C(1 - phi1, 1 - phi2)` and the other cells by differences.
pub fn bernoulli_joint(phi1: f64, phi2: f64, spec: &CopulaSpec) -> Result<MechanismTable> {
    check_phi(phi1)?;
    check_phi(phi2)?;
    let (u, v) = (1.0 - phi1, 1.0 - phi2);
    let pi00 = rectangle_mass_raw(spec, 0.0, u, 0.0, v).max(0.0);
    let pi10 = rectangle_mass_raw(spec, u, 1.0, 0.0, v).max(0.0);
    let pi01 = rectangle_mass_raw(spec, 0.0, u, v, 1.0).max(0.0);
    let pi11 = rectangle_mass_raw(spec, u, 1.0, v, 1.0).max(0.0);
    Ok(MechanismTable::from_pi([[pi00, pi01], [pi10, pi11]], phi1, phi2))
}

/// Joint innovation pmf `p_eps_ij` built from two marginals and a copula.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InnovationTable {
    #[serde(flatten)]
    p: ProbMatrix,
    #[serde(skip)]
    m1: CategoricalMarginal,
    #[serde(skip)]
    m2: CategoricalMarginal,
    #[serde(skip)]
    max_clamp: f64,
}

impl InnovationTable {
    pub fn matrix(&self) -> &ProbMatrix {
        &self.p
    }

    /// Cell at zero-based coordinates.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.p.get(row, col)
    }

    pub fn marginal1(&self) -> &CategoricalMarginal {
        &self.m1
    }

    pub fn marginal2(&self) -> &CategoricalMarginal {
        &self.m2
    }

    /// Largest magnitude of a negative rectangle mass that was clamped to 0.
    pub fn max_clamp(&self) -> f64 {
        self.max_clamp
    }
}

impl JointTable for InnovationTable {
    fn matrix(&self) -> &ProbMatrix {
        &self.p
    }
}

/// Rectangle construction of the innovation table:
/// `p_ij = C(F1(i), F2(j)) - C(F1(i-1), F2(j)) - C(F1(i), F2(j-1)) + C(F1(i-1), F2(j-1))`.
pub fn innovation_joint(m1: &CategoricalMarginal, m2: &CategoricalMarginal, spec: &CopulaSpec) -> InnovationTable {
    let f1 = m1.cdf();
    let f2 = m2.cdf();
    let (d1, d2) = (m1.states(), m2.states());

    // Copula values on the breakpoint grid, then differences.
    let grid: Vec<f64> = f1
        .iter()
        .flat_map(|&u| f2.iter().map(move |&v| spec.cdf_unchecked(u, v)))
        .collect();
    let at = |i: usize, j: usize| grid[i * (d2 + 1) + j];

    let mut max_clamp = 0.0f64;
    let mut cells = Vec::with_capacity(d1 * d2);
    for i in 1..=d1 {
        for j in 1..=d2 {
            let mass = at(i, j) - at(i - 1, j) - at(i, j - 1) + at(i - 1, j - 1);
            if mass < 0.0 {
                max_clamp = max_clamp.max(-mass);
            }
            cells.push(mass.max(0.0));
        }
    }
    InnovationTable {
        p: ProbMatrix::from_cells_unchecked(d1, d2, cells),
        m1: m1.clone(),
        m2: m2.clone(),
        max_clamp,
    }
}

/// Draws one cell by inverse-CDF over the row-major flattened table.
///
/// Returns zero-based `(row, col)`.
pub fn sample_joint<T: JointTable + ?Sized, R: Rng + ?Sized>(table: &T, rng: &mut R) -> (usize, usize) {
    let m = table.matrix();
    let k = inverse_cdf(m.cells(), rng.gen::<f64>());
    (k / m.cols(), k % m.cols())
}

/// First index whose running total exceeds `u`; mass lost to rounding at
/// the end falls on the last positive cell.
fn inverse_cdf(cells: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &p) in cells.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = k;
            if u < acc {
                return k;
            }
        }
    }
    last_positive
}

/// Precomputed cumulative table for repeated inverse-CDF draws.
///
/// Produces exactly the same draws as [`sample_joint`] for the same uniform.
#[derive(Debug, Clone)]
pub struct CellSampler {
    cumulative: Vec<f64>,
    cols: usize,
}

impl CellSampler {
    pub fn new(m: &ProbMatrix) -> Self {
        Self::from_cells(m.cells(), m.cols())
    }

    pub(crate) fn from_cells(cells: &[f64], cols: usize) -> Self {
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = cells
            .iter()
            .map(|&p| {
                if p > 0.0 {
                    acc += p;
                }
                acc
            })
            .collect();
        // Cells after the last positive one must never be selected.
        if let Some(last) = cells.iter().rposition(|&p| p > 0.0) {
            for c in &mut cumulative[last..] {
                *c = f64::INFINITY;
            }
        }
        Self { cumulative, cols }
    }

    /// Zero-based flat index for the uniform `u`.
    pub fn index(&self, u: f64) -> usize {
        self.cumulative.partition_point(|&c| c <= u)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        let k = self.index(rng.gen::<f64>());
        (k / self.cols, k % self.cols)
    }
}
