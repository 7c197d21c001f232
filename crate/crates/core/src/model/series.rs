use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two aligned ordinal series with states coded `1..=d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateOrdinalSeries {
    z1: Vec<usize>,
    z2: Vec<usize>,
    d1: usize,
    d2: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<(Vec<String>, Vec<String>)>,
}

impl BivariateOrdinalSeries {
    pub fn new(z1: Vec<usize>, z2: Vec<usize>, d1: usize, d2: usize) -> Result<Self> {
        if z1.len() != z2.len() {
            return Err(Error::InvalidSeries(format!(
                "series lengths differ: {} vs {}",
                z1.len(),
                z2.len()
            )));
        }
        if z1.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "need at least 2 time points, got {}",
                z1.len()
            )));
        }
        if d1 < 2 || d2 < 2 {
            return Err(Error::InvalidSeries("each series needs at least 2 states".into()));
        }
        for (series, z, d) in [(1, &z1, d1), (2, &z2, d2)] {
            if let Some(&state) = z.iter().find(|&&s| s == 0 || s > d) {
                return Err(Error::StateOutOfRange {
                    series,
                    state,
                    states: d,
                });
            }
        }
        Ok(Self {
            z1,
            z2,
            d1,
            d2,
            labels: None,
        })
    }

    /// State counts taken from the largest observed state of each series.
    pub fn from_observed(z1: Vec<usize>, z2: Vec<usize>) -> Result<Self> {
        let d1 = z1.iter().copied().max().unwrap_or(0);
        let d2 = z2.iter().copied().max().unwrap_or(0);
        Self::new(z1, z2, d1, d2)
    }

    /// Attaches display labels for the states of each series.
    pub fn with_labels(mut self, labels1: Vec<String>, labels2: Vec<String>) -> Result<Self> {
        if labels1.len() != self.d1 || labels2.len() != self.d2 {
            return Err(Error::InvalidSeries("one label per state is required".into()));
        }
        self.labels = Some((labels1, labels2));
        Ok(self)
    }

    pub fn z1(&self) -> &[usize] {
        &self.z1
    }

    pub fn z2(&self) -> &[usize] {
        &self.z2
    }

    pub fn d1(&self) -> usize {
        self.d1
    }

    pub fn d2(&self) -> usize {
        self.d2
    }

    pub fn labels(&self) -> Option<&(Vec<String>, Vec<String>)> {
        self.labels.as_ref()
    }

    pub fn len(&self) -> usize {
        self.z1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z1.is_empty()
    }

    /// The pair observed at zero-based time `t`.
    pub fn pair(&self, t: usize) -> (usize, usize) {
        (self.z1[t], self.z2[t])
    }

    /// Occurrence counts of each state, index `k` for state `k + 1`.
    pub fn state_counts(&self) -> (Vec<usize>, Vec<usize>) {
        let mut c1 = vec![0; self.d1];
        let mut c2 = vec![0; self.d2];
        for (&a, &b) in self.z1.iter().zip(&self.z2) {
            c1[a - 1] += 1;
            c2[b - 1] += 1;
        }
        (c1, c2)
    }

    /// First state, if any, that never occurs: `(series, state)`.
    pub fn first_unobserved_state(&self) -> Option<(usize, usize)> {
        let (c1, c2) = self.state_counts();
        c1.iter()
            .position(|&c| c == 0)
            .map(|k| (1, k + 1))
            .or_else(|| c2.iter().position(|&c| c == 0).map(|k| (2, k + 1)))
    }

    /// The first `n` observations.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        let mut out = Self::new(
            self.z1[..n.min(self.len())].to_vec(),
            self.z2[..n.min(self.len())].to_vec(),
            self.d1,
            self.d2,
        )?;
        out.labels = self.labels.clone();
        Ok(out)
    }
}
