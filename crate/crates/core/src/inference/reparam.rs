//! Maps between the constrained parameter space and an unconstrained
//! vector for optimization.
//!
//! | parameter            | constrained        | unconstrained `eta`                 |
//! |----------------------|--------------------|-------------------------------------|
//! | marginal `p_1..p_d`  | open simplex       | additive log-ratios `ln(p_k / p_d)` |
//! | `phi`                | `[0, PHI_MAX)`     | `logit(phi / PHI_MAX)`              |
//! | Gumbel `delta`       | `[1, inf)`         | `ln(delta - 1)`                     |
//! | Frank `delta`        | real               | `delta`                             |
//!
//! The unconstrained vector and the reported estimate vector share one
//! ordering: `p1_1..p1_{d1-1}, p2_1..p2_{d2-1}, phi1, phi2, delta_eps,
//! delta_alpha`, with absent entries skipped.

use crate::copula::{CopulaFamily, CopulaSpec};
use crate::error::{Error, Result};
use crate::jointdiscrete::CategoricalMarginal;
use crate::model::{Bdar1Params, Variant};

/// Upper end of the `phi` range used during estimation.
pub const PHI_MAX: f64 = 1.0 - 1e-6;

/// Layout of the free parameters of one variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParamLayout {
    pub variant: Variant,
    pub alpha_family: CopulaFamily,
    pub eps_family: CopulaFamily,
    pub d1: usize,
    pub d2: usize,
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Softmax over `eta` with an implicit trailing zero.
fn alr_inverse(eta: &[f64]) -> Vec<f64> {
    let max = eta.iter().copied().fold(0.0f64, f64::max);
    let mut out: Vec<f64> = eta.iter().map(|e| (e - max).exp()).collect();
    out.push((-max).exp());
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|p| *p /= total);
    out
}

impl ParamLayout {
    /// Families are only consulted for the slots the variant estimates;
    /// those must be Gumbel or Frank.
    pub fn new(
        variant: Variant,
        alpha_family: CopulaFamily,
        eps_family: CopulaFamily,
        d1: usize,
        d2: usize,
    ) -> Result<Self> {
        if d1 < 2 || d2 < 2 {
            return Err(Error::InvalidArgument("each series needs at least 2 states".into()));
        }
        for (slot, used, fam) in [
            ("mechanism", variant.has_alpha_copula(), alpha_family),
            ("innovation", variant.has_eps_copula(), eps_family),
        ] {
            if used && fam == CopulaFamily::Product {
                return Err(Error::InvalidArgument(format!(
                    "{variant} estimates a {slot} copula; choose gumbel or frank"
                )));
            }
        }
        let normalize = |used: bool, fam: CopulaFamily| if used { fam } else { CopulaFamily::Product };
        Ok(Self {
            variant,
            alpha_family: normalize(variant.has_alpha_copula(), alpha_family),
            eps_family: normalize(variant.has_eps_copula(), eps_family),
            d1,
            d2,
        })
    }

    pub fn n_params(&self) -> usize {
        self.variant.n_params(self.d1, self.d2)
    }

    fn phi_count(&self) -> usize {
        if self.variant.shared_phi() {
            1
        } else {
            2
        }
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let phi = (self.d1 - 1) + (self.d2 - 1);
        let eps = phi + self.phi_count();
        let alpha = eps + self.variant.has_eps_copula() as usize;
        (phi, eps, alpha)
    }

    /// Names of the reported parameters in vector order.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..self.d1).map(|k| format!("p1_{k}")).collect();
        names.extend((1..self.d2).map(|k| format!("p2_{k}")));
        if self.variant.shared_phi() {
            names.push("phi".into());
        } else {
            names.push("phi1".into());
            names.push("phi2".into());
        }
        if self.variant.has_eps_copula() {
            names.push("delta_eps".into());
        }
        if self.variant.has_alpha_copula() {
            names.push("delta_alpha".into());
        }
        names
    }

    fn delta_from_eta(family: CopulaFamily, eta: f64) -> f64 {
        match family {
            CopulaFamily::Gumbel => 1.0 + eta.exp(),
            CopulaFamily::Frank => eta,
            CopulaFamily::Product => 0.0,
        }
    }

    fn delta_to_eta(family: CopulaFamily, delta: f64) -> f64 {
        match family {
            CopulaFamily::Gumbel => (delta - 1.0).ln(),
            CopulaFamily::Frank => delta,
            CopulaFamily::Product => 0.0,
        }
    }

    fn delta_jacobian(family: CopulaFamily, eta: f64) -> f64 {
        match family {
            CopulaFamily::Gumbel => eta.exp(),
            _ => 1.0,
        }
    }

    /// Constrained parameters for an unconstrained vector.
    pub fn to_params(&self, eta: &[f64]) -> Result<Bdar1Params> {
        if eta.len() != self.n_params() {
            return Err(Error::InvalidArgument(format!(
                "expected {} unconstrained values, got {}",
                self.n_params(),
                eta.len()
            )));
        }
        if eta.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParams("non-finite unconstrained parameter".into()));
        }
        let (phi_at, eps_at, alpha_at) = self.offsets();
        let m1 = CategoricalMarginal::new(alr_inverse(&eta[..self.d1 - 1]))?;
        let m2 = CategoricalMarginal::new(alr_inverse(&eta[self.d1 - 1..phi_at]))?;
        let phi1 = PHI_MAX * logistic(eta[phi_at]);
        let phi2 = if self.variant.shared_phi() {
            phi1
        } else {
            PHI_MAX * logistic(eta[phi_at + 1])
        };
        let copula_eps = if self.variant.has_eps_copula() {
            CopulaSpec::new(self.eps_family, Self::delta_from_eta(self.eps_family, eta[eps_at]))?
        } else {
            CopulaSpec::product()
        };
        let copula_alpha = if self.variant.has_alpha_copula() {
            CopulaSpec::new(
                self.alpha_family,
                Self::delta_from_eta(self.alpha_family, eta[alpha_at]),
            )?
        } else {
            CopulaSpec::product()
        };
        Bdar1Params::new(self.variant, phi1, phi2, copula_alpha, copula_eps, m1, m2)
    }

    /// Unconstrained vector for parameters of this layout.
    pub fn to_unconstrained(&self, params: &Bdar1Params) -> Result<Vec<f64>> {
        if params.variant() != self.variant || params.d1() != self.d1 || params.d2() != self.d2 {
            return Err(Error::InvalidArgument("parameters do not match the layout".into()));
        }
        let mut eta = Vec::with_capacity(self.n_params());
        for m in [params.marginal1(), params.marginal2()] {
            let last = *m.probs().last().unwrap();
            eta.extend(m.probs()[..m.states() - 1].iter().map(|p| (p / last).ln()));
        }
        eta.push(logit(params.phi1() / PHI_MAX));
        if !self.variant.shared_phi() {
            eta.push(logit(params.phi2() / PHI_MAX));
        }
        if self.variant.has_eps_copula() {
            eta.push(Self::delta_to_eta(self.eps_family, params.copula_eps().delta()));
        }
        if self.variant.has_alpha_copula() {
            eta.push(Self::delta_to_eta(self.alpha_family, params.copula_alpha().delta()));
        }
        Ok(eta)
    }

    /// Reported estimate vector (see [`ParamLayout::names`]).
    pub fn reported(&self, params: &Bdar1Params) -> Vec<f64> {
        let mut out: Vec<f64> = params.marginal1().probs()[..self.d1 - 1].to_vec();
        out.extend_from_slice(&params.marginal2().probs()[..self.d2 - 1]);
        out.push(params.phi1());
        if !self.variant.shared_phi() {
            out.push(params.phi2());
        }
        if self.variant.has_eps_copula() {
            out.push(params.copula_eps().delta());
        }
        if self.variant.has_alpha_copula() {
            out.push(params.copula_alpha().delta());
        }
        out
    }

    /// Jacobian `d reported / d eta` (square, row-major) at `eta`.
    pub fn jacobian(&self, eta: &[f64]) -> Vec<Vec<f64>> {
        let n = self.n_params();
        let mut jac = vec![vec![0.0; n]; n];
        let (phi_at, eps_at, alpha_at) = self.offsets();
        for (start, len) in [(0, self.d1 - 1), (self.d1 - 1, self.d2 - 1)] {
            let p = alr_inverse(&eta[start..start + len]);
            for k in 0..len {
                for m in 0..len {
                    let kron = if k == m { 1.0 } else { 0.0 };
                    jac[start + k][start + m] = p[k] * (kron - p[m]);
                }
            }
        }
        for k in phi_at..phi_at + self.phi_count() {
            let s = logistic(eta[k]);
            jac[k][k] = PHI_MAX * s * (1.0 - s);
        }
        if self.variant.has_eps_copula() {
            jac[eps_at][eps_at] = Self::delta_jacobian(self.eps_family, eta[eps_at]);
        }
        if self.variant.has_alpha_copula() {
            jac[alpha_at][alpha_at] = Self::delta_jacobian(self.alpha_family, eta[alpha_at]);
        }
        jac
    }

    /// Index of `delta_alpha` and `delta_eps` in the vectors, when present.
    pub fn copula_positions(&self) -> (Option<usize>, Option<usize>) {
        let (_, eps_at, alpha_at) = self.offsets();
        (
            self.variant.has_alpha_copula().then_some(alpha_at),
            self.variant.has_eps_copula().then_some(eps_at),
        )
    }

    /// Index of the first `phi` entry.
    pub fn phi_position(&self) -> usize {
        self.offsets().0
    }
}
