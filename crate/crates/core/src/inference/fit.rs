use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::copula::CopulaFamily;
use crate::error::{Error, Result};
use crate::model::{Bdar1Params, BivariateOrdinalSeries, Variant};
use crate::rng::substream;

use super::criteria::information_criteria;
use super::likelihood::TransitionCounts;
use super::optim::{central_hessian, minimize_bfgs, BfgsOptions};
use super::reparam::ParamLayout;

/// Estimation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Gradient infinity-norm tolerance on the unconstrained scale.
    pub gtol: f64,
    /// Shortest series accepted.
    pub min_len: usize,
    /// Jittered restarts added to the default starting points.
    pub extra_starts: usize,
    /// Seed for the jittered restarts.
    pub seed: u64,
    pub std_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            gtol: 1e-5,
            min_len: 20,
            extra_starts: 0,
            seed: 0,
            std_errors: true,
        }
    }
}

/// Result of a conditional maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params_hat: Bdar1Params,
    /// Names of the reported parameters (`p1_1, .., phi1, phi2, delta_eps, delta_alpha`).
    pub param_names: Vec<String>,
    pub estimates: Vec<f64>,
    /// Delta-method standard errors, `None` when the observed information
    /// is not positive definite.
    pub std_errors: Option<Vec<f64>>,
    pub loglik: f64,
    pub n_params: usize,
    /// Series length `T`; the likelihood has `T - 1` terms.
    pub n_obs: usize,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub n_iterations: usize,
    pub max_gradient_norm: f64,
    /// Index of the starting point that gave the reported optimum.
    pub best_start: usize,
    pub n_starts: usize,
}

impl FitReport {
    pub fn variant(&self) -> Variant {
        self.params_hat.variant()
    }

    /// Standard error of a named parameter.
    pub fn std_error(&self, name: &str) -> Option<f64> {
        let k = self.param_names.iter().position(|n| n == name)?;
        self.std_errors.as_ref().map(|se| se[k])
    }

    /// Estimate of a named parameter.
    pub fn estimate(&self, name: &str) -> Option<f64> {
        let k = self.param_names.iter().position(|n| n == name)?;
        Some(self.estimates[k])
    }
}

/// Fits `variant` by conditional maximum likelihood from the default
/// starting points (plus any jittered restarts requested in `options`).
///
/// Families are only consulted for copula slots the variant estimates.
pub fn fit(
    data: &BivariateOrdinalSeries,
    variant: Variant,
    alpha_family: CopulaFamily,
    eps_family: CopulaFamily,
    options: &FitOptions,
) -> Result<FitReport> {
    fit_with_starts(data, variant, alpha_family, eps_family, &[], options)
}

/// [`fit`] with additional starting points, for example a nested model's
/// estimates embedded by [`embed_params`].
pub fn fit_with_starts(
    data: &BivariateOrdinalSeries,
    variant: Variant,
    alpha_family: CopulaFamily,
    eps_family: CopulaFamily,
    extra: &[Bdar1Params],
    options: &FitOptions,
) -> Result<FitReport> {
    if data.len() < options.min_len.max(2) {
        return Err(Error::InvalidSeries(format!(
            "series has {} observations; at least {} are required",
            data.len(),
            options.min_len
        )));
    }
    if let Some((series, state)) = data.first_unobserved_state() {
        return Err(Error::UnobservedState { series, state });
    }
    let layout = ParamLayout::new(variant, alpha_family, eps_family, data.d1(), data.d2())?;
    let counts = TransitionCounts::from_series(data);
    let objective = |eta: &[f64]| -> Option<f64> {
        let params = layout.to_params(eta).ok()?;
        let ll = counts.loglik(&params.kernel()).ok()?;
        ll.is_finite().then_some(-ll)
    };

    let mut starts = default_starts(data, &layout)?;
    for p in extra {
        starts.push(layout.to_unconstrained(p)?);
    }
    if options.extra_starts > 0 {
        let base = starts[0].clone();
        for k in 0..options.extra_starts {
            let mut rng = substream(options.seed, "fit-restart", k as u64);
            starts.push(base.iter().map(|x| x + rng.gen_range(-1.0..1.0)).collect());
        }
    }
    let mut unique: Vec<Vec<f64>> = Vec::with_capacity(starts.len());
    for s in starts {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }

    let bfgs = BfgsOptions {
        max_iter: options.max_iter,
        gtol: options.gtol,
        ..BfgsOptions::default()
    };
    let mut best: Option<(usize, super::optim::Minimum)> = None;
    for (k, x0) in unique.iter().enumerate() {
        let Some(m) = minimize_bfgs(&objective, x0, &bfgs) else {
            continue;
        };
        if best.as_ref().is_none_or(|(_, b)| m.value < b.value) {
            best = Some((k, m));
        }
    }
    let (mut best_start, mut m) =
        best.ok_or_else(|| Error::InvalidArgument("the likelihood is undefined at every starting point".into()))?;
    let mut n_starts = unique.len();
    // A copula parameter that ends on one of its flat limits (independence
    // for Gumbel, near-perfect dependence for either family) has a vanishing
    // gradient, so the optimizer cannot leave it even when an interior
    // optimum is better. Restart once from moderate dependence in those slots.
    if let Some(x0) = escape_plateaus(&layout, &m.x) {
        if let Some(r) = minimize_bfgs(&objective, &x0, &bfgs) {
            if r.value < m.value {
                best_start = n_starts;
                m = r;
            }
        }
        n_starts += 1;
    }

    let params_hat = layout.to_params(&m.x)?;
    let loglik = -m.value;
    let n_params = layout.n_params();
    let (aic, bic) = information_criteria(loglik, n_params, data.len());
    let std_errors = if options.std_errors {
        standard_errors(&objective, &layout, &m.x)
    } else {
        None
    };
    Ok(FitReport {
        estimates: layout.reported(&params_hat),
        param_names: layout.names(),
        params_hat,
        std_errors,
        loglik,
        n_params,
        n_obs: data.len(),
        aic,
        bic,
        converged: m.converged,
        n_iterations: m.iterations,
        max_gradient_norm: m.gradient_norm(),
        best_start,
        n_starts,
    })
}

fn standard_errors<F>(objective: &F, layout: &ParamLayout, eta: &[f64]) -> Option<Vec<f64>>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let n = eta.len();
    let hess = central_hessian(objective, eta)?;
    let h = DMatrix::from_fn(n, n, |i, j| hess[i][j]);
    let cov = h.cholesky()?.inverse();
    let jac = layout.jacobian(eta);
    let j = DMatrix::from_fn(n, n, |i, k| jac[i][k]);
    let cov_rep = &j * cov * j.transpose();
    let se: Vec<f64> = (0..n).map(|k| cov_rep[(k, k)].max(0.0).sqrt()).collect();
    se.iter().all(|s| s.is_finite()).then_some(se)
}

/// Unconstrained copula value for independence, moderate and near-perfect
/// dependence. The Frank level is large enough that `C(u, u)` equals
/// `u` to rounding, so an embedded shared mechanism loses no likelihood.
fn copula_eta(family: CopulaFamily, level: u8) -> f64 {
    match (family, level) {
        (CopulaFamily::Gumbel, 0) => -30.0,
        (CopulaFamily::Gumbel, 1) => 0.0,
        (CopulaFamily::Gumbel, _) => 30.0,
        (CopulaFamily::Frank, 0) => 0.0,
        (CopulaFamily::Frank, 1) => 3.0,
        (CopulaFamily::Frank, _) => 1e15,
        (CopulaFamily::Product, _) => 0.0,
    }
}

fn on_plateau(family: CopulaFamily, eta: f64) -> bool {
    match family {
        CopulaFamily::Gumbel => eta.abs() > 6.0,
        CopulaFamily::Frank => eta.abs() > 40.0,
        CopulaFamily::Product => false,
    }
}

/// `x` with every copula slot on a plateau moved to moderate dependence, or
/// `None` if no slot is on a plateau.
fn escape_plateaus(layout: &ParamLayout, x: &[f64]) -> Option<Vec<f64>> {
    let (alpha_at, eps_at) = layout.copula_positions();
    let mut out = x.to_vec();
    let mut moved = false;
    for (at, family) in [(alpha_at, layout.alpha_family), (eps_at, layout.eps_family)] {
        if let Some(k) = at {
            if on_plateau(family, x[k]) {
                out[k] = copula_eta(family, 1).copysign(if family == CopulaFamily::Frank { x[k] } else { 1.0 });
                moved = true;
            }
        }
    }
    moved.then_some(out)
}

/// Method-of-moments `phi` from the lag-1 agreement rate `a`: under DAR(1),
/// `a = phi + (1 - phi) sum p_k^2`.
fn moment_phi(z: &[usize], probs: &[f64]) -> f64 {
    let agree = z.windows(2).filter(|w| w[0] == w[1]).count() as f64 / (z.len() - 1) as f64;
    let s: f64 = probs.iter().map(|p| p * p).sum();
    ((agree - s) / (1.0 - s)).clamp(0.02, 0.95)
}

type StartPlan = (u8, u8, Option<(f64, f64)>);

/// The five default starting points: empirical marginals and moment `phi`s
/// combined with copula values at, near and far from independence. The
/// independence start reproduces Model 1's start inside every larger
/// variant, and the strong mechanism start approximates Model 2 inside
/// Models 4 and 5.
fn default_starts(data: &BivariateOrdinalSeries, layout: &ParamLayout) -> Result<Vec<Vec<f64>>> {
    let (c1, c2) = data.state_counts();
    let n = data.len() as f64;
    let p1: Vec<f64> = c1.iter().map(|&c| c as f64 / n).collect();
    let p2: Vec<f64> = c2.iter().map(|&c| c as f64 / n).collect();
    let phi1 = moment_phi(data.z1(), &p1);
    let phi2 = moment_phi(data.z2(), &p2);
    let pooled = 0.5 * (phi1 + phi2);

    let mut base = Vec::new();
    for p in [&p1, &p2] {
        let last = *p.last().unwrap();
        base.extend(p[..p.len() - 1].iter().map(|x| (x / last).ln()));
    }
    let logit = |phi: f64| {
        let q = phi / super::reparam::PHI_MAX;
        (q / (1.0 - q)).ln()
    };
    let (alpha_at, eps_at) = layout.copula_positions();
    let phi_at = layout.phi_position();
    let shared = layout.variant.shared_phi();

    // (mechanism level, innovation level, phi override)
    let plan: [StartPlan; 5] = [
        (0, 0, None),
        (0, 1, None),
        (1, 0, None),
        (2, 1, Some((pooled, pooled))),
        (1, 1, None),
    ];
    let mut out = Vec::with_capacity(plan.len());
    for (alpha_level, eps_level, phis) in plan {
        let (f1, f2) = phis.unwrap_or((phi1, phi2));
        let mut x = base.clone();
        if shared {
            x.push(logit(0.5 * (f1 + f2)));
        } else {
            x.push(logit(f1));
            x.push(logit(f2));
        }
        debug_assert_eq!(x.len() - 1 - (!shared) as usize, phi_at);
        if eps_at.is_some() {
            x.push(copula_eta(layout.eps_family, eps_level));
        }
        if alpha_at.is_some() {
            x.push(copula_eta(layout.alpha_family, alpha_level));
        }
        out.push(x);
    }
    Ok(out)
}

/// Represents nested-model parameters inside a larger variant.
///
/// Missing copulas are set to independence; a shared mechanism becomes a
/// near-comonotone mechanism copula with `phi1 = phi2`.
pub fn embed_params(
    params: &Bdar1Params,
    target: Variant,
    alpha_family: CopulaFamily,
    eps_family: CopulaFamily,
) -> Result<Bdar1Params> {
    let from = params.variant();
    if from != target && !from.is_nested_in(target) {
        return Err(Error::InvalidArgument(format!("{from} is not nested in {target}")));
    }
    let layout = ParamLayout::new(target, alpha_family, eps_family, params.d1(), params.d2())?;
    let slot =
        |used: bool, family: CopulaFamily, level: u8, existing: Option<f64>| -> Result<crate::copula::CopulaSpec> {
            if !used {
                return Ok(crate::copula::CopulaSpec::product());
            }
            let delta = match existing {
                Some(d) => d,
                None => {
                    let eta = copula_eta(family, level);
                    match family {
                        CopulaFamily::Gumbel => 1.0 + eta.exp(),
                        _ => eta,
                    }
                }
            };
            crate::copula::CopulaSpec::new(family, delta)
        };
    let same_family =
        |spec: &crate::copula::CopulaSpec, family: CopulaFamily| (spec.family() == family).then(|| spec.delta());
    let alpha_existing = if from.has_alpha_copula() {
        same_family(params.copula_alpha(), layout.alpha_family)
    } else {
        None
    };
    let alpha_level = if from.shared_phi() { 2 } else { 0 };
    let eps_existing = if from.has_eps_copula() {
        same_family(params.copula_eps(), layout.eps_family)
    } else {
        None
    };
    let copula_alpha = slot(
        target.has_alpha_copula(),
        layout.alpha_family,
        alpha_level,
        alpha_existing,
    )?;
    let copula_eps = slot(target.has_eps_copula(), layout.eps_family, 0, eps_existing)?;
    Bdar1Params::new(
        target,
        params.phi1(),
        params.phi2(),
        copula_alpha,
        copula_eps,
        params.marginal1().clone(),
        params.marginal2().clone(),
    )
}

/// Fits several variants, warm-starting each from the embedded estimates
/// of every already-fitted variant nested in it. This guarantees (up to
/// optimizer tolerance) that a larger model never reports a lower
/// log-likelihood than a model nested in it.
pub fn fit_variants(
    data: &BivariateOrdinalSeries,
    variants: &[Variant],
    alpha_family: CopulaFamily,
    eps_family: CopulaFamily,
    options: &FitOptions,
) -> Vec<(Variant, Result<FitReport>)> {
    let mut order: Vec<Variant> = variants.to_vec();
    order.sort_by_key(|v| v.n_params(2, 2) * 10 + v.number());
    order.dedup();
    let mut done: Vec<(Variant, Result<FitReport>)> = Vec::with_capacity(order.len());
    for &v in &order {
        let warm: Vec<Bdar1Params> = done
            .iter()
            .filter(|(u, _)| u.is_nested_in(v))
            .filter_map(|(_, r)| r.as_ref().ok())
            .filter_map(|r| embed_params(&r.params_hat, v, alpha_family, eps_family).ok())
            .collect();
        let report = fit_with_starts(data, v, alpha_family, eps_family, &warm, options);
        done.push((v, report));
    }
    let mut out = Vec::with_capacity(variants.len());
    for v in variants {
        if out.iter().any(|(u, _): &(Variant, Result<FitReport>)| u == v) {
            continue;
        }
        let k = done.iter().position(|(u, _)| u == v).expect("every variant fitted");
        out.push(done.swap_remove(k));
    }
    out
}
