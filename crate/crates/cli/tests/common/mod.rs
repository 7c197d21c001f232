//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use bdar::copula::{CopulaFamily, CopulaSpec};
use bdar::jointdiscrete::CategoricalMarginal;
use bdar::model::{Bdar1Params, Variant};
use rand::Rng;

pub fn repo_path(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

pub fn fixture_csv() -> PathBuf {
    repo_path("data/fixture_quarterly.csv")
}

pub fn marginal(p: &[f64]) -> CategoricalMarginal {
    CategoricalMarginal::new(p.to_vec()).unwrap()
}

/// Gumbel simulation design with three states per series.
pub fn gumbel_design() -> Bdar1Params {
    let g = CopulaSpec::gumbel(2.0).unwrap();
    Bdar1Params::full(
        0.4,
        0.25,
        g,
        g,
        marginal(&[0.15, 0.6, 0.25]),
        marginal(&[0.2, 0.3, 0.5]),
    )
    .unwrap()
}

/// Full Frank model fitted to the quarterly unemployment application.
pub fn application_m5() -> Bdar1Params {
    let text = std::fs::read_to_string(repo_path("data/model5_frank.json")).unwrap();
    Bdar1Params::from_json(&text).unwrap()
}

/// Common-mechanism Frank model fitted to the same application.
pub fn application_m2() -> Bdar1Params {
    Bdar1Params::common_mechanism(
        0.830,
        CopulaSpec::frank(26.730).unwrap(),
        marginal(&[0.133, 0.159, 0.266, 0.442]),
        marginal(&[0.386, 0.431, 0.183]),
    )
    .unwrap()
}

/// A pmf on `d` states with every entry at least about `0.05 / d`.
pub fn random_marginal<R: Rng>(rng: &mut R, d: usize) -> CategoricalMarginal {
    let w: Vec<f64> = (0..d).map(|_| rng.gen_range(0.1..1.0)).collect();
    let s: f64 = w.iter().sum();
    CategoricalMarginal::new(w.iter().map(|x| x / s).collect()).unwrap()
}

pub fn random_copula<R: Rng>(rng: &mut R) -> CopulaSpec {
    if rng.gen_bool(0.5) {
        CopulaSpec::gumbel(rng.gen_range(1.0..5.0)).unwrap()
    } else {
        CopulaSpec::frank(rng.gen_range(-10.0..15.0)).unwrap()
    }
}

/// Random full-model parameters with `phi` in `phi_range` and 2 to 4
/// states per series.
pub fn random_m5<R: Rng>(rng: &mut R, phi_range: std::ops::Range<f64>) -> Bdar1Params {
    let (d1, d2) = (rng.gen_range(2..=4), rng.gen_range(2..=4));
    Bdar1Params::full(
        rng.gen_range(phi_range.clone()),
        rng.gen_range(phi_range),
        random_copula(rng),
        random_copula(rng),
        random_marginal(rng, d1),
        random_marginal(rng, d2),
    )
    .unwrap()
}

/// Random parameters of any variant.
pub fn random_params<R: Rng>(rng: &mut R) -> Bdar1Params {
    let variant = Variant::ALL[rng.gen_range(0..5)];
    let (d1, d2) = (rng.gen_range(2..=5), rng.gen_range(2..=5));
    let phi1 = rng.gen_range(0.0..0.95);
    let phi2 = if variant.shared_phi() {
        phi1
    } else {
        rng.gen_range(0.0..0.95)
    };
    let alpha = if variant.has_alpha_copula() {
        random_copula(rng)
    } else {
        CopulaSpec::product()
    };
    let eps = if variant.has_eps_copula() {
        random_copula(rng)
    } else {
        CopulaSpec::product()
    };
    Bdar1Params::new(
        variant,
        phi1,
        phi2,
        alpha,
        eps,
        random_marginal(rng, d1),
        random_marginal(rng, d2),
    )
    .unwrap()
}

pub fn all_families() -> [CopulaFamily; 2] {
    [CopulaFamily::Gumbel, CopulaFamily::Frank]
}
