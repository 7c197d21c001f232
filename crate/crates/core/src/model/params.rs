use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::copula::CopulaSpec;
use crate::error::{Error, Result};
use crate::jointdiscrete::{bernoulli_joint, innovation_joint, CategoricalMarginal, InnovationTable, MechanismTable};

use super::pmf::TransitionKernel;

/// The five nested BDAR(1) variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    /// Model 1: independent mechanisms and independent innovations.
    #[serde(rename = "M1")]
    Independent,
    /// Model 2: one mechanism shared by both series, dependent innovations.
    #[serde(rename = "M2")]
    CommonMechanism,
    /// Model 3: independent mechanisms, dependent innovations.
    #[serde(rename = "M3")]
    DepInnovOnly,
    /// Model 4: dependent mechanisms, independent innovations.
    #[serde(rename = "M4")]
    DepMechOnly,
    /// Model 5: dependent mechanisms and dependent innovations.
    #[serde(rename = "M5")]
    Full,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Independent,
        Variant::CommonMechanism,
        Variant::DepInnovOnly,
        Variant::DepMechOnly,
        Variant::Full,
    ];

    /// Model number 1..=5.
    pub fn number(self) -> usize {
        match self {
            Variant::Independent => 1,
            Variant::CommonMechanism => 2,
            Variant::DepInnovOnly => 3,
            Variant::DepMechOnly => 4,
            Variant::Full => 5,
        }
    }

    pub fn from_number(n: usize) -> Result<Self> {
        Variant::ALL
            .get(n.wrapping_sub(1))
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("model number must be 1..=5, got {n}")))
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Independent => "M1",
            Variant::CommonMechanism => "M2",
            Variant::DepInnovOnly => "M3",
            Variant::DepMechOnly => "M4",
            Variant::Full => "M5",
        }
    }

    /// Whether the mechanisms are coupled by an estimated copula.
    pub fn has_alpha_copula(self) -> bool {
        matches!(self, Variant::DepMechOnly | Variant::Full)
    }

    /// Whether the innovations are coupled by an estimated copula.
    pub fn has_eps_copula(self) -> bool {
        matches!(self, Variant::CommonMechanism | Variant::DepInnovOnly | Variant::Full)
    }

    pub fn shared_phi(self) -> bool {
        self == Variant::CommonMechanism
    }

    /// Number of free parameters for state spaces of size `d1` and `d2`.
    pub fn n_params(self, d1: usize, d2: usize) -> usize {
        let phis = if self.shared_phi() { 1 } else { 2 };
        (d1 - 1) + (d2 - 1) + phis + self.has_alpha_copula() as usize + self.has_eps_copula() as usize
    }

    /// True when `self` is a restriction (or limit) of `other`.
    ///
    /// Model 2 sits inside Model 5 only as the comonotone limit of the
    /// mechanism copula.
    pub fn is_nested_in(self, other: Variant) -> bool {
        use Variant::*;
        matches!(
            (self, other),
            (Independent, DepInnovOnly)
                | (Independent, DepMechOnly)
                | (Independent, Full)
                | (CommonMechanism, Full)
                | (DepInnovOnly, Full)
                | (DepMechOnly, Full)
        )
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let digits = t.trim_start_matches("model").trim_start_matches('m').trim();
        if let Ok(n) = digits.parse::<usize>() {
            return Variant::from_number(n);
        }
        match t.as_str() {
            "independent" => Ok(Variant::Independent),
            "common" | "common-mechanism" => Ok(Variant::CommonMechanism),
            "dep-innov" | "dependent-innovations" => Ok(Variant::DepInnovOnly),
            "dep-mech" | "dependent-mechanisms" => Ok(Variant::DepMechOnly),
            "full" => Ok(Variant::Full),
            _ => Err(Error::InvalidArgument(format!("unknown model variant {s:?}"))),
        }
    }
}

/// Parameter vector of a BDAR(1) model together with its variant.
///
/// Copula slots that the variant does not estimate hold the product copula.
/// For [`Variant::CommonMechanism`] `phi1 == phi2` and the mechanism table is
/// the comonotone one, so `copula_alpha` is unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Bdar1Params {
    variant: Variant,
    phi1: f64,
    phi2: f64,
    copula_alpha: CopulaSpec,
    copula_eps: CopulaSpec,
    m1: CategoricalMarginal,
    m2: CategoricalMarginal,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    variant: Variant,
    phi1: f64,
    phi2: f64,
    copula_alpha: CopulaSpec,
    copula_eps: CopulaSpec,
    p1: CategoricalMarginal,
    p2: CategoricalMarginal,
}

impl TryFrom<RawParams> for Bdar1Params {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        Bdar1Params::new(r.variant, r.phi1, r.phi2, r.copula_alpha, r.copula_eps, r.p1, r.p2)
    }
}

impl From<Bdar1Params> for RawParams {
    fn from(p: Bdar1Params) -> Self {
        RawParams {
            variant: p.variant,
            phi1: p.phi1,
            phi2: p.phi2,
            copula_alpha: p.copula_alpha,
            copula_eps: p.copula_eps,
            p1: p.m1,
            p2: p.m2,
        }
    }
}

fn check_phi(name: &str, phi: f64) -> Result<()> {
    if !(0.0..1.0).contains(&phi) {
        return Err(Error::InvalidParams(format!(
            "{name} = {phi} violates the stationarity condition 0 <= phi < 1"
        )));
    }
    Ok(())
}

impl Bdar1Params {
    pub fn new(
        variant: Variant,
        phi1: f64,
        phi2: f64,
        copula_alpha: CopulaSpec,
        copula_eps: CopulaSpec,
        m1: CategoricalMarginal,
        m2: CategoricalMarginal,
    ) -> Result<Self> {
        check_phi("phi1", phi1)?;
        check_phi("phi2", phi2)?;
        if variant.shared_phi() && phi1 != phi2 {
            return Err(Error::InvalidParams(format!(
                "{variant} shares one mechanism; phi1 = {phi1} and phi2 = {phi2} differ"
            )));
        }
        let copula_alpha = restrict_slot(variant, "copula_alpha", copula_alpha, variant.has_alpha_copula())?;
        let copula_eps = restrict_slot(variant, "copula_eps", copula_eps, variant.has_eps_copula())?;
        Ok(Self {
            variant,
            phi1,
            phi2,
            copula_alpha,
            copula_eps,
            m1,
            m2,
        })
    }

    /// Model 5.
    pub fn full(
        phi1: f64,
        phi2: f64,
        copula_alpha: CopulaSpec,
        copula_eps: CopulaSpec,
        m1: CategoricalMarginal,
        m2: CategoricalMarginal,
    ) -> Result<Self> {
        Self::new(Variant::Full, phi1, phi2, copula_alpha, copula_eps, m1, m2)
    }

    /// Model 1.
    pub fn independent(phi1: f64, phi2: f64, m1: CategoricalMarginal, m2: CategoricalMarginal) -> Result<Self> {
        let p = CopulaSpec::product();
        Self::new(Variant::Independent, phi1, phi2, p, p, m1, m2)
    }

    /// Model 2.
    pub fn common_mechanism(
        phi: f64,
        copula_eps: CopulaSpec,
        m1: CategoricalMarginal,
        m2: CategoricalMarginal,
    ) -> Result<Self> {
        Self::new(
            Variant::CommonMechanism,
            phi,
            phi,
            CopulaSpec::product(),
            copula_eps,
            m1,
            m2,
        )
    }

    /// Model 3.
    pub fn dep_innov_only(
        phi1: f64,
        phi2: f64,
        copula_eps: CopulaSpec,
        m1: CategoricalMarginal,
        m2: CategoricalMarginal,
    ) -> Result<Self> {
        Self::new(
            Variant::DepInnovOnly,
            phi1,
            phi2,
            CopulaSpec::product(),
            copula_eps,
            m1,
            m2,
        )
    }

    /// Model 4.
    pub fn dep_mech_only(
        phi1: f64,
        phi2: f64,
        copula_alpha: CopulaSpec,
        m1: CategoricalMarginal,
        m2: CategoricalMarginal,
    ) -> Result<Self> {
        Self::new(
            Variant::DepMechOnly,
            phi1,
            phi2,
            copula_alpha,
            CopulaSpec::product(),
            m1,
            m2,
        )
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn phi1(&self) -> f64 {
        self.phi1
    }

    pub fn phi2(&self) -> f64 {
        self.phi2
    }

    pub fn copula_alpha(&self) -> &CopulaSpec {
        &self.copula_alpha
    }

    pub fn copula_eps(&self) -> &CopulaSpec {
        &self.copula_eps
    }

    pub fn marginal1(&self) -> &CategoricalMarginal {
        &self.m1
    }

    pub fn marginal2(&self) -> &CategoricalMarginal {
        &self.m2
    }

    pub fn d1(&self) -> usize {
        self.m1.states()
    }

    pub fn d2(&self) -> usize {
        self.m2.states()
    }

    /// Joint pmf of the selection mechanisms.
    pub fn mechanism(&self) -> MechanismTable {
        if self.variant.shared_phi() {
            // phi was validated above.
            MechanismTable::comonotone(self.phi1).expect("validated phi")
        } else {
            bernoulli_joint(self.phi1, self.phi2, &self.copula_alpha).expect("validated phi")
        }
    }

    /// Joint pmf of the innovations.
    pub fn innovation(&self) -> InnovationTable {
        innovation_joint(&self.m1, &self.m2, &self.copula_eps)
    }

    /// Precomputed one-step transition probabilities.
    pub fn kernel(&self) -> TransitionKernel {
        TransitionKernel::new(self.mechanism(), self.innovation())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameters serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidParams(e.to_string()))
    }
}

fn restrict_slot(variant: Variant, slot: &str, spec: CopulaSpec, estimated: bool) -> Result<CopulaSpec> {
    if estimated {
        return Ok(spec);
    }
    // Model 2's mechanism slot is structurally unused.
    if variant.shared_phi() && slot == "copula_alpha" {
        return Ok(CopulaSpec::product());
    }
    if !spec.is_independence() {
        return Err(Error::InvalidParams(format!(
            "{variant} fixes {slot} to independence, got {spec}"
        )));
    }
    Ok(CopulaSpec::product())
}
