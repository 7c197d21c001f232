//! Bivariate copulas and the rectangle construction of joint pmfs on
//! discrete margins.
//!
//! Three families are supported: the independence (product) copula, the
//! Gumbel copula with `delta >= 1` and the Frank copula with real `delta`.
//! All evaluations are pure functions of their arguments.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Frank parameters with `|delta|` below this are evaluated as independence.
pub const FRANK_INDEPENDENCE_BAND: f64 = 1e-8;

/// Slack allowed on unit-square coordinates before they are rejected.
pub const UNIT_TOLERANCE: f64 = 1e-12;

// Below this |delta| the Frank copula is evaluated through expm1/log1p; above
// it the rearranged form that stays finite as delta grows is used.
const FRANK_DIRECT_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Product,
    Gumbel,
    Frank,
}

impl CopulaFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            CopulaFamily::Product => "product",
            CopulaFamily::Gumbel => "gumbel",
            CopulaFamily::Frank => "frank",
        }
    }

    /// Dependence parameter at which the family reduces to independence.
    pub fn independence_delta(self) -> f64 {
        match self {
            CopulaFamily::Product | CopulaFamily::Frank => 0.0,
            CopulaFamily::Gumbel => 1.0,
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CopulaFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "product" => Ok(CopulaFamily::Product),
            "gumbel" => Ok(CopulaFamily::Gumbel),
            "frank" => Ok(CopulaFamily::Frank),
            other => Err(Error::Domain(format!(
                "unknown copula family {other:?}; expected product, gumbel or frank"
            ))),
        }
    }
}

/// A copula family together with its dependence parameter.
///
/// Construction validates the parameter, so every `CopulaSpec` in
/// circulation can be evaluated without further checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCopulaSpec")]
pub struct CopulaSpec {
    family: CopulaFamily,
    delta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCopulaSpec {
    family: CopulaFamily,
    #[serde(default)]
    delta: f64,
}

impl TryFrom<RawCopulaSpec> for CopulaSpec {
    type Error = Error;

    fn try_from(raw: RawCopulaSpec) -> Result<Self> {
        CopulaSpec::new(raw.family, raw.delta)
    }
}

impl CopulaSpec {
    pub fn new(family: CopulaFamily, delta: f64) -> Result<Self> {
        match family {
            CopulaFamily::Product => Ok(Self::product()),
            CopulaFamily::Gumbel => Self::gumbel(delta),
            CopulaFamily::Frank => Self::frank(delta),
        }
    }

    pub fn product() -> Self {
        Self {
            family: CopulaFamily::Product,
            delta: 0.0,
        }
    }

    pub fn gumbel(delta: f64) -> Result<Self> {
        // NaN fails the comparison as well.
        if !(delta >= 1.0) {
            return Err(Error::Domain(format!("gumbel copula requires delta >= 1, got {delta}")));
        }
        Ok(Self {
            family: CopulaFamily::Gumbel,
            delta,
        })
    }

    /// Frank copula. Values inside [`FRANK_INDEPENDENCE_BAND`] (including
    /// zero) evaluate as the independence limit.
    pub fn frank(delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::Domain(format!(
                "frank copula requires a finite delta, got {delta}"
            )));
        }
        Ok(Self {
            family: CopulaFamily::Frank,
            delta,
        })
    }

    /// The independence member of `family`.
    pub fn independence(family: CopulaFamily) -> Self {
        Self {
            family,
            delta: family.independence_delta(),
        }
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// True when the spec evaluates exactly as the product copula.
    pub fn is_independence(&self) -> bool {
        match self.family {
            CopulaFamily::Product => true,
            CopulaFamily::Gumbel => self.delta == 1.0,
            CopulaFamily::Frank => self.delta.abs() < FRANK_INDEPENDENCE_BAND,
        }
    }

    /// `C(u, v)` with coordinate validation.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        let p = UnitSquarePoint::new(u, v)?;
        Ok(copula_cdf(self, p))
    }

    /// `C(u, v)` for coordinates already known to lie in the unit square.
    pub(crate) fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v.min(1.0);
        }
        if v >= 1.0 {
            return u;
        }
        let c = match self.family {
            CopulaFamily::Product => u * v,
            CopulaFamily::Gumbel => gumbel_cdf(u, v, self.delta),
            CopulaFamily::Frank => frank_cdf(u, v, self.delta),
        };
        // Fréchet-Hoeffding bounds; rounding can leave c marginally outside.
        c.clamp((u + v - 1.0).max(0.0), u.min(v))
    }
}

impl fmt::Display for CopulaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            CopulaFamily::Product => f.write_str("product"),
            family => write!(f, "{family}(delta={})", self.delta),
        }
    }
}

/// A point of the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSquarePoint {
    u: f64,
    v: f64,
}

impl UnitSquarePoint {
    /// Coordinates within [`UNIT_TOLERANCE`] of the square are clamped onto it.
    pub fn new(u: f64, v: f64) -> Result<Self> {
        Ok(Self {
            u: unit_coordinate(u)?,
            v: unit_coordinate(v)?,
        })
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }
}

fn unit_coordinate(x: f64) -> Result<f64> {
    if !(-UNIT_TOLERANCE..=1.0 + UNIT_TOLERANCE).contains(&x) {
        return Err(Error::Domain(format!(
            "copula coordinate {x} outside the unit interval"
        )));
    }
    Ok(x.clamp(0.0, 1.0))
}

/// Evaluates the copula CDF `C(u, v; delta)`.
pub fn copula_cdf(spec: &CopulaSpec, p: UnitSquarePoint) -> f64 {
    spec.cdf_unchecked(p.u, p.v)
}

/// `C_G(u,v) = exp(-((-ln u)^d + (-ln v)^d)^(1/d))`, with the power sum
/// factored through its larger term so that large `d` does not overflow.
fn gumbel_cdf(u: f64, v: f64, delta: f64) -> f64 {
    let a = -u.ln();
    let b = -v.ln();
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return 1.0;
    }
    let ratio = lo / hi;
    let norm = hi * ((ratio.powf(delta)).ln_1p() / delta).exp();
    (-norm).exp()
}

fn frank_cdf(u: f64, v: f64, delta: f64) -> f64 {
    if delta.abs() < FRANK_INDEPENDENCE_BAND {
        return u * v;
    }
    if delta.abs() <= FRANK_DIRECT_LIMIT {
        let num = (-delta * u).exp_m1() * (-delta * v).exp_m1();
        let den = (-delta).exp_m1();
        return -(num / den).ln_1p() / delta;
    }
    if delta > 0.0 {
        frank_cdf_strong(u, v, delta)
    } else {
        // Rotation identity of the Frank family: C(u, v; -d) = u - C(u, 1 - v; d).
        u - frank_cdf_strong(u, 1.0 - v, -delta)
    }
}

/// Frank CDF for large positive `delta`, written relative to `min(u, v)`:
/// `C = m - ln(1 + e^{-d(M-m)} - e^{-dM} - e^{-d(1-m)}) / d + ln(1 - e^{-d}) / d`.
fn frank_cdf_strong(u: f64, v: f64, delta: f64) -> f64 {
    let (lo, hi) = if u <= v { (u, v) } else { (v, u) };
    if lo <= 0.0 {
        return 0.0;
    }
    let inner = (-delta * (hi - lo)).exp() - (-delta * hi).exp() - (-delta * (1.0 - lo)).exp();
    lo - inner.ln_1p() / delta + (-(-delta).exp_m1()).ln() / delta
}

/// Inclusion-exclusion mass of the rectangle `(u_lo, u_hi] x (v_lo, v_hi]`
/// before clamping; may be a tiny negative number from cancellation.
pub(crate) fn rectangle_mass_raw(spec: &CopulaSpec, u_lo: f64, u_hi: f64, v_lo: f64, v_hi: f64) -> f64 {
    spec.cdf_unchecked(u_hi, v_hi) - spec.cdf_unchecked(u_lo, v_hi) - spec.cdf_unchecked(u_hi, v_lo)
        + spec.cdf_unchecked(u_lo, v_lo)
}

/// Copula mass of the rectangle `(u_lo, u_hi] x (v_lo, v_hi]`.
///
/// Negative results from floating-point cancellation are clamped to zero.
pub fn rectangle_mass(spec: &CopulaSpec, u_lo: f64, u_hi: f64, v_lo: f64, v_hi: f64) -> Result<f64> {
    let u_lo = unit_coordinate(u_lo)?;
    let u_hi = unit_coordinate(u_hi)?;
    let v_lo = unit_coordinate(v_lo)?;
    let v_hi = unit_coordinate(v_hi)?;
    if u_lo > u_hi || v_lo > v_hi {
        return Err(Error::Domain(format!(
            "rectangle endpoints out of order: ({u_lo}, {u_hi}] x ({v_lo}, {v_hi}]"
        )));
    }
    Ok(rectangle_mass_raw(spec, u_lo, u_hi, v_lo, v_hi).max(0.0))
}
