//! Reading raw series from CSV and mapping them onto ordinal states.

use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use bdar::inference::quantile;
use bdar::model::BivariateOrdinalSeries;

/// Breakpoints of the bundled four-state unemployment-rate rule (percent).
pub const UNEMPLOYMENT_BREAKPOINTS: [f64; 5] = [1.9, 5.9, 7.7, 12.75, 19.9];

/// Two aligned real-valued series with their time index.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub time: Vec<String>,
    pub names: (String, String),
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
}

impl RawSeries {
    pub fn len(&self) -> usize {
        self.y1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y1.is_empty()
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    let t = cell.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("na") || t.eq_ignore_ascii_case("nan") {
        return None;
    }
    t.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads two numeric columns (and optionally a time column) from a CSV file
/// with a header row. Rows are numbered from 1 after the header.
pub fn ingest(path: &Path, col1: &str, col2: &str, time_col: Option<&str>) -> Result<RawSeries> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| anyhow!("column {name:?} not found in {}", path.display()))
    };
    let (i1, i2) = (find(col1)?, find(col2)?);
    let it = time_col.map(find).transpose()?;

    let mut out = RawSeries {
        time: Vec::new(),
        names: (col1.to_string(), col2.to_string()),
        y1: Vec::new(),
        y2: Vec::new(),
    };
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let record = record.with_context(|| format!("malformed CSV at row {row}"))?;
        let get = |i: usize, name: &str| -> Result<f64> {
            let cell = record.get(i).unwrap_or("");
            parse_cell(cell)
                .ok_or_else(|| anyhow!("row {row}: missing or non-numeric value {cell:?} in column {name:?}"))
        };
        out.y1.push(get(i1, col1)?);
        out.y2.push(get(i2, col2)?);
        out.time.push(match it {
            Some(i) => record.get(i).unwrap_or("").trim().to_string(),
            None => row.to_string(),
        });
    }
    if out.len() < 2 {
        bail!("{} holds {} rows; at least 2 are needed", path.display(), out.len());
    }
    Ok(out)
}

/// How raw values become ordinal states.
#[derive(Debug, Clone, PartialEq)]
pub enum DiscretizationRule {
    /// Values already are 1-based state indices.
    Ordinal,
    /// Fixed ascending breakpoints `b_1 < .. < b_{d+1}`: state 1 is
    /// `[b_1, b_2]` and state `k > 1` is `(b_k, b_{k+1}]`. A series whose
    /// values never reach the top intervals gets fewer states.
    Breakpoints(Vec<f64>),
    /// `k` states from pooled type-7 quantiles of both series.
    Quantiles(usize),
}

impl FromStr for DiscretizationRule {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("ordinal") {
            return Ok(Self::Ordinal);
        }
        if t.eq_ignore_ascii_case("unemployment") {
            return Ok(Self::Breakpoints(UNEMPLOYMENT_BREAKPOINTS.to_vec()));
        }
        if let Some(k) = t.strip_prefix("quantiles:") {
            let k: usize = k
                .trim()
                .parse()
                .with_context(|| format!("bad quantile count in {s:?}"))?;
            if k < 2 {
                bail!("quantile discretization needs at least 2 states");
            }
            return Ok(Self::Quantiles(k));
        }
        let b = t
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .with_context(|| format!("unrecognised discretization {s:?}"))?;
        check_breakpoints(&b)?;
        Ok(Self::Breakpoints(b))
    }
}

fn check_breakpoints(b: &[f64]) -> Result<()> {
    if b.len() < 3 {
        bail!("need at least 3 breakpoints (2 states), got {}", b.len());
    }
    if b.iter().any(|x| !x.is_finite()) || b.windows(2).any(|w| w[0] >= w[1]) {
        bail!("breakpoints must be finite and strictly ascending: {b:?}");
    }
    Ok(())
}

/// State of `y` under ascending breakpoints (first interval closed on both
/// ends, the rest right-closed).
pub fn state_of(y: f64, breakpoints: &[f64]) -> Option<usize> {
    let (first, last) = (breakpoints[0], *breakpoints.last()?);
    if !(y >= first && y <= last) {
        return None;
    }
    // number of upper bounds b_2..b_{d+1} strictly below y
    Some(breakpoints[1..].partition_point(|&b| b < y) + 1)
}

/// Breakpoints `[min, q(1/k), .., q((k-1)/k), max]` of the pooled values.
pub fn quantile_breakpoints(raw: &RawSeries, k: usize) -> Result<Vec<f64>> {
    let mut pooled: Vec<f64> = raw.y1.iter().chain(&raw.y2).copied().collect();
    pooled.sort_by(f64::total_cmp);
    let b: Vec<f64> = (0..=k).map(|j| quantile(&pooled, j as f64 / k as f64)).collect();
    check_breakpoints(&b).context("the data have too many ties for this many quantile states")?;
    Ok(b)
}

/// Ordinal series plus the breakpoints used (empty for ordinal input).
#[derive(Debug, Clone, PartialEq)]
pub struct Discretized {
    pub series: BivariateOrdinalSeries,
    pub breakpoints: Vec<f64>,
}

fn interval_labels(b: &[f64]) -> Vec<String> {
    (0..b.len() - 1)
        .map(|k| {
            let open = if k == 0 { '[' } else { '(' };
            format!("{open}{}, {}]", b[k], b[k + 1])
        })
        .collect()
}

pub fn discretize(raw: &RawSeries, rule: &DiscretizationRule) -> Result<Discretized> {
    let breakpoints = match rule {
        DiscretizationRule::Ordinal => {
            let to_state = |v: &[f64], name: &str| -> Result<Vec<usize>> {
                v.iter()
                    .enumerate()
                    .map(|(t, &y)| {
                        if y >= 1.0 && y.fract() == 0.0 {
                            Ok(y as usize)
                        } else {
                            Err(anyhow!("row {}: {name} value {y} is not a state index 1, 2, ..", t + 1))
                        }
                    })
                    .collect()
            };
            let z1 = to_state(&raw.y1, &raw.names.0)?;
            let z2 = to_state(&raw.y2, &raw.names.1)?;
            return Ok(Discretized {
                series: BivariateOrdinalSeries::from_observed(z1, z2)?,
                breakpoints: Vec::new(),
            });
        }
        DiscretizationRule::Breakpoints(b) => b.clone(),
        DiscretizationRule::Quantiles(k) => quantile_breakpoints(raw, *k)?,
    };
    let map = |v: &[f64], name: &str| -> Result<Vec<usize>> {
        v.iter()
            .enumerate()
            .map(|(t, &y)| {
                state_of(y, &breakpoints).ok_or_else(|| {
                    anyhow!(
                        "row {}: {name} value {y} lies outside [{}, {}]",
                        t + 1,
                        breakpoints[0],
                        breakpoints[breakpoints.len() - 1]
                    )
                })
            })
            .collect()
    };
    // Each series' state space ends at its highest observed state, so an
    // upper interval that one series never reaches does not become an
    // unobservable state.
    let labels = interval_labels(&breakpoints);
    let z1 = map(&raw.y1, &raw.names.0)?;
    let z2 = map(&raw.y2, &raw.names.1)?;
    let series = BivariateOrdinalSeries::from_observed(z1, z2)?;
    let (l1, l2) = (labels[..series.d1()].to_vec(), labels[..series.d2()].to_vec());
    let series = series.with_labels(l1, l2)?;
    Ok(Discretized { series, breakpoints })
}
