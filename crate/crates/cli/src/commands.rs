//! One function per subcommand. Each writes its files under the configured
//! output directory and returns a human-readable summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bdar::forecast::{forecast, ForecastResult};
use bdar::inference::{
    conditional_loglik, fit, fit_variants, kendall_tau, likelihood_ratio_test, run_replicates, serial_kendall_tau,
    FitReport, LrtResult, ReplicateStudy,
};
use bdar::jointdiscrete::ProbMatrix;
use bdar::model::{simulate, Bdar1Params, BivariateOrdinalSeries, Variant};
use bdar::rng::substream;
use serde::Serialize;

use crate::config::RunConfig;
use crate::data::{discretize, ingest, Discretized, RawSeries};

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("cannot create output directory {}", cfg.output_dir.display()))?;
    Ok(&cfg.output_dir)
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn load_raw(cfg: &RunConfig) -> Result<RawSeries> {
    let (a, b) = cfg.column_pair()?;
    ingest(cfg.input()?, a, b, cfg.time_column.as_deref())
}

fn load_ordinal(cfg: &RunConfig) -> Result<(RawSeries, Discretized)> {
    let raw = load_raw(cfg)?;
    let d = discretize(&raw, &cfg.rule()?)?;
    Ok((raw, d))
}

pub fn load_params(path: &Path) -> Result<Bdar1Params> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read parameter file {}", path.display()))?;
    Bdar1Params::from_json(&text).with_context(|| format!("invalid parameters in {}", path.display()))
}

fn frequencies(series: &BivariateOrdinalSeries) -> (Vec<usize>, Vec<usize>) {
    series.state_counts()
}

/// `ingest`: read and summarize the two raw columns.
pub fn run_ingest(cfg: &RunConfig) -> Result<String> {
    let raw = load_raw(cfg)?;
    let mut s = String::new();
    writeln!(
        s,
        "{} rows, time {} .. {}",
        raw.len(),
        raw.time[0],
        raw.time[raw.len() - 1]
    )?;
    for (name, v) in [(&raw.names.0, &raw.y1), (&raw.names.1, &raw.y2)] {
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        writeln!(s, "{name}: min {min} max {max} mean {mean:.4}")?;
    }
    Ok(s)
}

/// `discretize`: write `ordinal.csv` and `breakpoints.json`.
pub fn run_discretize(cfg: &RunConfig) -> Result<String> {
    let (raw, d) = load_ordinal(cfg)?;
    let dir = out_dir(cfg)?;
    let mut w = csv_writer(&dir.join("ordinal.csv"))?;
    w.write_record(["time", "z1", "z2"])?;
    for t in 0..d.series.len() {
        let (a, b) = d.series.pair(t);
        w.write_record([raw.time[t].clone(), a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    write_json(&dir.join("breakpoints.json"), &d.breakpoints)?;

    let (c1, c2) = frequencies(&d.series);
    let mut s = String::new();
    writeln!(s, "breakpoints: {:?}", d.breakpoints)?;
    writeln!(s, "state counts {}: {c1:?}", raw.names.0)?;
    writeln!(s, "state counts {}: {c2:?}", raw.names.1)?;
    Ok(s)
}

/// Association diagnostics of an ordinal pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub length: usize,
    pub tau_cross: f64,
    pub tau_serial1: f64,
    pub tau_serial2: f64,
    pub counts1: Vec<usize>,
    pub counts2: Vec<usize>,
}

pub fn diagnostics(series: &BivariateOrdinalSeries) -> Result<Diagnostics> {
    let (counts1, counts2) = frequencies(series);
    Ok(Diagnostics {
        length: series.len(),
        tau_cross: kendall_tau(series.z1(), series.z2())?,
        tau_serial1: serial_kendall_tau(series.z1(), 1)?,
        tau_serial2: serial_kendall_tau(series.z2(), 1)?,
        counts1,
        counts2,
    })
}

/// `diagnose`: Kendall's tau across and within series; writes `diagnostics.json`.
pub fn run_diagnose(cfg: &RunConfig) -> Result<String> {
    let (_, d) = load_ordinal(cfg)?;
    let diag = diagnostics(&d.series)?;
    write_json(&out_dir(cfg)?.join("diagnostics.json"), &diag)?;
    Ok(format!(
        "tau(z1, z2) = {:.4}\ntau(z1_t, z1_t-1) = {:.4}\ntau(z2_t, z2_t-1) = {:.4}\ncounts z1 {:?}\ncounts z2 {:?}\n",
        diag.tau_cross, diag.tau_serial1, diag.tau_serial2, diag.counts1, diag.counts2
    ))
}

fn write_fit_files(dir: &Path, report: &FitReport) -> Result<()> {
    let label = report.variant().label();
    write_json(&dir.join(format!("fit_{label}.json")), report)?;
    let mut params = report.params_hat.to_json();
    params.push('\n');
    fs::write(dir.join(format!("params_{label}.json")), params)?;
    Ok(())
}

fn describe_fit(report: &FitReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}: loglik {:.4}  k {}  AIC {:.3}  BIC {:.3}  converged {}",
        report.variant(),
        report.loglik,
        report.n_params,
        report.aic,
        report.bic,
        report.converged
    );
    for (k, name) in report.param_names.iter().enumerate() {
        let se = report
            .std_errors
            .as_ref()
            .map_or("n/a".to_string(), |v| format!("{:.4}", v[k]));
        let _ = writeln!(s, "  {name:<12} {:>12.4}  ({se})", report.estimates[k]);
    }
    s
}

/// `fit`: fit exactly one variant; writes `fit_Mk.json` and `params_Mk.json`.
pub fn run_fit(cfg: &RunConfig) -> Result<String> {
    let variants = cfg.variant_list()?;
    let [variant] = variants.as_slice() else {
        bail!(
            "`fit` takes exactly one variant (got {}); use `compare` for several",
            variants.len()
        );
    };
    let (alpha, eps) = cfg.families()?;
    let (_, d) = load_ordinal(cfg)?;
    let report = fit(&d.series, *variant, alpha, eps, &cfg.fit)?;
    write_fit_files(out_dir(cfg)?, &report)?;
    Ok(describe_fit(&report))
}

/// Fitted models, model selection and the nested likelihood-ratio tests.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub fits: Vec<(Variant, std::result::Result<FitReport, String>)>,
    pub best_bic: Option<Variant>,
    pub best_aic: Option<Variant>,
    pub tests: Vec<(Variant, Variant, LrtResult)>,
}

pub fn compare(series: &BivariateOrdinalSeries, cfg: &RunConfig) -> Result<Comparison> {
    let (alpha, eps) = cfg.families()?;
    let fits: Vec<(Variant, std::result::Result<FitReport, String>)> =
        fit_variants(series, &cfg.variant_list()?, alpha, eps, &cfg.fit)
            .into_iter()
            .map(|(v, r)| (v, r.map_err(|e| e.to_string())))
            .collect();
    let ok: Vec<&FitReport> = fits.iter().filter_map(|(_, r)| r.as_ref().ok()).collect();
    // ties keep the earlier (listed first) model
    let pick = |key: fn(&FitReport) -> f64| {
        ok.iter()
            .fold(None::<&FitReport>, |best, r| match best {
                Some(b) if key(b) <= key(r) => Some(b),
                _ => Some(r),
            })
            .map(|r| r.variant())
    };
    let best_bic = pick(|r| r.bic);
    let best_aic = pick(|r| r.aic);
    let mut tests = Vec::new();
    for nested in &ok {
        for full in &ok {
            if nested.variant().is_nested_in(full.variant()) {
                tests.push((nested.variant(), full.variant(), likelihood_ratio_test(full, nested)?));
            }
        }
    }
    Ok(Comparison {
        fits,
        best_bic,
        best_aic,
        tests,
    })
}

/// `compare`: fit every requested variant and write `estimates.csv`,
/// `criteria.csv`, `lrt.csv`, `decision.txt` and per-model JSON files.
pub fn run_compare(cfg: &RunConfig) -> Result<String> {
    let (_, d) = load_ordinal(cfg)?;
    let cmp = compare(&d.series, cfg)?;
    let dir = out_dir(cfg)?;

    let mut est = csv_writer(&dir.join("estimates.csv"))?;
    est.write_record(["model", "param", "estimate", "std_error"])?;
    let mut crit = csv_writer(&dir.join("criteria.csv"))?;
    crit.write_record(["model", "loglik", "n_params", "aic", "bic"])?;
    for (_, r) in &cmp.fits {
        let Ok(r) = r else { continue };
        let label = r.variant().label();
        for (k, name) in r.param_names.iter().enumerate() {
            let se = r.std_errors.as_ref().map_or(String::new(), |v| v[k].to_string());
            est.write_record([label, name, &r.estimates[k].to_string(), &se])?;
        }
        crit.write_record([
            label.to_string(),
            r.loglik.to_string(),
            r.n_params.to_string(),
            r.aic.to_string(),
            r.bic.to_string(),
        ])?;
        write_fit_files(dir, r)?;
    }
    est.flush()?;
    crit.flush()?;

    let mut lrt = csv_writer(&dir.join("lrt.csv"))?;
    lrt.write_record(["nested", "full", "statistic", "df", "p_value"])?;
    for (n, f, t) in &cmp.tests {
        lrt.write_record([
            n.label().to_string(),
            f.label().to_string(),
            t.statistic.to_string(),
            t.df.to_string(),
            t.p_value.to_string(),
        ])?;
    }
    lrt.flush()?;

    let mut s = String::new();
    for (v, r) in &cmp.fits {
        match r {
            Ok(r) => s.push_str(&describe_fit(r)),
            Err(e) => writeln!(s, "{v}: fit failed: {e}")?,
        }
    }
    let show = |v: Option<Variant>| v.map_or("none".to_string(), |v| v.label().to_string());
    writeln!(s, "best by BIC: {}", show(cmp.best_bic))?;
    writeln!(s, "best by AIC: {}", show(cmp.best_aic))?;
    for (n, f, t) in &cmp.tests {
        let verdict = if t.p_value < 0.05 { "reject" } else { "keep" };
        writeln!(
            s,
            "LRT {n} vs {f}: statistic {:.4}, df {}, p-value {:.4} -> {verdict} {n} at 5%",
            t.statistic, t.df, t.p_value
        )?;
    }
    fs::write(dir.join("decision.txt"), &s)?;
    Ok(s)
}

/// `simulate`: write `simulated.csv` from a parameter file.
pub fn run_simulate(cfg: &RunConfig) -> Result<String> {
    let params = load_params(cfg.params_path()?)?;
    let mut rng = substream(cfg.seed, "simulate", 0);
    let series = simulate(&params, cfg.length, cfg.burn_in, &mut rng)?;
    let path = out_dir(cfg)?.join("simulated.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["t", "z1", "z2"])?;
    for t in 0..series.len() {
        let (a, b) = series.pair(t);
        w.write_record([(t + 1).to_string(), a.to_string(), b.to_string()])?;
    }
    w.flush()?;
    let ll = conditional_loglik(&params, &series)?;
    Ok(format!(
        "wrote {} observations to {} (loglik {ll:.4})\n",
        series.len(),
        path.display()
    ))
}

#[derive(Serialize)]
struct JointStep<'a> {
    h: usize,
    joint: &'a ProbMatrix,
}

fn write_forecast(dir: &Path, fc: &ForecastResult) -> Result<Vec<PathBuf>> {
    let paths = [
        dir.join("forecast.json"),
        dir.join("forecast_marginals.csv"),
        dir.join("forecast_modal.csv"),
        dir.join("forecast_joint.json"),
    ];
    write_json(&paths[0], fc)?;

    let (d1, d2) = (fc.marginal1[0].len(), fc.marginal2[0].len());
    let mut w = csv_writer(&paths[1])?;
    let mut header = vec!["h".to_string()];
    header.extend((1..=d1).map(|k| format!("z1_{k}")));
    header.extend((1..=d2).map(|k| format!("z2_{k}")));
    w.write_record(&header)?;
    for h in 0..fc.horizon {
        let mut row = vec![(h + 1).to_string()];
        row.extend(fc.marginal1[h].iter().map(|f| f.to_string()));
        row.extend(fc.marginal2[h].iter().map(|f| f.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;

    let mut w = csv_writer(&paths[2])?;
    w.write_record(["h", "modal_z1", "modal_z2", "modal_joint"])?;
    for h in 0..fc.horizon {
        let (a, b) = fc.modal_joint[h];
        w.write_record([
            (h + 1).to_string(),
            fc.modal1[h].to_string(),
            fc.modal2[h].to_string(),
            format!("({a},{b})"),
        ])?;
    }
    w.flush()?;

    let steps: Vec<JointStep> = fc
        .joint
        .iter()
        .enumerate()
        .map(|(h, joint)| JointStep { h: h + 1, joint })
        .collect();
    write_json(&paths[3], &steps)?;
    Ok(paths.to_vec())
}

/// `forecast`: Monte-Carlo forecast from a parameter file. The start is
/// `last_state` if set, otherwise the final observation of the input.
pub fn run_forecast(cfg: &RunConfig) -> Result<String> {
    cfg.validate()?;
    let params = load_params(cfg.params_path()?)?;
    let last = match cfg.last_state {
        Some(s) => s,
        None => {
            let (_, d) = load_ordinal(cfg).context("no last_state given and the input could not be read")?;
            d.series.pair(d.series.len() - 1)
        }
    };
    let fc = forecast(&params, last, cfg.horizon, cfg.n_sims, cfg.seed)?;
    write_forecast(out_dir(cfg)?, &fc)?;

    let mut s = String::new();
    writeln!(s, "forecast from {last:?}, {} simulations, seed {}", fc.n_sims, fc.seed)?;
    writeln!(s, "{:>3} {:>8} {:>8} {:>10}", "h", "modal_z1", "modal_z2", "joint")?;
    for h in 0..fc.horizon {
        let (a, b) = fc.modal_joint[h];
        writeln!(
            s,
            "{:>3} {:>8} {:>8} {:>10}",
            h + 1,
            fc.modal1[h],
            fc.modal2[h],
            format!("({a},{b})")
        )?;
    }
    Ok(s)
}

/// `replicate-study`: simulate and refit; writes the long-format
/// `replicates_long.csv` (one row per replicate and parameter) and
/// `replicate_summary.csv`.
pub fn run_replicate_study(cfg: &RunConfig) -> Result<String> {
    let truth = load_params(cfg.params_path()?)?;
    if cfg.lengths.is_empty() || cfg.replicates == 0 {
        bail!("a replicate study needs at least one length and one replicate");
    }
    let study = ReplicateStudy {
        truth,
        lengths: cfg.lengths.clone(),
        replicates: cfg.replicates,
        seed: cfg.seed,
        options: cfg.fit,
    };
    let names = study.param_names()?;
    let truth = study.truth_vector()?;
    let records = run_replicates(&study);
    let dir = out_dir(cfg)?;

    let mut w = csv_writer(&dir.join("replicates_long.csv"))?;
    w.write_record(["length", "replicate", "param", "estimate", "truth"])?;
    let mut failures = 0;
    for r in &records {
        if r.error.is_some() {
            failures += 1;
            continue;
        }
        for (k, name) in names.iter().enumerate() {
            w.write_record([
                r.length.to_string(),
                r.replicate.to_string(),
                name.clone(),
                r.estimates[k].to_string(),
                truth[k].to_string(),
            ])?;
        }
    }
    w.flush()?;

    let summary = study.summarize(&records)?;
    let mut w = csv_writer(&dir.join("replicate_summary.csv"))?;
    w.write_record(["length", "param", "truth", "median", "iqr", "median_abs_error", "n_ok"])?;
    let mut s = String::new();
    writeln!(
        s,
        "{:>6} {:<12} {:>10} {:>10} {:>10} {:>10}",
        "T", "param", "truth", "median", "IQR", "MAE"
    )?;
    for p in &summary {
        w.write_record([
            p.length.to_string(),
            p.param.clone(),
            p.truth.to_string(),
            p.median.to_string(),
            p.iqr.to_string(),
            p.median_abs_error.to_string(),
            p.n_ok.to_string(),
        ])?;
        writeln!(
            s,
            "{:>6} {:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            p.length, p.param, p.truth, p.median, p.iqr, p.median_abs_error
        )?;
    }
    w.flush()?;
    if failures > 0 {
        writeln!(s, "{failures} replicate(s) failed to fit and were skipped")?;
    }
    Ok(s)
}
