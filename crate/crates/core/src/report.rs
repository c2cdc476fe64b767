//! Orchestration of every analysis into a per-instrument stylized-facts
//! report.
//!
//! `run_report` executes the full battery on one price series. Individual
//! stage failures (a degenerate sub-sample, too few quarterly observations,
//! a GARCH fit that cannot proceed) are recorded in the bundle's stage map
//! and never suppress sibling results; only the inability to compute returns
//! at all aborts. The bundle's `metadata` map spells out every numerical
//! convention that affects a reported figure, so mismatches against other
//! software are diagnosable from the report alone.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dependence::{self, AcfResult, LagPairs, Transform};
use crate::density::{self, CurveKind, DensityCurve, QQPoints, ReferenceDensity};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::garch::{self, BandPoint, GarchParams};
use crate::moments::{self, ScanRow, TestResult};
use crate::series::{PriceSeries, TimeScale};

pub const SCHEMA_VERSION: u32 = 1;

/// Report configuration; defaults mirror the reference study (21 Ljung-Box
/// lags, McLeod-Li to 26, t(4) references, k = 2 bands, all four scales).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub lags: usize,
    pub ml_lags: usize,
    pub scales: Vec<TimeScale>,
    pub t_df: f64,
    pub band_k: f64,
    /// Extra Ljung-Box rows on the most recent N observations, per N.
    pub subsample_last: Vec<usize>,
    pub seed: Option<u64>,
    pub garch_enabled: bool,
    pub kde_grid_size: usize,
    /// Histogram bin count; `None` applies Sturges' rule.
    pub histogram_bins: Option<usize>,
    /// Fixed RFC-3339 timestamp for reproducible output (test mode).
    pub fixed_clock: Option<String>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            lags: dependence::DEFAULT_LAGS,
            ml_lags: dependence::DEFAULT_ML_LAGS,
            scales: TimeScale::ALL.to_vec(),
            t_df: 4.0,
            band_k: 2.0,
            subsample_last: Vec::new(),
            seed: None,
            garch_enabled: true,
            kde_grid_size: 512,
            histogram_bins: None,
            fixed_clock: None,
        }
    }
}

/// Status of one report stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Skipped { reason: String },
    Failed { error: String },
}

/// McLeod-Li curve point (one Ljung-Box on squares per lag count).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McLeodLiPoint {
    pub lags: usize,
    pub statistic: f64,
    pub p_value: f64,
}

/// Conditional-volatility curve point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondVolPoint {
    pub date: chrono::NaiveDate,
    pub sigma: f64,
}

/// GARCH section of the report: fitted parameters plus the plot-ready
/// conditional-volatility and band curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchReport {
    pub params: GarchParams,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    pub low_sample: bool,
    pub mean_subtracted: f64,
    pub unconditional_std: f64,
    pub cond_volatility: Vec<CondVolPoint>,
    pub volatility_bands: Vec<BandPoint>,
}

/// The complete machine-readable stylized-facts report for one instrument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub instrument_id: String,
    pub generated_at: String,
    pub n_prices: usize,
    pub n_returns: usize,
    pub first_date: chrono::NaiveDate,
    pub last_date: chrono::NaiveDate,
    /// One row per time scale: summary stats plus Jarque-Bera.
    pub aggregation_scan: Vec<ScanRow>,
    /// Daily-scale hypothesis tests: Jarque-Bera, Kolmogorov-Smirnov, and
    /// Ljung-Box per transform and sub-sample.
    pub tests: Vec<TestResult>,
    /// ACF per transform at the configured lag count.
    pub acf: Vec<AcfResult>,
    pub mcleod_li: Vec<McLeodLiPoint>,
    /// Histogram and KDE curves (the KDE carries the Student-t reference).
    pub density: Vec<DensityCurve>,
    /// QQ points against the fitted normal and the standardized Student-t.
    pub qq: Vec<QQPoints>,
    pub lag_pairs: LagPairs,
    pub garch: Option<GarchReport>,
    pub stages: BTreeMap<String, StageStatus>,
    pub metadata: BTreeMap<String, String>,
}

impl ReportBundle {
    /// True when every stage ran cleanly.
    pub fn all_ok(&self) -> bool {
        self.stages.values().all(|s| matches!(s, StageStatus::Ok))
    }
}

fn sturges_bins(n: usize) -> usize {
    ((n as f64).log2().ceil() as usize + 1).max(1)
}

/// Runs the full stylized-facts battery over a price series.
///
/// Errors only when log returns cannot be computed at all; every later
/// stage failure is recorded in `stages` instead.
pub fn run_report(prices: &PriceSeries, config: &ReportConfig) -> Result<ReportBundle> {
    let returns = prices.log_returns()?;
    let n = returns.len();

    let mut stages: BTreeMap<String, StageStatus> = BTreeMap::new();
    let mut tests: Vec<TestResult> = Vec::new();

    let mut record = |stages: &mut BTreeMap<String, StageStatus>, name: &str, err: &Error| {
        stages.insert(name.to_string(), StageStatus::Failed { error: err.to_string() });
    };

    // Moments and normality on the daily scale.
    match moments::jarque_bera(&returns) {
        Ok(t) => {
            stages.insert("jarque_bera".into(), StageStatus::Ok);
            tests.push(t);
        }
        Err(e) => record(&mut stages, "jarque_bera", &e),
    }

    let summary = moments::summarize(&returns);
    match &summary {
        Ok(s) if !s.is_degenerate() => {
            let reference = Distribution::normal(s.mean, s.std_dev)?;
            match moments::kolmogorov_smirnov(&returns, &reference) {
                Ok(t) => {
                    stages.insert("kolmogorov_smirnov".into(), StageStatus::Ok);
                    tests.push(t);
                }
                Err(e) => record(&mut stages, "kolmogorov_smirnov", &e),
            }
        }
        Ok(_) => {
            stages.insert(
                "kolmogorov_smirnov".into(),
                StageStatus::Skipped { reason: "degenerate series (zero variance)".into() },
            );
        }
        Err(e) => record(&mut stages, "kolmogorov_smirnov", e),
    }

    // Aggregational Gaussianity scan.
    let aggregation_scan = match moments::aggregation_scan(prices, &config.scales) {
        Ok(rows) => {
            stages.insert("aggregation_scan".into(), StageStatus::Ok);
            rows
        }
        Err(e) => {
            record(&mut stages, "aggregation_scan", &e);
            Vec::new()
        }
    };

    // Autocorrelations and portmanteau tests per transform.
    let mut acf_results = Vec::new();
    for transform in Transform::ALL {
        let stage = format!("acf_{}", transform.label());
        match dependence::acf(&returns, config.lags.min(n.saturating_sub(1)).max(1), transform) {
            Ok(a) => {
                stages.insert(stage, StageStatus::Ok);
                acf_results.push(a);
            }
            Err(e) => record(&mut stages, &stage, &e),
        }

        let stage = format!("ljung_box_{}", transform.label());
        match dependence::ljung_box(&returns, config.lags, transform) {
            Ok(t) => {
                stages.insert(stage.clone(), StageStatus::Ok);
                tests.push(t);
            }
            Err(e) => record(&mut stages, &stage, &e),
        }

        for &k in &config.subsample_last {
            let stage = format!("ljung_box_{}_last_{}", transform.label(), k);
            let result = returns
                .last_n(k)
                .and_then(|sub| dependence::ljung_box(&sub, config.lags, transform));
            match result {
                Ok(mut t) => {
                    t.test_name = format!("{}[last {k}]", t.test_name);
                    stages.insert(stage, StageStatus::Ok);
                    tests.push(t);
                }
                Err(e) => record(&mut stages, &stage, &e),
            }
        }
    }

    // McLeod-Li curve.
    let mcleod_li = match dependence::mcleod_li(&returns, config.ml_lags) {
        Ok(points) => {
            stages.insert("mcleod_li".into(), StageStatus::Ok);
            points
                .into_iter()
                .map(|(lags, t)| McLeodLiPoint {
                    lags,
                    statistic: t.statistic,
                    p_value: t.p_value,
                })
                .collect()
        }
        Err(e) => {
            record(&mut stages, "mcleod_li", &e);
            Vec::new()
        }
    };

    // Density diagnostics.
    let bins = config.histogram_bins.unwrap_or_else(|| sturges_bins(n));
    let mut density_curves = Vec::new();
    match density::histogram(&returns, bins) {
        Ok(c) => {
            stages.insert("histogram".into(), StageStatus::Ok);
            density_curves.push(c);
        }
        Err(e) => record(&mut stages, "histogram", &e),
    }
    match density::kde_with_reference(
        &returns,
        config.kde_grid_size,
        None,
        ReferenceDensity::StandardizedStudentT { df: config.t_df },
    ) {
        Ok(c) => {
            stages.insert("kde".into(), StageStatus::Ok);
            density_curves.push(c);
        }
        Err(e) => record(&mut stages, "kde", &e),
    }

    // QQ points against the fitted normal and the standardized Student-t.
    let mut qq = Vec::new();
    match &summary {
        Ok(s) if !s.is_degenerate() => {
            let normal = Distribution::normal(s.mean, s.std_dev)?;
            match density::qq_points(&returns, &normal) {
                Ok(q) => {
                    stages.insert("qq_normal".into(), StageStatus::Ok);
                    qq.push(q);
                }
                Err(e) => record(&mut stages, "qq_normal", &e),
            }
        }
        _ => {
            stages.insert(
                "qq_normal".into(),
                StageStatus::Skipped { reason: "degenerate series (zero variance)".into() },
            );
        }
    }
    match Distribution::student_t(config.t_df)
        .and_then(|t| density::qq_points(&returns, &t))
    {
        Ok(q) => {
            stages.insert("qq_student_t".into(), StageStatus::Ok);
            qq.push(q);
        }
        Err(e) => record(&mut stages, "qq_student_t", &e),
    }

    // Lag pairs over the full series.
    let lag_pairs = dependence::lag_pairs(&returns, None);
    stages.insert("lag_pairs".into(), StageStatus::Ok);

    // GARCH fit with conditional-volatility and band curves.
    let garch_report = if !config.garch_enabled {
        stages.insert(
            "garch_fit".into(),
            StageStatus::Skipped { reason: "disabled by configuration".into() },
        );
        None
    } else {
        match garch::garch_fit(&returns) {
            Ok(fit) => match garch::volatility_bands(&returns, &fit, config.band_k) {
                Ok(bands) => {
                    stages.insert("garch_fit".into(), StageStatus::Ok);
                    let uncond_sd = {
                        let values = returns.values();
                        let eps: Vec<f64> =
                            values.iter().map(|v| v - fit.mean_subtracted).collect();
                        (eps.iter().map(|e| e * e).sum::<f64>() / eps.len() as f64).sqrt()
                    };
                    let cond_volatility = returns
                        .observations()
                        .iter()
                        .zip(fit.cond_volatility())
                        .map(|(obs, sigma)| CondVolPoint { date: obs.date, sigma })
                        .collect();
                    Some(GarchReport {
                        params: fit.params,
                        log_likelihood: fit.log_likelihood,
                        iterations: fit.iterations,
                        converged: fit.converged,
                        low_sample: fit.low_sample,
                        mean_subtracted: fit.mean_subtracted,
                        unconditional_std: uncond_sd,
                        cond_volatility,
                        volatility_bands: bands,
                    })
                }
                Err(e) => {
                    record(&mut stages, "garch_fit", &e);
                    None
                }
            },
            Err(e) => {
                record(&mut stages, "garch_fit", &e);
                None
            }
        }
    };

    let generated_at = config
        .fixed_clock
        .clone()
        .unwrap_or_else(|| chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true));

    Ok(ReportBundle {
        schema_version: SCHEMA_VERSION,
        instrument_id: prices.instrument_id().to_string(),
        generated_at,
        n_prices: prices.len(),
        n_returns: n,
        first_date: prices.first_date(),
        last_date: prices.last_date(),
        aggregation_scan,
        tests,
        acf: acf_results,
        mcleod_li,
        density: density_curves,
        qq,
        lag_pairs,
        garch: garch_report,
        stages,
        metadata: build_metadata(config, bins),
    })
}

/// Every convention that affects a number in the report, keyed for lookup.
fn build_metadata(config: &ReportConfig, bins: usize) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert(
        "series.return_units".into(),
        "percent log returns: 100 * (ln P_t - ln P_{t-1})".into(),
    );
    m.insert(
        "series.return_dating".into(),
        "each return is dated at the later endpoint of its interval".into(),
    );
    m.insert(
        "series.resample_rule".into(),
        "last close of each calendar period; ISO weeks, calendar months and quarters; empty periods skipped".into(),
    );
    m.insert(
        "moments.std_dev_divisor".into(),
        "n-1 (sample standard deviation)".into(),
    );
    m.insert(
        "moments.skewness_kurtosis_divisor".into(),
        "n (population moments, with divisor-n standard deviation inside the ratios)".into(),
    );
    m.insert(
        "moments.kurtosis_convention".into(),
        "raw kurtosis (normal = 3); Jarque-Bera subtracts 3 internally".into(),
    );
    m.insert(
        "moments.median_convention".into(),
        "even-length samples: mean of the two central order statistics".into(),
    );
    m.insert(
        "normality.ks_reference".into(),
        "normal(sample mean, sample std dev), fixed; estimated parameters make the asymptotic p-value conservative".into(),
    );
    m.insert(
        "acf.denominator".into(),
        "full-sample variance with divisor n (biased, positive-definite estimator)".into(),
    );
    m.insert(
        "acf.band".into(),
        "+/- z_{0.975}/sqrt(n), Bartlett i.i.d. approximation (flat band)".into(),
    );
    m.insert(
        "ljung_box.df".into(),
        "m, unadjusted (test applied to raw series, not model residuals)".into(),
    );
    m.insert("density.kde_kernel".into(), "gaussian".into());
    m.insert(
        "density.kde_bandwidth_rule".into(),
        "silverman: 0.9 * min(sd, IQR/1.34) * n^(-1/5)".into(),
    );
    m.insert(
        "density.qq_plotting_position".into(),
        "(i - 0.5)/n (Hazen)".into(),
    );
    m.insert(
        "density.t_reference_scaling".into(),
        "student-t reference standardized to unit variance: quantiles and density scaled by sqrt((df-2)/df)".into(),
    );
    m.insert(
        "garch.model".into(),
        "GARCH(1,1): sigma_t^2 = omega + alpha*eps_{t-1}^2 + beta*sigma_{t-1}^2, gaussian quasi-likelihood".into(),
    );
    m.insert(
        "garch.sigma1_init".into(),
        "sigma_1^2 = population variance of demeaned returns".into(),
    );
    m.insert(
        "garch.mean_equation".into(),
        "constant: sample mean subtracted, no ARMA terms".into(),
    );
    m.insert(
        "garch.optimizer".into(),
        "nelder-mead on (ln omega, logistic-simplex(alpha, beta)); 5 fixed starts; spread tolerance 1e-8; max 2000 iterations per start".into(),
    );
    m.insert("report.lags".into(), config.lags.to_string());
    m.insert("report.ml_lags".into(), config.ml_lags.to_string());
    m.insert(
        "report.scales".into(),
        config
            .scales
            .iter()
            .map(|s| s.label())
            .collect::<Vec<_>>()
            .join(","),
    );
    m.insert("report.t_df".into(), config.t_df.to_string());
    m.insert("report.band_k".into(), config.band_k.to_string());
    m.insert(
        "report.subsample_last".into(),
        if config.subsample_last.is_empty() {
            "none".into()
        } else {
            config
                .subsample_last
                .iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",")
        },
    );
    m.insert(
        "report.seed".into(),
        config.seed.map_or("none".into(), |s| s.to_string()),
    );
    m.insert(
        "report.histogram_bins".into(),
        match config.histogram_bins {
            Some(b) => b.to_string(),
            None => format!("{bins} (Sturges' rule)"),
        },
    );
    m.insert("report.kde_grid_size".into(), config.kde_grid_size.to_string());
    m
}

/// Keys that must always be present in the metadata map.
pub const REQUIRED_METADATA_KEYS: [&str; 22] = [
    "series.return_units",
    "series.return_dating",
    "series.resample_rule",
    "moments.std_dev_divisor",
    "moments.skewness_kurtosis_divisor",
    "moments.kurtosis_convention",
    "moments.median_convention",
    "normality.ks_reference",
    "acf.denominator",
    "acf.band",
    "ljung_box.df",
    "density.kde_kernel",
    "density.kde_bandwidth_rule",
    "density.qq_plotting_position",
    "density.t_reference_scaling",
    "garch.model",
    "garch.sigma1_init",
    "garch.mean_equation",
    "garch.optimizer",
    "report.lags",
    "report.ml_lags",
    "report.scales",
];

/// Serializes a bundle to a deterministic, self-describing JSON document.
pub fn to_json(bundle: &ReportBundle) -> Result<String> {
    serde_json::to_string_pretty(bundle)
        .map_err(|e| Error::Io(std::io::Error::other(e)))
}

/// Parses a bundle back from JSON.
pub fn from_json(s: &str) -> Result<ReportBundle> {
    serde_json::from_str(s).map_err(|e| {
        Error::Ingest { row: None, message: format!("cannot parse report JSON: {e}") }
    })
}

pub(crate) fn density_kind_name(kind: CurveKind) -> &'static str {
    match kind {
        CurveKind::Histogram => "histogram",
        CurveKind::Kde => "kde",
    }
}
