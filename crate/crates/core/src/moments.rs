//! Summary statistics, skewness/kurtosis estimators, Jarque-Bera and
//! Kolmogorov-Smirnov normality tests, and the aggregational-Gaussianity scan
//! across time scales.
//!
//! Conventions: skewness and kurtosis are population moment ratios (divisor
//! `n`, with the standard deviation inside the ratio also divisor `n`);
//! kurtosis is reported raw, so the normal reference value is 3. The reported
//! `std_dev` column is the sample standard deviation (divisor `n - 1`).

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::series::{PriceSeries, ReturnSeries, TimeScale};

/// The seven summary columns for one return series.
///
/// `skewness` and `kurtosis` are `None` when the series is degenerate
/// (zero variance), in which case the moment ratios are undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
    pub std_dev: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl SummaryStats {
    pub fn is_degenerate(&self) -> bool {
        self.skewness.is_none()
    }
}

/// Outcome of a hypothesis test: statistic, null distribution metadata, and
/// the p-value consistent with them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    pub df: Option<f64>,
    pub p_value: f64,
    pub null_hypothesis: String,
    pub sample_size: usize,
}

/// Central moments (mean, m2, m3, m4) with divisor `n`.
pub(crate) fn central_moments(x: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    (mean, m2 / n, m3 / n, m4 / n)
}

pub(crate) fn sample_std_dev(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|&v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1.0)).sqrt()
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Summary statistics over the values of a return series (`n >= 2`).
pub fn summarize(r: &ReturnSeries) -> Result<SummaryStats> {
    summarize_values(&r.values())
}

pub(crate) fn summarize_values(values: &[f64]) -> Result<SummaryStats> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: values.len(),
        });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let (mean, m2, m3, m4) = central_moments(values);
    let (skewness, kurtosis) = if m2 > 0.0 {
        let sd = m2.sqrt();
        (Some(m3 / (sd * sd * sd)), Some(m4 / (m2 * m2)))
    } else {
        (None, None)
    };
    Ok(SummaryStats {
        n: values.len(),
        mean,
        median: median_of_sorted(&sorted),
        min: sorted[0],
        max: sorted[sorted.len() - 1],
        std_dev: sample_std_dev(values),
        skewness,
        kurtosis,
    })
}

/// Jarque-Bera statistic and p-value from the sample skewness, raw kurtosis
/// and sample size: `JB = T (S^2/6 + (K-3)^2/24)`, chi-square with 2 df.
pub fn jarque_bera_parts(skewness: f64, kurtosis: f64, n: usize) -> (f64, f64) {
    let t = n as f64;
    let jb = t * (skewness * skewness / 6.0 + (kurtosis - 3.0) * (kurtosis - 3.0) / 24.0);
    let p = 1.0 - Distribution::ChiSquare { df: 2.0 }.cdf(jb);
    (jb, p)
}

/// Jarque-Bera normality test (`n >= 8`; zero variance is an error).
pub fn jarque_bera(r: &ReturnSeries) -> Result<TestResult> {
    jarque_bera_values(&r.values())
}

pub(crate) fn jarque_bera_values(values: &[f64]) -> Result<TestResult> {
    if values.len() < 8 {
        return Err(Error::InsufficientData {
            needed: 8,
            got: values.len(),
        });
    }
    let (_, m2, m3, m4) = central_moments(values);
    if m2 <= 0.0 {
        return Err(Error::degenerate(
            "zero variance: Jarque-Bera moments undefined",
        ));
    }
    let sd = m2.sqrt();
    let skew = m3 / (sd * sd * sd);
    let kurt = m4 / (m2 * m2);
    let (jb, p) = jarque_bera_parts(skew, kurt, values.len());
    Ok(TestResult {
        test_name: "jarque_bera".to_string(),
        statistic: jb,
        df: Some(2.0),
        p_value: p,
        null_hypothesis: "returns are normally distributed".to_string(),
        sample_size: values.len(),
    })
}

/// One-sample Kolmogorov-Smirnov test against a fixed, fully parameterized
/// reference distribution. The p-value uses the asymptotic Kolmogorov
/// distribution of `sqrt(n) * D`; when the reference parameters were
/// estimated from the same sample the p-value is conservative.
pub fn kolmogorov_smirnov(r: &ReturnSeries, reference: &Distribution) -> Result<TestResult> {
    kolmogorov_smirnov_values(&r.values(), reference)
}

pub(crate) fn kolmogorov_smirnov_values(
    values: &[f64],
    reference: &Distribution,
) -> Result<TestResult> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let nf = n as f64;
    let mut d = 0.0_f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = reference.cdf(x);
        let upper = (i + 1) as f64 / nf - f;
        let lower = f - i as f64 / nf;
        d = d.max(upper).max(lower);
    }
    let lambda = nf.sqrt() * d;
    let p = 1.0 - crate::dist::kolmogorov_cdf(lambda);
    Ok(TestResult {
        test_name: "kolmogorov_smirnov".to_string(),
        statistic: d,
        df: None,
        p_value: p,
        null_hypothesis: format!("returns are distributed as {}", reference.label()),
        sample_size: n,
    })
}

/// Why a scan row carries no Jarque-Bera result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum ScanOutcome {
    Test(TestResult),
    TooFewObservations { n: usize },
    DegenerateSeries,
}

/// One row of the aggregational-Gaussianity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub scale: TimeScale,
    pub n: usize,
    pub summary: Option<SummaryStats>,
    pub jarque_bera: ScanOutcome,
}

/// Resamples the price series to each scale, recomputes log returns, and
/// summarizes them next to a Jarque-Bera test. Scales yielding fewer than 8
/// returns, and degenerate series, are emitted as flagged rows instead of
/// aborting the scan.
pub fn aggregation_scan(p: &PriceSeries, scales: &[TimeScale]) -> Result<Vec<ScanRow>> {
    if scales.is_empty() {
        return Err(Error::domain("aggregation scan requires at least one scale"));
    }
    let coarsest = *scales.iter().max().expect("non-empty");
    let coarse = p.resample(coarsest)?;
    if coarse.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: coarse.len(),
        });
    }

    let mut rows = Vec::with_capacity(scales.len());
    for &scale in scales {
        let returns = p.resample(scale).and_then(|rs| rs.log_returns());
        let row = match returns {
            Ok(r) => {
                let values = r.values();
                let summary = summarize_values(&values).ok();
                let jb = if values.len() < 8 {
                    ScanOutcome::TooFewObservations { n: values.len() }
                } else {
                    match jarque_bera_values(&values) {
                        Ok(t) => ScanOutcome::Test(t),
                        Err(Error::DegenerateSeries(_)) => ScanOutcome::DegenerateSeries,
                        Err(e) => return Err(e),
                    }
                };
                ScanRow {
                    scale,
                    n: values.len(),
                    summary,
                    jarque_bera: jb,
                }
            }
            Err(_) => ScanRow {
                scale,
                n: 0,
                summary: None,
                jarque_bera: ScanOutcome::TooFewObservations { n: 0 },
            },
        };
        rows.push(row);
    }
    Ok(rows)
}
