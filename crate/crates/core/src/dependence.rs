//! Autocorrelation function with confidence bands, Ljung-Box and McLeod-Li
//! portmanteau tests on returns and their square/absolute transforms, and
//! lag-pair extraction for cluster plots.
//!
//! The ACF denominator is the full-sample variance with divisor `n` (the
//! standard biased, positive-definite estimator), and the confidence band is
//! the flat Bartlett i.i.d. band `z_{0.975} / sqrt(n)`. Ljung-Box uses an
//! unadjusted chi-square with `m` degrees of freedom.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::moments::TestResult;
use crate::series::ReturnSeries;

/// Default portmanteau lag count: approximately the trading days in a month.
pub const DEFAULT_LAGS: usize = 21;
/// Default McLeod-Li maximum lag count.
pub const DEFAULT_ML_LAGS: usize = 26;

/// Pointwise transform applied to returns before autocorrelation analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    Identity,
    Square,
    Absolute,
}

impl Transform {
    pub const ALL: [Transform; 3] = [Transform::Identity, Transform::Square, Transform::Absolute];

    pub fn label(&self) -> &'static str {
        match self {
            Transform::Identity => "identity",
            Transform::Square => "square",
            Transform::Absolute => "absolute",
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Square => x * x,
            Transform::Absolute => x.abs(),
        }
    }
}

impl std::fmt::Display for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "returns" | "raw" => Ok(Transform::Identity),
            "square" | "squared" => Ok(Transform::Square),
            "absolute" | "abs" => Ok(Transform::Absolute),
            other => Err(Error::domain(format!(
                "unknown transform '{other}' (expected identity, square or absolute)"
            ))),
        }
    }
}

/// Per-lag autocorrelations with a symmetric confidence band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcfResult {
    pub transform: Transform,
    /// rho_1 .. rho_m; rho_0 = 1 is not emitted.
    pub rho: Vec<f64>,
    /// Half-width of the 95% i.i.d. band, `z_{0.975} / sqrt(n)`.
    pub band_halfwidth: f64,
    pub n: usize,
}

/// Consecutive return pairs (r_{t-1}, r_t), dated at the later observation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagPair {
    pub date: NaiveDate,
    pub prev: f64,
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LagPairs {
    pub pairs: Vec<LagPair>,
}

/// Sample autocorrelations of `x` for lags 1..=max_lag:
/// rho_k = sum_{t>k} (x_t - xbar)(x_{t-k} - xbar) / sum_t (x_t - xbar)^2.
pub(crate) fn acf_values(x: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = x.len();
    if max_lag < 1 {
        return Err(Error::domain("max lag must be at least 1"));
    }
    if max_lag >= n {
        return Err(Error::domain(format!(
            "max lag {max_lag} must be below the series length {n}"
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|&v| v - mean).collect();
    let denom: f64 = centered.iter().map(|&d| d * d).sum();
    if denom <= 0.0 {
        return Err(Error::degenerate(
            "zero variance after transform: autocorrelations undefined",
        ));
    }
    let mut rho = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num: f64 = centered[k..]
            .iter()
            .zip(&centered[..n - k])
            .map(|(a, b)| a * b)
            .sum();
        rho.push(num / denom);
    }
    Ok(rho)
}

/// Autocorrelation function of the transformed returns with the 95% band.
pub fn acf(r: &ReturnSeries, max_lag: usize, transform: Transform) -> Result<AcfResult> {
    let x: Vec<f64> = r.values().iter().map(|&v| transform.apply(v)).collect();
    let rho = acf_values(&x, max_lag)?;
    let n = x.len();
    let z = Distribution::standard_normal()
        .quantile(0.975)
        .expect("0.975 is in (0,1)");
    Ok(AcfResult {
        transform,
        rho,
        band_halfwidth: z / (n as f64).sqrt(),
        n,
    })
}

/// Ljung-Box statistic and p-value from precomputed autocorrelations:
/// LB(m) = n (n + 2) sum_{l<=m} rho_l^2 / (n - l), chi-square with m df.
pub fn ljung_box_from_acf(rho: &[f64], n: usize) -> (f64, f64) {
    let nf = n as f64;
    let stat = nf
        * (nf + 2.0)
        * rho
            .iter()
            .enumerate()
            .map(|(i, &r)| r * r / (nf - (i + 1) as f64))
            .sum::<f64>();
    let p = 1.0 - Distribution::ChiSquare { df: rho.len() as f64 }.cdf(stat);
    (stat, p)
}

/// Ljung-Box portmanteau test over `lags` autocorrelations of the transformed
/// returns.
pub fn ljung_box(r: &ReturnSeries, lags: usize, transform: Transform) -> Result<TestResult> {
    let x: Vec<f64> = r.values().iter().map(|&v| transform.apply(v)).collect();
    ljung_box_values(&x, lags, transform)
}

pub(crate) fn ljung_box_values(
    x: &[f64],
    lags: usize,
    transform: Transform,
) -> Result<TestResult> {
    let rho = acf_values(x, lags)?;
    let (stat, p) = ljung_box_from_acf(&rho, x.len());
    Ok(TestResult {
        test_name: format!("ljung_box[{}]", transform.label()),
        statistic: stat,
        df: Some(lags as f64),
        p_value: p,
        null_hypothesis: format!("rho_1 = ... = rho_{lags} = 0"),
        sample_size: x.len(),
    })
}

/// McLeod-Li test: Ljung-Box on squared returns for every lag count
/// m = 1..=max_lags. The p-value curve is the ARCH-effect diagnostic.
pub fn mcleod_li(r: &ReturnSeries, max_lags: usize) -> Result<Vec<(usize, TestResult)>> {
    let x: Vec<f64> = r.values().iter().map(|&v| v * v).collect();
    let rho = acf_values(&x, max_lags)?;
    let n = x.len();
    let nf = n as f64;
    let mut out = Vec::with_capacity(max_lags);
    let mut partial = 0.0;
    for (i, &rk) in rho.iter().enumerate() {
        let m = i + 1;
        partial += rk * rk / (nf - m as f64);
        let stat = nf * (nf + 2.0) * partial;
        let p = 1.0 - Distribution::ChiSquare { df: m as f64 }.cdf(stat);
        out.push((
            m,
            TestResult {
                test_name: format!("mcleod_li[m={m}]"),
                statistic: stat,
                df: Some(m as f64),
                p_value: p,
                null_hypothesis: format!("rho_1 = ... = rho_{m} = 0 for squared returns"),
                sample_size: n,
            },
        ));
    }
    Ok(out)
}

/// Consecutive (r_{t-1}, r_t) pairs, optionally restricted to a date window
/// (inclusive). An empty window yields an empty result, not an error.
pub fn lag_pairs(r: &ReturnSeries, window: Option<(NaiveDate, NaiveDate)>) -> LagPairs {
    let obs = r.observations();
    let filtered: Vec<_> = match window {
        Some((start, end)) => obs
            .iter()
            .filter(|o| o.date >= start && o.date <= end)
            .collect(),
        None => obs.iter().collect(),
    };
    let pairs = filtered
        .windows(2)
        .map(|w| LagPair {
            date: w[1].date,
            prev: w[0].value,
            current: w[1].value,
        })
        .collect();
    LagPairs { pairs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::QuantileSampler;
    use crate::series::TimeScale;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn returns(values: &[f64]) -> ReturnSeries {
        ReturnSeries::from_values(
            "test",
            TimeScale::Daily,
            NaiveDate::from_ymd_opt(2020, 1, 6).unwrap(),
            values,
        )
        .unwrap()
    }

    /// Naive O(n*m) double-loop ACF used as the independent oracle.
    fn naive_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let mut denom = 0.0;
        for t in 0..n {
            denom += (x[t] - mean) * (x[t] - mean);
        }
        let mut out = Vec::new();
        for k in 1..=max_lag {
            let mut num = 0.0;
            for t in k..n {
                num += (x[t] - mean) * (x[t - k] - mean);
            }
            out.push(num / denom);
        }
        out
    }

    #[test]
    fn acf_matches_naive_oracle() {
        let mut s = QuantileSampler::new(5);
        for trial in 0..20 {
            let n = 50 + trial * 20;
            let x: Vec<f64> = (0..n).map(|_| s.standard_normal()).collect();
            let fast = acf_values(&x, 30).unwrap();
            let slow = naive_acf(&x, 30);
            for (a, b) in fast.iter().zip(&slow) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn acf_of_iid_noise_stays_in_sampling_band() {
        let mut s = QuantileSampler::new(2024);
        let x: Vec<f64> = (0..10_000).map(|_| s.standard_normal()).collect();
        let rho = acf_values(&x, 20).unwrap();
        let bound = 4.0 / (10_000.0_f64).sqrt();
        for (k, &r) in rho.iter().enumerate() {
            assert!(r.abs() < bound, "lag {}: |{r}| >= {bound}", k + 1);
        }
    }

    #[test]
    fn acf_alternating_series() {
        let x: Vec<f64> = (0..1000).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let rho = acf_values(&x, 2).unwrap();
        assert_abs_diff_eq!(rho[0], -999.0 / 1000.0, epsilon = 1e-12);
    }

    #[test]
    fn acf_absolute_equals_identity_for_positive_series() {
        let values: Vec<f64> = (0..60).map(|i| 1.0 + ((i * i) % 17) as f64 / 10.0).collect();
        let r = returns(&values);
        let ident = acf(&r, 10, Transform::Identity).unwrap();
        let abs = acf(&r, 10, Transform::Absolute).unwrap();
        assert_eq!(ident.rho, abs.rho);
    }

    #[test]
    fn acf_band_is_z975_over_sqrt_n() {
        let values: Vec<f64> = (0..400).map(|i| (i as f64).sin()).collect();
        let a = acf(&returns(&values), 5, Transform::Identity).unwrap();
        assert_abs_diff_eq!(
            a.band_halfwidth,
            1.959963984540054 / 400.0_f64.sqrt(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn acf_domain_and_degenerate_errors() {
        let r = returns(&[1.0, 2.0, 3.0]);
        assert!(matches!(acf(&r, 3, Transform::Identity), Err(Error::Domain(_))));
        assert!(matches!(acf(&r, 0, Transform::Identity), Err(Error::Domain(_))));
        let constant = returns(&[2.0, 2.0, 2.0, 2.0]);
        assert!(matches!(
            acf(&constant, 2, Transform::Identity),
            Err(Error::DegenerateSeries(_))
        ));
        // All-negative series squares to a non-constant series, but the
        // absolute transform of a constant-magnitude series is degenerate.
        let pm = returns(&[1.0, -1.0, 1.0, -1.0, 1.0]);
        assert!(matches!(
            acf(&pm, 2, Transform::Square),
            Err(Error::DegenerateSeries(_))
        ));
    }

    #[test]
    fn ljung_box_zero_acf_formula() {
        let (stat, p) = ljung_box_from_acf(&[0.0; 21], 500);
        assert_eq!(stat, 0.0);
        assert_eq!(p, 1.0);
    }

    #[test]
    fn ljung_box_matches_hand_formula() {
        let values: Vec<f64> = (0..50).map(|i| ((i * 7919) % 23) as f64).collect();
        let t = ljung_box(&returns(&values), 5, Transform::Identity).unwrap();
        let rho = acf_values(&values, 5).unwrap();
        let n = 50.0;
        let expected: f64 = n
            * (n + 2.0)
            * rho
                .iter()
                .enumerate()
                .map(|(i, r)| r * r / (n - (i + 1) as f64))
                .sum::<f64>();
        assert_abs_diff_eq!(t.statistic, expected, epsilon = 1e-12);
        assert_eq!(t.df, Some(5.0));
        assert_eq!(t.sample_size, 50);
    }

    #[test]
    fn mcleod_li_is_cumulative_ljung_box_on_squares() {
        let mut s = QuantileSampler::new(31);
        let values: Vec<f64> = (0..300).map(|_| s.standard_normal()).collect();
        let r = returns(&values);
        let curve = mcleod_li(&r, 8).unwrap();
        assert_eq!(curve.len(), 8);
        for (m, t) in &curve {
            let direct = ljung_box(&r, *m, Transform::Square).unwrap();
            assert_abs_diff_eq!(t.statistic, direct.statistic, epsilon = 1e-10);
            assert_abs_diff_eq!(t.p_value, direct.p_value, epsilon = 1e-10);
        }
    }

    #[test]
    fn mcleod_li_boundary_series() {
        let r = returns(&[1.0, 2.0, 4.0]);
        let curve = mcleod_li(&r, 1).unwrap();
        assert_eq!(curve.len(), 1);
        assert_eq!(curve[0].0, 1);
    }

    #[test]
    fn mcleod_li_null_rate_is_small_on_iid_data() {
        // On i.i.d. data the significant fraction of lags stays small. The
        // per-lag p-values within one series are strongly dependent
        // (cumulative statistics), so the rate is checked across seeds.
        let mut total_sig = 0usize;
        let seeds = 20u64;
        for seed in 0..seeds {
            let mut s = QuantileSampler::new(52_000 + seed);
            let values: Vec<f64> = (0..5000).map(|_| s.standard_normal()).collect();
            let curve = mcleod_li(&returns(&values), 26).unwrap();
            total_sig += curve.iter().filter(|(_, t)| t.p_value < 0.05).count();
        }
        let fraction = total_sig as f64 / (seeds as f64 * 26.0);
        assert!(fraction <= 0.15, "significant fraction {fraction}");
    }

    #[test]
    fn lag_pairs_basic_and_window() {
        let r = returns(&[1.0, 2.0, 3.0]);
        let lp = lag_pairs(&r, None);
        assert_eq!(lp.pairs.len(), 2);
        assert_eq!((lp.pairs[0].prev, lp.pairs[0].current), (1.0, 2.0));
        assert_eq!((lp.pairs[1].prev, lp.pairs[1].current), (2.0, 3.0));
        assert_eq!(lp.pairs[0].date, r.observations()[1].date);

        // Window covering only the last two observations yields one pair.
        let start = r.observations()[1].date;
        let end = r.observations()[2].date;
        let lp = lag_pairs(&r, Some((start, end)));
        assert_eq!(lp.pairs.len(), 1);
        assert_eq!((lp.pairs[0].prev, lp.pairs[0].current), (2.0, 3.0));

        // Empty window is an empty result, not an error.
        let before = NaiveDate::from_ymd_opt(1990, 1, 1).unwrap();
        let lp = lag_pairs(&r, Some((before, before)));
        assert!(lp.pairs.is_empty());
    }

    #[test]
    fn lag_pairs_full_series_count() {
        let values: Vec<f64> = (0..37).map(|i| i as f64).collect();
        let r = returns(&values);
        assert_eq!(lag_pairs(&r, None).pairs.len(), r.len() - 1);
    }

    proptest! {
        /// Ljung-Box on the identity transform is invariant under positive
        /// affine maps of the series (autocorrelations are scale-free).
        #[test]
        fn ljung_box_affine_invariance(
            values in proptest::collection::vec(-10.0..10.0_f64, 30..120),
            a in 0.01..50.0_f64,
            b in -20.0..20.0_f64,
        ) {
            let base = ljung_box_values(&values, 5, Transform::Identity);
            prop_assume!(base.is_ok());
            let base = base.unwrap();
            let mapped: Vec<f64> = values.iter().map(|&v| a * v + b).collect();
            let m = ljung_box_values(&mapped, 5, Transform::Identity).unwrap();
            prop_assert!((m.statistic - base.statistic).abs() <= 1e-9 * (1.0 + base.statistic));
            prop_assert!((m.p_value - base.p_value).abs() <= 1e-9);
        }

        /// For fixed data, LB(m) is nondecreasing in m.
        #[test]
        fn ljung_box_nondecreasing_in_lags(
            values in proptest::collection::vec(-5.0..5.0_f64, 40..100)
        ) {
            prop_assume!(acf_values(&values, 10).is_ok());
            let mut prev = 0.0;
            for m in 1..=10 {
                let t = ljung_box_values(&values, m, Transform::Identity).unwrap();
                prop_assert!(t.statistic + 1e-12 >= prev);
                prev = t.statistic;
            }
        }
    }

    /// On i.i.d. data the LB p-values are approximately uniform: a KS test of
    /// 500 replicate p-values against uniform(0,1) should not reject at 1%.
    #[test]
    fn ljung_box_p_values_uniform_under_null() {
        let normal = Distribution::standard_normal();
        let mut ps = Vec::with_capacity(500);
        for seed in 0..500_u64 {
            let mut s = QuantileSampler::new(900_000 + seed);
            let x: Vec<f64> = (0..300).map(|_| s.standard_normal()).collect();
            let rho = acf_values(&x, 10).unwrap();
            let (_, p) = ljung_box_from_acf(&rho, x.len());
            ps.push(p);
        }
        // Uniform p-values mapped through the normal quantile are standard
        // normal; the KS distance is unchanged by the monotone map.
        let z: Vec<f64> = ps
            .iter()
            .map(|&p| normal.quantile(p.clamp(1e-12, 1.0 - 1e-12)).unwrap())
            .collect();
        let t = crate::moments::kolmogorov_smirnov_values(&z, &normal).unwrap();
        assert!(t.p_value > 0.01, "uniformity KS p = {}", t.p_value);
    }
}
