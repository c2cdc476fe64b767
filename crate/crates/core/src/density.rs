//! Histogram-vs-normal overlays, Gaussian kernel density estimation, and
//! QQ-plot point generation against normal and Student-t references.
//!
//! The KDE uses a Gaussian kernel with Silverman's bandwidth
//! `0.9 * min(sd, IQR/1.34) * n^(-1/5)` by default. Student-t references are
//! standardized to unit variance before comparison (a raw t(4) has variance
//! 2, which would visibly misalign the overlay), and QQ order statistics use
//! the Hazen plotting position `(i - 0.5)/n`.

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::moments::sample_std_dev;
use crate::series::ReturnSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Histogram,
    Kde,
}

/// Density curve on a grid, with a fitted reference density on the same grid.
///
/// For histograms the grid holds bin centers and `bin_width` the common bin
/// width; for KDE curves the grid is uniform over `[min - 3h, max + 3h]` and
/// `bandwidth` holds `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub kind: CurveKind,
    pub grid: Vec<f64>,
    pub empirical: Vec<f64>,
    pub reference: Vec<f64>,
    pub reference_label: String,
    pub bin_width: Option<f64>,
    pub bandwidth: Option<f64>,
}

/// Reference distribution for density overlays, location-scale fitted to the
/// sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceDensity {
    /// Normal with the sample mean and sample standard deviation.
    FittedNormal,
    /// Student-t standardized to unit variance, then scaled to the sample
    /// mean and standard deviation. Requires `df > 2`.
    StandardizedStudentT { df: f64 },
}

/// QQ-plot points: sample order statistics against reference quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QQPoints {
    pub reference: Distribution,
    /// True when both axes are in standardized (zero mean, unit variance)
    /// units, as used for the Student-t reference.
    pub standardized: bool,
    pub points: Vec<QQPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QQPoint {
    pub theoretical: f64,
    pub sample: f64,
}

/// Equal-width density histogram over `[min, max]` with a fitted-normal
/// reference at the bin centers. Bar areas sum to one.
pub fn histogram(r: &ReturnSeries, bins: usize) -> Result<DensityCurve> {
    histogram_values(&r.values(), bins)
}

pub(crate) fn histogram_values(values: &[f64], bins: usize) -> Result<DensityCurve> {
    if bins == 0 {
        return Err(Error::domain("histogram requires at least one bin"));
    }
    if values.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max <= min {
        return Err(Error::degenerate(
            "zero-width range: histogram undefined for a constant series",
        ));
    }
    let width = (max - min) / bins as f64;
    let n = values.len() as f64;
    let mut counts = vec![0_usize; bins];
    for &v in values {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / (n * width)).collect();
    let grid: Vec<f64> = (0..bins).map(|i| min + (i as f64 + 0.5) * width).collect();

    let mean = values.iter().sum::<f64>() / n;
    let sd = sample_std_dev(values);
    let (reference, reference_label) = if sd > 0.0 {
        let normal = Distribution::normal(mean, sd)?;
        (grid.iter().map(|&x| normal.pdf(x)).collect(), normal.label())
    } else {
        (vec![0.0; bins], "degenerate".to_string())
    };

    Ok(DensityCurve {
        kind: CurveKind::Histogram,
        grid,
        empirical,
        reference,
        reference_label,
        bin_width: Some(width),
        bandwidth: None,
    })
}

/// Silverman's rule-of-thumb bandwidth `0.9 * min(sd, IQR/1.34) * n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: values.len(),
        });
    }
    let sd = sample_std_dev(values);
    if sd <= 0.0 {
        return Err(Error::degenerate("zero variance: bandwidth undefined"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let iqr = interpolated_quantile(&sorted, 0.75) - interpolated_quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(0.9 * spread * (values.len() as f64).powf(-0.2))
}

/// Linear-interpolation sample quantile on a sorted slice (the common
/// `(n-1)p + 1` rank convention).
fn interpolated_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n as f64 - 1.0) * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Gaussian-kernel density estimate of `values` at a single point.
pub fn gaussian_kde_at(values: &[f64], bandwidth: f64, x: f64) -> f64 {
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * bandwidth * values.len() as f64);
    values
        .iter()
        .map(|&xi| {
            let u = (x - xi) / bandwidth;
            (-0.5 * u * u).exp()
        })
        .sum::<f64>()
        * norm
}

/// Gaussian kernel density estimate with a fitted-normal reference overlay.
pub fn kde(r: &ReturnSeries, grid_size: usize, bandwidth: Option<f64>) -> Result<DensityCurve> {
    kde_with_reference(r, grid_size, bandwidth, ReferenceDensity::FittedNormal)
}

/// Gaussian KDE with the requested reference density overlay.
pub fn kde_with_reference(
    r: &ReturnSeries,
    grid_size: usize,
    bandwidth: Option<f64>,
    reference: ReferenceDensity,
) -> Result<DensityCurve> {
    kde_values(&r.values(), grid_size, bandwidth, reference)
}

pub(crate) fn kde_values(
    values: &[f64],
    grid_size: usize,
    bandwidth: Option<f64>,
    reference: ReferenceDensity,
) -> Result<DensityCurve> {
    if values.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: values.len(),
        });
    }
    if grid_size < 2 {
        return Err(Error::domain("kde requires a grid of at least 2 points"));
    }
    let h = match bandwidth {
        Some(h) if h.is_finite() && h > 0.0 => h,
        Some(h) => {
            return Err(Error::domain(format!(
                "bandwidth must be positive and finite, got {h}"
            )))
        }
        None => silverman_bandwidth(values)?,
    };
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = min - 3.0 * h;
    let hi = max + 3.0 * h;
    let step = (hi - lo) / (grid_size as f64 - 1.0);
    let grid: Vec<f64> = (0..grid_size).map(|i| lo + i as f64 * step).collect();
    let empirical: Vec<f64> = grid.iter().map(|&x| gaussian_kde_at(values, h, x)).collect();

    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sd = sample_std_dev(values);
    let (reference, reference_label) = fitted_reference_density(mean, sd, reference, &grid)?;

    Ok(DensityCurve {
        kind: CurveKind::Kde,
        grid,
        empirical,
        reference,
        reference_label,
        bin_width: None,
        bandwidth: Some(h),
    })
}

/// Density of a reference distribution on `grid`, location-scale matched to
/// a sample with the given mean and standard deviation.
fn fitted_reference_density(
    mean: f64,
    sd: f64,
    reference: ReferenceDensity,
    grid: &[f64],
) -> Result<(Vec<f64>, String)> {
    match reference {
        ReferenceDensity::FittedNormal => {
            let normal = Distribution::normal(mean, sd)?;
            Ok((grid.iter().map(|&x| normal.pdf(x)).collect(), normal.label()))
        }
        ReferenceDensity::StandardizedStudentT { df } => {
            if df <= 2.0 {
                return Err(Error::domain(format!(
                    "standardized student-t reference requires df > 2, got {df}"
                )));
            }
            let t = Distribution::student_t(df)?;
            // X = mean + sd * c * T with c = sqrt((df-2)/df) has variance sd^2.
            let scale = sd * ((df - 2.0) / df).sqrt();
            let density = grid
                .iter()
                .map(|&x| t.pdf((x - mean) / scale) / scale)
                .collect();
            Ok((
                density,
                format!("student_t(df={df}), standardized to unit variance"),
            ))
        }
    }
}

/// QQ points of the sample against a reference distribution.
///
/// Sample order statistic `i` is paired with `quantile(ref, (i - 0.5)/n)`.
/// For a Student-t reference the sample is standardized to zero mean and unit
/// variance and the t quantiles are rescaled by `sqrt((df-2)/df)` so the
/// reference also has unit variance (requires `df > 2`).
pub fn qq_points(r: &ReturnSeries, reference: &Distribution) -> Result<QQPoints> {
    qq_points_values(&r.values(), reference)
}

pub(crate) fn qq_points_values(values: &[f64], reference: &Distribution) -> Result<QQPoints> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));

    let (sample, quantile_scale, standardized) = match *reference {
        Distribution::StudentT { df } => {
            if df <= 2.0 {
                return Err(Error::domain(format!(
                    "student-t QQ reference requires df > 2 (variance undefined), got {df}"
                )));
            }
            let mean = values.iter().sum::<f64>() / n as f64;
            let sd = sample_std_dev(values);
            if sd <= 0.0 {
                return Err(Error::degenerate("zero variance: cannot standardize sample"));
            }
            let standardized_sample: Vec<f64> =
                sorted.iter().map(|&v| (v - mean) / sd).collect();
            (standardized_sample, ((df - 2.0) / df).sqrt(), true)
        }
        _ => (sorted, 1.0, false),
    };

    let points = sample
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let p = (i as f64 + 0.5) / n as f64;
            let q = reference.quantile(p).expect("p strictly inside (0,1)");
            QQPoint {
                theoretical: q * quantile_scale,
                sample: s,
            }
        })
        .collect();

    Ok(QQPoints {
        reference: *reference,
        standardized,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::QuantileSampler;
    use crate::series::TimeScale;
    use approx::assert_abs_diff_eq;
    use chrono::NaiveDate;
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

    fn trapezoid(grid: &[f64], y: &[f64]) -> f64 {
        grid.windows(2)
            .zip(y.windows(2))
            .map(|(x, f)| 0.5 * (f[0] + f[1]) * (x[1] - x[0]))
            .sum()
    }

    #[test]
    fn histogram_uniform_heights() {
        let mut s = QuantileSampler::new(40);
        let values: Vec<f64> = (0..1000).map(|_| s.uniform_open01()).collect();
        let h = histogram_values(&values, 10).unwrap();
        for &height in &h.empirical {
            assert!((height - 1.0).abs() < 0.15, "height {height}");
        }
    }

    #[test]
    fn histogram_single_bin_height() {
        let values = [1.0, 2.0, 3.0, 5.0];
        let h = histogram_values(&values, 1).unwrap();
        assert_abs_diff_eq!(h.empirical[0], 1.0 / 4.0, epsilon = 1e-15);
        assert_eq!(h.bin_width, Some(4.0));
    }

    #[test]
    fn histogram_mirror_symmetry() {
        let values = [-3.0, -1.1, -0.45, 0.2, 0.85, 2.3, 3.0];
        let mirrored: Vec<f64> = values.iter().map(|&v| -v).collect();
        let a = histogram_values(&values, 6).unwrap();
        let b = histogram_values(&mirrored, 6).unwrap();
        let mut rev = b.empirical.clone();
        rev.reverse();
        for (x, y) in a.empirical.iter().zip(&rev) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn histogram_bar_areas_sum_to_one() {
        let mut s = QuantileSampler::new(8);
        let values: Vec<f64> = (0..500).map(|_| s.standard_normal()).collect();
        let h = histogram_values(&values, 23).unwrap();
        let area: f64 = h.empirical.iter().map(|&y| y * h.bin_width.unwrap()).sum();
        assert_abs_diff_eq!(area, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn histogram_degenerate_and_domain_errors() {
        assert!(matches!(
            histogram_values(&[3.0, 3.0, 3.0], 5),
            Err(Error::DegenerateSeries(_))
        ));
        assert!(matches!(
            histogram_values(&[1.0, 2.0], 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn kernel_value_at_own_location() {
        // One observation, h = 1, evaluated at the observation itself.
        let v = gaussian_kde_at(&[0.0], 1.0, 0.0);
        assert_abs_diff_eq!(v, 0.3989422804014327, epsilon = 1e-12);
    }

    #[test]
    fn kde_integrates_to_one() {
        let mut s = QuantileSampler::new(4);
        let values: Vec<f64> = (0..800).map(|_| s.standard_normal()).collect();
        let curve = kde_values(&values, 512, None, ReferenceDensity::FittedNormal).unwrap();
        let mass = trapezoid(&curve.grid, &curve.empirical);
        assert!((mass - 1.0).abs() <= 0.01, "mass {mass}");
        // Invariant band for the reference too.
        let ref_mass = trapezoid(&curve.grid, &curve.reference);
        assert!((ref_mass - 1.0).abs() <= 0.02, "reference mass {ref_mass}");
    }

    #[test]
    fn kde_of_standard_normal_at_origin() {
        let mut s = QuantileSampler::new(7);
        let values: Vec<f64> = (0..10_000).map(|_| s.standard_normal()).collect();
        let h = silverman_bandwidth(&values).unwrap();
        let at0 = gaussian_kde_at(&values, h, 0.0);
        assert!((0.37..=0.43).contains(&at0), "kde(0) = {at0}");
    }

    #[test]
    fn kde_translation_equivariance() {
        let values = [-1.2, -0.3, 0.1, 0.4, 0.9, 2.2, -0.7, 1.4];
        let shifted: Vec<f64> = values.iter().map(|&v| v + 5.5).collect();
        let a = kde_values(&values, 128, None, ReferenceDensity::FittedNormal).unwrap();
        let b = kde_values(&shifted, 128, None, ReferenceDensity::FittedNormal).unwrap();
        assert_abs_diff_eq!(a.bandwidth.unwrap(), b.bandwidth.unwrap(), epsilon = 1e-12);
        for ((ga, ya), (gb, yb)) in a
            .grid
            .iter()
            .zip(&a.empirical)
            .zip(b.grid.iter().zip(&b.empirical))
        {
            assert_abs_diff_eq!(ga + 5.5, *gb, epsilon = 1e-9);
            assert_abs_diff_eq!(ya, yb, epsilon = 1e-12);
        }
    }

    #[test]
    fn kde_degenerate_errors() {
        assert!(matches!(
            kde_values(&[1.0, 1.0, 1.0], 64, None, ReferenceDensity::FittedNormal),
            Err(Error::DegenerateSeries(_))
        ));
        assert!(kde_values(&[1.0], 64, None, ReferenceDensity::FittedNormal).is_err());
        assert!(kde_values(&[1.0, 2.0], 64, Some(-0.5), ReferenceDensity::FittedNormal).is_err());
    }

    #[test]
    fn standardized_t_reference_has_unit_variance_shape() {
        // The standardized t density at the sample mean must exceed the
        // fitted normal's peak (heavier tails, taller center).
        let mut s = QuantileSampler::new(21);
        let values: Vec<f64> = (0..2000).map(|_| s.standard_normal()).collect();
        let t = kde_values(
            &values,
            256,
            None,
            ReferenceDensity::StandardizedStudentT { df: 4.0 },
        )
        .unwrap();
        let n = kde_values(&values, 256, None, ReferenceDensity::FittedNormal).unwrap();
        let t_peak = t.reference.iter().cloned().fold(0.0, f64::max);
        let n_peak = n.reference.iter().cloned().fold(0.0, f64::max);
        assert!(t_peak > n_peak);
        // And it must integrate to one.
        let mass = trapezoid(&t.grid, &t.reference);
        assert!((mass - 1.0).abs() < 0.02, "t reference mass {mass}");
    }

    #[test]
    fn qq_self_consistency_on_normal_quantiles() {
        let normal = Distribution::standard_normal();
        let n = 200;
        let values: Vec<f64> = (1..=n)
            .map(|i| normal.quantile((i as f64 - 0.5) / n as f64).unwrap())
            .collect();
        let qq = qq_points_values(&values, &normal).unwrap();
        for p in &qq.points {
            assert_abs_diff_eq!(p.theoretical, p.sample, epsilon = 1e-9);
        }
    }

    #[test]
    fn qq_coordinates_nondecreasing() {
        let mut s = QuantileSampler::new(3);
        let values: Vec<f64> = (0..500).map(|_| s.standard_normal() * 2.0 + 0.3).collect();
        let qq = qq_points_values(
            &values,
            &Distribution::normal(0.3, 2.0).unwrap(),
        )
        .unwrap();
        for w in qq.points.windows(2) {
            assert!(w[1].theoretical >= w[0].theoretical);
            assert!(w[1].sample >= w[0].sample);
        }
    }

    #[test]
    fn qq_t_reference_rejects_low_df() {
        let values = [1.0, 2.0, 3.0];
        let t2 = Distribution::student_t(2.0).unwrap();
        assert!(matches!(
            qq_points_values(&values, &t2),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn qq_heavy_tails_dominate_normal_reference() {
        // t(3) sample quantiles run past fitted-normal quantiles in the tail.
        let mut hits = 0;
        let trials = 40;
        for seed in 0..trials {
            let mut s = QuantileSampler::new(5000 + seed);
            let values: Vec<f64> = (0..5000).map(|_| s.student_t(3.0).unwrap()).collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let sd = sample_std_dev(&values);
            let normal = Distribution::normal(mean, sd).unwrap();
            let qq = qq_points_values(&values, &normal).unwrap();
            let last = qq.points.last().unwrap();
            if last.sample > last.theoretical {
                hits += 1;
            }
        }
        assert!(
            hits as f64 >= 0.95 * trials as f64,
            "tail dominance in {hits}/{trials} runs"
        );
    }

    #[test]
    fn qq_t4_sample_against_t4_reference_tracks_identity() {
        let t4 = Distribution::student_t(4.0).unwrap();
        let mut s = QuantileSampler::new(77);
        let values: Vec<f64> = (0..10_000).map(|_| s.student_t(4.0).unwrap()).collect();
        let qq = qq_points_values(&values, &t4).unwrap();
        let n = qq.points.len();
        let lo = n / 100;
        let hi = n - lo;
        let max_gap = qq.points[lo..hi]
            .iter()
            .map(|p| (p.sample - p.theoretical).abs())
            .fold(0.0, f64::max);
        assert!(max_gap < 0.25, "middle-98% envelope {max_gap}");
    }

    proptest! {
        /// QQ against the fitted normal is affine-equivariant: mapping the
        /// data by a*r + b (a > 0) maps both coordinates the same way.
        #[test]
        fn qq_affine_equivariance(
            values in proptest::collection::vec(-10.0..10.0_f64, 10..80),
            a in 0.1..10.0_f64,
            b in -5.0..5.0_f64,
        ) {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let sd = sample_std_dev(&values);
            prop_assume!(sd > 1e-9);
            let base = qq_points_values(
                &values,
                &Distribution::normal(mean, sd).unwrap(),
            ).unwrap();

            let mapped: Vec<f64> = values.iter().map(|&v| a * v + b).collect();
            let m = qq_points_values(
                &mapped,
                &Distribution::normal(a * mean + b, a * sd).unwrap(),
            ).unwrap();

            for (p0, p1) in base.points.iter().zip(&m.points) {
                prop_assert!((a * p0.theoretical + b - p1.theoretical).abs() <= 1e-9 * (1.0 + p1.theoretical.abs()));
                prop_assert!((a * p0.sample + b - p1.sample).abs() <= 1e-9 * (1.0 + p1.sample.abs()));
            }
        }
    }
}

