//! Reference distributions: normal, chi-square, Student-t, and Kolmogorov.
//!
//! CDFs are built on the special-function kernels; quantiles are computed by
//! bracketing plus bisection (with a Newton polish once the bracket is tight),
//! seeded by a rational approximation in the normal case. Sampling is
//! inverse-CDF transformation of uniforms from a seeded ChaCha stream, which
//! keeps every simulation deterministic per seed and across platforms.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{
    reg_inc_beta, reg_inc_gamma, standard_normal_cdf,
    standard_normal_pdf,
    standard_normal_quantile,
};

/// Truncation threshold for the Kolmogorov alternating tail series.
const KOLMOGOROV_TERM_TOL: f64 = 1e-12;

/// A fully parameterized reference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Distribution {
    Normal { mean: f64, std_dev: f64 },
    ChiSquare { df: f64 },
    StudentT { df: f64 },
    Kolmogorov,
}

impl Distribution {
    pub fn normal(mean: f64, std_dev: f64) -> Result<Self> {
        if !std_dev.is_finite() || std_dev <= 0.0 {
            return Err(Error::domain(format!(
                "normal distribution requires std_dev > 0, got {std_dev}"
            )));
        }
        if !mean.is_finite() {
            return Err(Error::domain("normal distribution requires finite mean"));
        }
        Ok(Distribution::Normal { mean, std_dev })
    }

    pub fn standard_normal() -> Self {
        Distribution::Normal {
            mean: 0.0,
            std_dev: 1.0,
        }
    }

    pub fn chi_square(df: f64) -> Result<Self> {
        if !df.is_finite() || df <= 0.0 {
            return Err(Error::domain(format!(
                "chi-square distribution requires df > 0, got {df}"
            )));
        }
        Ok(Distribution::ChiSquare { df })
    }

    pub fn student_t(df: f64) -> Result<Self> {
        if !df.is_finite() || df <= 0.0 {
            return Err(Error::domain(format!(
                "student-t distribution requires df > 0, got {df}"
            )));
        }
        Ok(Distribution::StudentT { df })
    }

    pub fn label(&self) -> String {
        match self {
            Distribution::Normal { mean, std_dev } => format!("normal(mean={mean}, sd={std_dev})"),
            Distribution::ChiSquare { df } => format!("chi_square(df={df})"),
            Distribution::StudentT { df } => format!("student_t(df={df})"),
            Distribution::Kolmogorov => "kolmogorov".to_string(),
        }
    }

    /// Cumulative distribution function. Total over the reals; NaN maps to NaN.
    pub fn cdf(&self, x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        match *self {
            Distribution::Normal { mean, std_dev } => standard_normal_cdf((x - mean) / std_dev),
            Distribution::ChiSquare { df } => {
                if x <= 0.0 {
                    0.0
                } else if x.is_infinite() {
                    1.0
                } else {
                    reg_inc_gamma(0.5 * df, 0.5 * x).expect("chi-square cdf kernel is total")
                }
            }
            Distribution::StudentT { df } => student_t_cdf(x, df),
            Distribution::Kolmogorov => kolmogorov_cdf(x),
        }
    }

    /// Probability density function.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            Distribution::Normal { mean, std_dev } => {
                standard_normal_pdf((x - mean) / std_dev) / std_dev
            }
            Distribution::ChiSquare { df } => {
                if x <= 0.0 || x.is_infinite() {
                    0.0
                } else {
                    let half = 0.5 * df;
                    let ln_pdf = (half - 1.0) * x.ln()
                        - 0.5 * x
                        - half * std::f64::consts::LN_2
                        - crate::special::ln_gamma(half).expect("df > 0");
                    ln_pdf.exp()
                }
            }
            Distribution::StudentT { df } => {
                if x.is_infinite() {
                    return 0.0;
                }
                let ln_norm = crate::special::ln_gamma(0.5 * (df + 1.0)).expect("df > 0")
                    - crate::special::ln_gamma(0.5 * df).expect("df > 0")
                    - 0.5 * (df * std::f64::consts::PI).ln();
                (ln_norm - 0.5 * (df + 1.0) * (1.0 + x * x / df).ln()).exp()
            }
            Distribution::Kolmogorov => kolmogorov_pdf(x),
        }
    }

    /// Quantile function (inverse CDF) for `p` in the open interval (0, 1).
    ///
    /// The result satisfies `|cdf(quantile(p)) - p| <= 1e-9`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::domain(format!(
                "quantile requires p in (0, 1), got {p}"
            )));
        }
        match *self {
            Distribution::Normal { mean, std_dev } => {
                Ok(mean + std_dev * standard_normal_quantile(p)?)
            }
            Distribution::ChiSquare { df } => {
                let hi0 = df + 10.0 * (2.0 * df).sqrt() + 10.0;
                invert_cdf(self, p, 0.0, hi0)
            }
            Distribution::StudentT { .. } => {
                if p == 0.5 {
                    return Ok(0.0);
                }
                // Exploit symmetry: solve in the upper half only.
                let (target, sign) = if p > 0.5 { (p, 1.0) } else { (1.0 - p, -1.0) };
                let x = invert_cdf(self, target, 0.0, 2.0)?;
                Ok(sign * x)
            }
            Distribution::Kolmogorov => invert_cdf(self, p, 0.0, 4.0),
        }
    }
}

/// Student-t CDF through the regularized incomplete beta.
fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    if t == 0.0 {
        return 0.5;
    }
    let x = df / (df + t * t);
    let half_tail = 0.5 * reg_inc_beta(0.5 * df, 0.5, x).expect("student-t cdf kernel is total");
    if t > 0.0 {
        1.0 - half_tail
    } else {
        half_tail
    }
}

/// Kolmogorov distribution K(lambda) = P(sup|B(t)| <= lambda), evaluated by the
/// alternating tail series truncated when a term drops below 1e-12.
pub fn kolmogorov_cdf(lambda: f64) -> f64 {
    if lambda.is_nan() {
        return f64::NAN;
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    if lambda.is_infinite() {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100_000 {
        let term = (-2.0 * (j as f64) * (j as f64) * lambda * lambda).exp();
        sum += sign * term;
        if term < KOLMOGOROV_TERM_TOL {
            break;
        }
        sign = -sign;
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

fn kolmogorov_pdf(lambda: f64) -> f64 {
    if lambda <= 0.0 || lambda.is_infinite() {
        return 0.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100_000 {
        let j = j as f64;
        let term = j * j * (-2.0 * j * j * lambda * lambda).exp();
        sum += sign * term;
        if term < KOLMOGOROV_TERM_TOL {
            break;
        }
        sign = -sign;
    }
    8.0 * lambda * sum
}

/// Bracketed root solve of cdf(x) = p: the bracket is grown by doubling when
/// needed, then narrowed by bisection with Newton steps accepted only when
/// they stay inside the bracket. Terminates once the bracket or the CDF
/// residual is below 1e-12.
fn invert_cdf(dist: &Distribution, p: f64, lo0: f64, hi0: f64) -> Result<f64> {
    let mut lo = lo0;
    let mut hi = hi0.max(lo0 + 1.0);
    let mut grow = 0;
    while dist.cdf(hi) < p {
        lo = hi;
        hi = if hi <= 0.0 { 1.0 } else { hi * 2.0 };
        grow += 1;
        if grow > 2_000 || !hi.is_finite() {
            return Err(Error::Numerical(format!(
                "quantile bracket failed to expand for {} at p={p}",
                dist.label()
            )));
        }
    }

    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = dist.cdf(x) - p;
        if f.abs() <= 1e-13 {
            return Ok(x);
        }
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if hi - lo <= 1e-12 * (1.0 + x.abs()) {
            return Ok(0.5 * (lo + hi));
        }
        // Newton step when it stays inside the bracket, bisection otherwise.
        let d = dist.pdf(x);
        let newton = if d > 0.0 { x - f / d } else { f64::NAN };
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Ok(x)
}

/// Seeded source of inverse-CDF deviates.
///
/// Uniforms are drawn from ChaCha8 and mapped into the open interval (0, 1),
/// so that quantile transforms never see 0 or 1.
#[derive(Debug, Clone)]
pub struct QuantileSampler {
    rng: ChaCha8Rng,
}

impl QuantileSampler {
    pub fn new(seed: u64) -> Self {
        QuantileSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform deviate in the open interval (0, 1).
    pub fn uniform_open01(&mut self) -> f64 {
        // 53-bit mantissa plus a half-ulp offset keeps the value strictly
        // inside (0, 1).
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal deviate by inverse CDF.
    pub fn standard_normal(&mut self) -> f64 {
        let u = self.uniform_open01();
        standard_normal_quantile(u).expect("u lies strictly inside (0,1)")
    }

    /// Student-t deviate with `df` degrees of freedom by inverse CDF.
    pub fn student_t(&mut self, df: f64) -> Result<f64> {
        let dist = Distribution::student_t(df)?;
        let u = self.uniform_open01();
        dist.quantile(u)
    }

    /// Student-t deviate rescaled to unit variance (requires `df > 2`).
    pub fn unit_variance_student_t(&mut self, df: f64) -> Result<f64> {
        if df <= 2.0 {
            return Err(Error::domain(format!(
                "unit-variance student-t requires df > 2, got {df}"
            )));
        }
        Ok(self.student_t(df)? * ((df - 2.0) / df).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cdf_symmetry_points() {
        assert_eq!(Distribution::standard_normal().cdf(0.0), 0.5);
        assert_eq!(Distribution::student_t(4.0).unwrap().cdf(0.0), 0.5);
    }

    #[test]
    fn chi_square_df2_closed_form() {
        let d = Distribution::chi_square(2.0).unwrap();
        assert_abs_diff_eq!(d.cdf(5.991464), 0.9499999863222985, epsilon = 1e-12);
        for i in 0..100 {
            let x = 0.05 + i as f64 * 0.2;
            assert_abs_diff_eq!(d.cdf(x), 1.0 - (-x / 2.0).exp(), epsilon = 1e-12);
        }
    }

    #[test]
    fn student_t_reference_values() {
        let t4 = Distribution::student_t(4.0).unwrap();
        // F(1.5; 4) = 0.896 exactly.
        assert_abs_diff_eq!(t4.cdf(1.5), 0.896, epsilon = 1e-12);
        assert_abs_diff_eq!(t4.quantile(0.975).unwrap(), 2.7764451051977987, epsilon = 1e-7);
    }

    #[test]
    fn normal_quantile_reference_values() {
        let n = Distribution::standard_normal();
        assert_eq!(n.quantile(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(n.quantile(0.975).unwrap(), 1.959963984540054, epsilon = 1e-9);
    }

    #[test]
    fn quantile_rejects_out_of_range_p() {
        let n = Distribution::standard_normal();
        assert!(n.quantile(0.0).is_err());
        assert!(n.quantile(1.0).is_err());
        assert!(n.quantile(-0.2).is_err());
        assert!(n.quantile(f64::NAN).is_err());
    }

    #[test]
    fn quantile_cdf_identity_on_grid() {
        let dists = [
            Distribution::normal(0.3, 2.5).unwrap(),
            Distribution::chi_square(1.0).unwrap(),
            Distribution::chi_square(21.0).unwrap(),
            Distribution::student_t(4.0).unwrap(),
            Distribution::Kolmogorov,
        ];
        for d in dists {
            for i in 1..1000 {
                let p = i as f64 / 1000.0;
                let x = d.quantile(p).unwrap();
                assert!(
                    (d.cdf(x) - p).abs() <= 1e-9,
                    "cdf(quantile(p)) != p for {} at p={p}",
                    d.label()
                );
            }
        }
    }

    #[test]
    fn cdf_quantile_identity_on_x_grid() {
        let d = Distribution::student_t(7.0).unwrap();
        for i in 0..200 {
            let x = -6.0 + i as f64 * 0.06;
            let p = d.cdf(x);
            if p > 0.0 && p < 1.0 {
                assert_abs_diff_eq!(d.quantile(p).unwrap(), x, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn student_t_converges_to_normal() {
        let t = Distribution::student_t(1000.0).unwrap();
        let n = Distribution::standard_normal();
        let mut sup = 0.0_f64;
        for i in 0..=800 {
            let x = -4.0 + i as f64 * 0.01;
            sup = sup.max((t.cdf(x) - n.cdf(x)).abs());
        }
        assert!(sup <= 1e-3, "sup difference {sup} exceeds 1e-3");
    }

    #[test]
    fn kolmogorov_reference_values() {
        assert_eq!(kolmogorov_cdf(0.0), 0.0);
        assert_abs_diff_eq!(kolmogorov_cdf(1.0), 0.7300003283226455, epsilon = 1e-10);
        assert_abs_diff_eq!(1.0 - kolmogorov_cdf(1.36), 0.049485876755377876, epsilon = 1e-10);
    }

    #[test]
    fn sampler_is_deterministic_per_seed() {
        let mut a = QuantileSampler::new(42);
        let mut b = QuantileSampler::new(42);
        for _ in 0..100 {
            assert_eq!(a.standard_normal(), b.standard_normal());
        }
        let mut c = QuantileSampler::new(43);
        assert_ne!(a.standard_normal(), c.standard_normal());
    }

    #[test]
    fn sampler_moments_match_distribution() {
        let mut s = QuantileSampler::new(7);
        let n = 200_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            let z = s.standard_normal();
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");

        let mut s = QuantileSampler::new(11);
        let (mut sum, mut sumsq) = (0.0, 0.0);
        let n = 50_000;
        for _ in 0..n {
            let z = s.unit_variance_student_t(4.0).unwrap();
            sum += z;
            sumsq += z * z;
        }
        let var = sumsq / n as f64 - (sum / n as f64).powi(2);
        assert!((var - 1.0).abs() < 0.1, "unit-variance t variance {var}");
    }

    #[test]
    fn unit_variance_t_rejects_low_df() {
        let mut s = QuantileSampler::new(1);
        assert!(s.unit_variance_student_t(2.0).is_err());
    }
}
