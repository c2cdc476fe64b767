//! GARCH(1,1) Gaussian quasi-maximum-likelihood estimation on demeaned
//! returns, conditional-volatility extraction, volatility-band overlays, and
//! seeded GARCH simulation for self-testing.
//!
//! The model is the standard GARCH(1,1) recursion
//! `sigma_t^2 = omega + alpha * eps_{t-1}^2 + beta * sigma_{t-1}^2` with
//! Gaussian quasi-likelihood. The recursion is initialized at the population
//! variance of the demeaned returns, and the optimizer works in unconstrained
//! coordinates (`omega = exp(a)`, `(alpha, beta)` through a logistic-simplex
//! map), so constraint violations are impossible by construction.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dist::QuantileSampler;
use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NelderMeadResult};
use crate::series::{ReturnSeries, TimeScale};

/// Simplex convergence tolerance on the function-value spread.
const FIT_TOL: f64 = 1e-8;
/// Iteration cap per optimizer start.
const FIT_MAX_ITER: usize = 2000;

/// GARCH(1,1) parameters with the covariance-stationarity constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl GarchParams {
    pub fn new(omega: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = GarchParams { omega, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() || self.omega <= 0.0 {
            return Err(Error::domain(format!(
                "omega must be positive and finite, got {}",
                self.omega
            )));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::domain(format!(
                "alpha must be nonnegative and finite, got {}",
                self.alpha
            )));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(Error::domain(format!(
                "beta must be nonnegative and finite, got {}",
                self.beta
            )));
        }
        if self.alpha + self.beta >= 1.0 {
            return Err(Error::domain(format!(
                "alpha + beta must be below 1 for covariance stationarity, got {}",
                self.alpha + self.beta
            )));
        }
        Ok(())
    }

    /// Unconditional variance `omega / (1 - alpha - beta)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }
}

/// Fitted GARCH(1,1) model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarchFit {
    pub params: GarchParams,
    pub log_likelihood: f64,
    /// Conditional variance path, one entry per observation.
    pub cond_variance: Vec<f64>,
    /// Total optimizer iterations across all starts.
    pub iterations: usize,
    /// True when the winning start's simplex spread fell below tolerance.
    pub converged: bool,
    /// Sample mean removed from the returns before fitting.
    pub mean_subtracted: f64,
    /// True when the series length was below 100 (fit proceeds from 30 up).
    pub low_sample: bool,
}

impl GarchFit {
    /// Conditional volatility `sqrt(sigma_t^2)` per observation.
    pub fn cond_volatility(&self) -> Vec<f64> {
        self.cond_variance.iter().map(|v| v.sqrt()).collect()
    }
}

/// Innovation distribution for simulation (unit variance in both cases).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Innovation {
    Normal,
    StudentT { df: f64 },
}

/// Gaussian quasi-log-likelihood of demeaned returns under the given
/// parameters, together with the conditional-variance path.
///
/// `sigma_1^2` is the population variance of `eps`; for `t >= 2` the GARCH
/// recursion applies. Parameter violations are an error, never clamped.
pub fn garch_loglik(eps: &[f64], params: &GarchParams) -> Result<(f64, Vec<f64>)> {
    params.validate()?;
    if eps.len() < 10 {
        return Err(Error::InsufficientData {
            needed: 10,
            got: eps.len(),
        });
    }
    let sigma1_sq = population_variance(eps);
    if sigma1_sq <= 0.0 {
        return Err(Error::degenerate(
            "zero variance: GARCH likelihood undefined",
        ));
    }
    let (ll, path) = loglik_with_init(eps, params.omega, params.alpha, params.beta, sigma1_sq);
    Ok((ll, path))
}

fn population_variance(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n
}

/// Core likelihood recursion. Assumes valid parameters and a positive
/// initial variance; returns `(-inf, path)` when the likelihood degenerates
/// numerically (e.g. omega overflow), which optimizers treat as a rejected
/// point.
fn loglik_with_init(
    eps: &[f64],
    omega: f64,
    alpha: f64,
    beta: f64,
    sigma1_sq: f64,
) -> (f64, Vec<f64>) {
    const LN_2PI: f64 = 1.837_877_066_409_345_3;
    let mut path = Vec::with_capacity(eps.len());
    let mut sigma_sq = sigma1_sq;
    let mut ll = 0.0;
    for (t, &e) in eps.iter().enumerate() {
        if t > 0 {
            sigma_sq = omega + alpha * eps[t - 1] * eps[t - 1] + beta * sigma_sq;
        }
        if !sigma_sq.is_finite() || sigma_sq <= 0.0 {
            return (f64::NEG_INFINITY, path);
        }
        path.push(sigma_sq);
        ll -= 0.5 * (LN_2PI + sigma_sq.ln() + e * e / sigma_sq);
    }
    if !ll.is_finite() {
        return (f64::NEG_INFINITY, path);
    }
    (ll, path)
}

/// Unconstrained coordinates: omega = exp(a), and (alpha, beta) through the
/// logistic-simplex map alpha = e^b / (1 + e^b + e^c), beta = e^c / (...),
/// which keeps alpha, beta > 0 and alpha + beta < 1 for every (b, c).
fn from_unconstrained(z: &[f64]) -> (f64, f64, f64) {
    let omega = z[0].exp();
    let eb = z[1].exp();
    let ec = z[2].exp();
    let denom = 1.0 + eb + ec;
    (omega, eb / denom, ec / denom)
}

fn to_unconstrained(omega: f64, alpha: f64, beta: f64) -> [f64; 3] {
    let rest = 1.0 - alpha - beta;
    [omega.ln(), (alpha / rest).ln(), (beta / rest).ln()]
}

/// Fits a GARCH(1,1) by Gaussian quasi-maximum likelihood.
///
/// The sample mean is subtracted first (constant mean equation). Five fixed
/// multi-start points bracket the usual persistence range; the reported fit
/// is the best final likelihood across starts.
pub fn garch_fit(r: &ReturnSeries) -> Result<GarchFit> {
    let n = r.len();
    if n < 30 {
        return Err(Error::InsufficientData { needed: 30, got: n });
    }
    let values = r.values();
    let mean = values.iter().sum::<f64>() / n as f64;
    let eps: Vec<f64> = values.iter().map(|v| v - mean).collect();

    let sigma1_sq = population_variance(&eps);
    if sigma1_sq <= 0.0 {
        return Err(Error::degenerate("zero variance: cannot fit GARCH"));
    }

    // (alpha, beta) start pairs; omega matches the sample variance through
    // omega = var * (1 - alpha - beta).
    let starts: [(f64, f64); 5] = [
        (0.05, 0.90),
        (0.10, 0.80),
        (0.15, 0.70),
        (0.02, 0.95),
        (0.30, 0.40),
    ];

    let objective = |z: &[f64]| {
        let (omega, alpha, beta) = from_unconstrained(z);
        let (ll, _) = loglik_with_init(&eps, omega, alpha, beta, sigma1_sq);
        -ll
    };

    let mut best: Option<NelderMeadResult> = None;
    let mut total_iterations = 0;
    for &(alpha0, beta0) in &starts {
        let omega0 = sigma1_sq * (1.0 - alpha0 - beta0);
        let z0 = to_unconstrained(omega0, alpha0, beta0);
        let res = nelder_mead(objective, &z0, 0.5, FIT_TOL, FIT_MAX_ITER);
        total_iterations += res.iterations;
        let better = match &best {
            Some(b) => res.fx < b.fx,
            None => true,
        };
        if res.fx.is_finite() && better {
            best = Some(res);
        }
    }

    let best = best.ok_or_else(|| {
        Error::EstimationFailure(format!(
            "no start produced a finite likelihood (n={n}, sample variance={sigma1_sq:.6e})"
        ))
    })?;

    let (omega, alpha, beta) = from_unconstrained(&best.x);
    let params = GarchParams::new(omega, alpha, beta)?;
    let (ll, path) = loglik_with_init(&eps, omega, alpha, beta, sigma1_sq);
    if !ll.is_finite() {
        return Err(Error::EstimationFailure(
            "optimum has non-finite likelihood".to_string(),
        ));
    }
    assert!(
        path.iter().all(|&v| v > 0.0),
        "conditional-variance path must be strictly positive"
    );

    Ok(GarchFit {
        params,
        log_likelihood: ll,
        cond_variance: path,
        iterations: total_iterations,
        converged: best.converged,
        mean_subtracted: mean,
        low_sample: n < 100,
    })
}

/// Simulates a GARCH(1,1) return series with unit-variance innovations,
/// deterministic per seed, on a synthetic weekday calendar.
///
/// `sigma_1^2` starts at the unconditional variance `omega / (1-alpha-beta)`.
pub fn garch_simulate(
    params: &GarchParams,
    n: usize,
    seed: u64,
    innovation: Innovation,
) -> Result<ReturnSeries> {
    params.validate()?;
    if n == 0 {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    if let Innovation::StudentT { df } = innovation {
        if df <= 2.0 {
            return Err(Error::domain(format!(
                "student-t innovations require df > 2, got {df}"
            )));
        }
    }
    let mut sampler = QuantileSampler::new(seed);
    let mut values = Vec::with_capacity(n);
    let mut sigma_sq = params.unconditional_variance();
    let mut prev_eps = 0.0;
    for t in 0..n {
        if t > 0 {
            sigma_sq = params.omega + params.alpha * prev_eps * prev_eps + params.beta * sigma_sq;
        }
        let z = match innovation {
            Innovation::Normal => sampler.standard_normal(),
            Innovation::StudentT { df } => sampler.unit_variance_student_t(df)?,
        };
        let eps = sigma_sq.sqrt() * z;
        values.push(eps);
        prev_eps = eps;
    }
    ReturnSeries::from_values(
        format!("garch-sim-{seed}"),
        TimeScale::Daily,
        NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date"),
        &values,
    )
}

/// One point of the normalized-return / volatility-band overlay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub date: NaiveDate,
    pub normalized_return: f64,
    pub upper: f64,
    pub lower: f64,
}

/// Normalized demeaned returns with `±k * sigma_t` bands on the same
/// normalized scale (unconditional standard deviation = 1).
pub fn volatility_bands(r: &ReturnSeries, fit: &GarchFit, k: f64) -> Result<Vec<BandPoint>> {
    if fit.cond_variance.len() != r.len() {
        return Err(Error::domain(format!(
            "fit has {} conditional variances but the series has {} observations",
            fit.cond_variance.len(),
            r.len()
        )));
    }
    if !k.is_finite() || k < 0.0 {
        return Err(Error::domain(format!(
            "band multiplier must be nonnegative and finite, got {k}"
        )));
    }
    let eps: Vec<f64> = r.values().iter().map(|v| v - fit.mean_subtracted).collect();
    let uncond_sd = population_variance(&eps).sqrt();
    if uncond_sd <= 0.0 {
        return Err(Error::degenerate("zero variance: bands undefined"));
    }
    Ok(r.observations()
        .iter()
        .zip(&fit.cond_variance)
        .map(|(obs, &var)| {
            let band = k * var.sqrt() / uncond_sd;
            BandPoint {
                date: obs.date,
                normalized_return: (obs.value - fit.mean_subtracted) / uncond_sd,
                upper: band,
                lower: -band,
            }
        })
        .collect())
}
