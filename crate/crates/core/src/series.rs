//! Price and return series types, the price-to-return transforms, and
//! calendar resampling across time scales.
//!
//! Returns are continuously compounded percentual log returns,
//! `r_t = 100 * (ln P_t - ln P_{t-1})`, dated at the later endpoint of each
//! interval. Resampling keeps the last available close of each calendar
//! period (ISO weeks, calendar months, calendar quarters), dated at that
//! close. Missing calendar days are simply absent; nothing is interpolated.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling cadence of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScale {
    Daily,
    Weekly,
    Monthly,
    Quarterly,
}

impl TimeScale {
    pub const ALL: [TimeScale; 4] = [
        TimeScale::Daily,
        TimeScale::Weekly,
        TimeScale::Monthly,
        TimeScale::Quarterly,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            TimeScale::Daily => "daily",
            TimeScale::Weekly => "weekly",
            TimeScale::Monthly => "monthly",
            TimeScale::Quarterly => "quarterly",
        }
    }

    /// Calendar-period key of a date under this scale. Two dates share a key
    /// exactly when they fall in the same period.
    fn period_key(&self, d: NaiveDate) -> (i32, u32) {
        match self {
            TimeScale::Daily => (d.year(), d.ordinal()),
            TimeScale::Weekly => {
                let w = d.iso_week();
                (w.year(), w.week())
            }
            TimeScale::Monthly => (d.year(), d.month()),
            TimeScale::Quarterly => (d.year(), (d.month() - 1) / 3),
        }
    }
}

impl std::fmt::Display for TimeScale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for TimeScale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "daily" | "d" => Ok(TimeScale::Daily),
            "weekly" | "w" => Ok(TimeScale::Weekly),
            "monthly" | "m" => Ok(TimeScale::Monthly),
            "quarterly" | "q" => Ok(TimeScale::Quarterly),
            other => Err(Error::domain(format!(
                "unknown time scale '{other}' (expected daily, weekly, monthly or quarterly)"
            ))),
        }
    }
}

/// One dated closing price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub date: NaiveDate,
    pub price: f64,
}

/// One dated percent log return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnPoint {
    pub date: NaiveDate,
    pub value: f64,
}

/// Dated, strictly positive adjusted-close prices for one instrument.
///
/// Invariants, enforced at construction: dates strictly increasing (hence no
/// duplicates) and every price positive and finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    instrument_id: String,
    cadence: TimeScale,
    observations: Vec<PricePoint>,
}

impl PriceSeries {
    /// Builds a daily price series from dated observations, validating the
    /// series invariants.
    pub fn new(instrument_id: impl Into<String>, observations: Vec<PricePoint>) -> Result<Self> {
        Self::with_cadence(instrument_id, TimeScale::Daily, observations)
    }

    fn with_cadence(
        instrument_id: impl Into<String>,
        cadence: TimeScale,
        observations: Vec<PricePoint>,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        for (i, obs) in observations.iter().enumerate() {
            if !obs.price.is_finite() || obs.price <= 0.0 {
                return Err(Error::domain(format!(
                    "price must be positive and finite, got {} on {}",
                    obs.price, obs.date
                )));
            }
            if i > 0 && observations[i - 1].date >= obs.date {
                return Err(Error::domain(format!(
                    "dates must be strictly increasing: {} does not follow {}",
                    obs.date,
                    observations[i - 1].date
                )));
            }
        }
        Ok(PriceSeries {
            instrument_id: instrument_id.into(),
            cadence,
            observations,
        })
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn cadence(&self) -> TimeScale {
        self.cadence
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[PricePoint] {
        &self.observations
    }

    pub fn first_date(&self) -> NaiveDate {
        self.observations[0].date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.observations[self.observations.len() - 1].date
    }

    /// Simple returns `R_t = P_t / P_{t-1} - 1`, dated at the later
    /// observation.
    pub fn simple_returns(&self) -> Result<Vec<ReturnPoint>> {
        if self.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.len(),
            });
        }
        Ok(self
            .observations
            .windows(2)
            .map(|w| ReturnPoint {
                date: w[1].date,
                value: w[1].price / w[0].price - 1.0,
            })
            .collect())
    }

    /// Continuously compounded percentual returns
    /// `r_t = 100 * (ln P_t - ln P_{t-1})`, at this series' cadence.
    pub fn log_returns(&self) -> Result<ReturnSeries> {
        if self.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.len(),
            });
        }
        let observations = self
            .observations
            .windows(2)
            .map(|w| ReturnPoint {
                date: w[1].date,
                value: 100.0 * (w[1].price.ln() - w[0].price.ln()),
            })
            .collect();
        ReturnSeries::new(self.instrument_id.clone(), self.cadence, observations)
    }

    /// Resamples to a coarser calendar scale, keeping the last close of each
    /// period, dated at that close. Resampling to the series' own cadence is
    /// the identity; periods without observations are skipped.
    pub fn resample(&self, scale: TimeScale) -> Result<PriceSeries> {
        if scale == self.cadence {
            return Ok(self.clone());
        }
        if scale < self.cadence {
            return Err(Error::domain(format!(
                "cannot resample {} data to the finer {} scale",
                self.cadence, scale
            )));
        }
        let mut kept: Vec<PricePoint> = Vec::new();
        for obs in &self.observations {
            match kept.last_mut() {
                Some(last) if scale.period_key(last.date) == scale.period_key(obs.date) => {
                    *last = *obs;
                }
                _ => kept.push(*obs),
            }
        }
        PriceSeries::with_cadence(self.instrument_id.clone(), scale, kept)
    }
}

/// Dated percentual log returns at a declared time scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    instrument_id: String,
    scale: TimeScale,
    observations: Vec<ReturnPoint>,
}

impl ReturnSeries {
    pub fn new(
        instrument_id: impl Into<String>,
        scale: TimeScale,
        observations: Vec<ReturnPoint>,
    ) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        for (i, obs) in observations.iter().enumerate() {
            if !obs.value.is_finite() {
                return Err(Error::domain(format!(
                    "return must be finite, got {} on {}",
                    obs.value, obs.date
                )));
            }
            if i > 0 && observations[i - 1].date >= obs.date {
                return Err(Error::domain(format!(
                    "dates must be strictly increasing: {} does not follow {}",
                    obs.date,
                    observations[i - 1].date
                )));
            }
        }
        Ok(ReturnSeries {
            instrument_id: instrument_id.into(),
            scale,
            observations,
        })
    }

    /// Builds a series from bare values on a synthetic weekday calendar
    /// starting at `start` (weekends skipped). Used by simulators and tests.
    pub fn from_values(
        instrument_id: impl Into<String>,
        scale: TimeScale,
        start: NaiveDate,
        values: &[f64],
    ) -> Result<Self> {
        let dates = weekday_calendar(start, values.len());
        let observations = dates
            .into_iter()
            .zip(values.iter())
            .map(|(date, &value)| ReturnPoint { date, value })
            .collect();
        ReturnSeries::new(instrument_id, scale, observations)
    }

    pub fn instrument_id(&self) -> &str {
        &self.instrument_id
    }

    pub fn scale(&self) -> TimeScale {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn observations(&self) -> &[ReturnPoint] {
        &self.observations
    }

    pub fn values(&self) -> Vec<f64> {
        self.observations.iter().map(|o| o.value).collect()
    }

    /// Sub-series of the most recent `n` observations.
    pub fn last_n(&self, n: usize) -> Result<ReturnSeries> {
        if n == 0 || n > self.len() {
            return Err(Error::domain(format!(
                "sub-sample size {n} outside 1..={}",
                self.len()
            )));
        }
        ReturnSeries::new(
            self.instrument_id.clone(),
            self.scale,
            self.observations[self.len() - n..].to_vec(),
        )
    }
}

/// First `count` weekdays on or after `start`.
pub fn weekday_calendar(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(count);
    let mut d = start;
    while dates.len() < count {
        if d.weekday().number_from_monday() <= 5 {
            dates.push(d);
        }
        d = d.succ_opt().expect("date range exhausted");
    }
    dates
}
