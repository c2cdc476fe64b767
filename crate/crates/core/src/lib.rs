//! Stylized-facts statistics for financial price series.
//!
//! The crate ingests dated adjusted-close prices, transforms them to
//! percentual log returns, and computes the classic battery of stylized-facts
//! diagnostics: summary moments and normality tests (Jarque-Bera,
//! Kolmogorov-Smirnov), the aggregational-Gaussianity scan across daily to
//! quarterly scales, autocorrelations with Ljung-Box and McLeod-Li
//! portmanteau tests on raw, squared and absolute returns, histogram/KDE/QQ
//! density diagnostics against normal and Student-t references, and
//! GARCH(1,1) quasi-maximum-likelihood volatility estimation. Results are
//! bundled into a per-instrument report that serializes to JSON, CSV tables,
//! or static SVG figures (see the `sfacts` binary).

pub mod dependence;
pub mod density;
pub mod dist;
pub mod emit;
pub mod error;
pub mod garch;
pub mod ingest;
pub mod moments;
pub mod optim;
pub mod report;
pub mod series;
pub mod special;
pub mod svg;

pub use error::{Error, Result};
