//! Report emission: a single JSON document, a directory of CSV tables with
//! operation-qualified headers, and a directory of static SVG figures.
//!
//! CSV is the canonical plot-data interface for external tools; every header
//! cell names the operation that produced the column, so each number in the
//! emitted report is traceable back to its producer.

use std::path::{Path, PathBuf};

use crate::density::CurveKind;
use crate::error::{Error, Result};
use crate::moments::ScanOutcome;
use crate::report::{density_kind_name, ReportBundle};
use crate::svg::{range_of, Plot};

/// Output formats for `emit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Json,
    CsvDir,
    SvgDir,
}

impl EmitFormat {
    pub const ALL: [EmitFormat; 3] = [EmitFormat::Json, EmitFormat::CsvDir, EmitFormat::SvgDir];
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(EmitFormat::Json),
            "csv" | "csv-dir" => Ok(EmitFormat::CsvDir),
            "svg" | "svg-dir" => Ok(EmitFormat::SvgDir),
            other => Err(Error::domain(format!(
                "unknown format '{other}' (expected json, csv, svg or all)"
            ))),
        }
    }
}

/// Writes the requested formats under `out_dir` and returns every file
/// created. Layout: `report.json`, `csv/*.csv`, `svg/*.svg`.
pub fn emit(bundle: &ReportBundle, out_dir: &Path, formats: &[EmitFormat]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for format in formats {
        match format {
            EmitFormat::Json => {
                let path = out_dir.join("report.json");
                std::fs::write(&path, crate::report::to_json(bundle)?)?;
                written.push(path);
            }
            EmitFormat::CsvDir => written.extend(emit_csv_dir(bundle, &out_dir.join("csv"))?),
            EmitFormat::SvgDir => written.extend(emit_svg_dir(bundle, &out_dir.join("svg"))?),
        }
    }
    Ok(written)
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

fn emit_csv_dir(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut push = |p: PathBuf| written.push(p);

    // Table 2 analogue: one row per time scale.
    let path = dir.join("summary_by_scale.csv");
    let rows: Vec<Vec<String>> = bundle
        .aggregation_scan
        .iter()
        .map(|row| {
            let s = row.summary;
            let (jb_stat, jb_p, flag) = match &row.jarque_bera {
                ScanOutcome::Test(t) => {
                    (t.statistic.to_string(), t.p_value.to_string(), String::new())
                }
                ScanOutcome::TooFewObservations { n } => {
                    (String::new(), String::new(), format!("too_few_observations({n})"))
                }
                ScanOutcome::DegenerateSeries => {
                    (String::new(), String::new(), "degenerate_series".to_string())
                }
            };
            vec![
                row.scale.label().to_string(),
                row.n.to_string(),
                opt(s.map(|s| s.mean)),
                opt(s.map(|s| s.median)),
                opt(s.map(|s| s.min)),
                opt(s.map(|s| s.max)),
                opt(s.map(|s| s.std_dev)),
                opt(s.and_then(|s| s.skewness)),
                opt(s.and_then(|s| s.kurtosis)),
                jb_stat,
                jb_p,
                flag,
            ]
        })
        .collect();
    write_csv(
        &path,
        &[
            "scale",
            "summarize.n",
            "summarize.mean",
            "summarize.median",
            "summarize.min",
            "summarize.max",
            "summarize.std_dev",
            "summarize.skewness",
            "summarize.kurtosis",
            "jarque_bera.statistic",
            "jarque_bera.p_value",
            "flag",
        ],
        &rows,
    )?;
    push(path);

    // Table 3 analogue plus normality tests.
    let path = dir.join("tests.csv");
    let rows: Vec<Vec<String>> = bundle
        .tests
        .iter()
        .map(|t| {
            vec![
                t.test_name.clone(),
                t.statistic.to_string(),
                t.df.map_or(String::new(), |d| d.to_string()),
                t.p_value.to_string(),
                t.sample_size.to_string(),
                t.null_hypothesis.clone(),
            ]
        })
        .collect();
    write_csv(
        &path,
        &[
            "test.name",
            "test.statistic",
            "test.df",
            "test.p_value",
            "test.sample_size",
            "test.null_hypothesis",
        ],
        &rows,
    )?;
    push(path);

    for acf in &bundle.acf {
        let path = dir.join(format!("acf_{}.csv", acf.transform.label()));
        let rows: Vec<Vec<String>> = acf
            .rho
            .iter()
            .enumerate()
            .map(|(i, r)| {
                vec![
                    (i + 1).to_string(),
                    r.to_string(),
                    acf.band_halfwidth.to_string(),
                ]
            })
            .collect();
        write_csv(&path, &["lag", "acf.rho", "acf.band_halfwidth"], &rows)?;
        push(path);
    }

    let path = dir.join("mcleod_li.csv");
    let rows: Vec<Vec<String>> = bundle
        .mcleod_li
        .iter()
        .map(|p| vec![p.lags.to_string(), p.statistic.to_string(), p.p_value.to_string()])
        .collect();
    write_csv(
        &path,
        &["lags", "mcleod_li.statistic", "mcleod_li.p_value"],
        &rows,
    )?;
    push(path);

    for curve in &bundle.density {
        let name = density_kind_name(curve.kind);
        let path = dir.join(format!("{name}.csv"));
        let rows: Vec<Vec<String>> = curve
            .grid
            .iter()
            .zip(&curve.empirical)
            .zip(&curve.reference)
            .map(|((g, e), r)| vec![g.to_string(), e.to_string(), r.to_string()])
            .collect();
        write_csv(
            &path,
            &[
                "grid",
                &format!("{name}.density"),
                &format!("{name}.reference_density"),
            ],
            &rows,
        )?;
        push(path);
    }

    for qq in &bundle.qq {
        let name = match qq.reference {
            crate::dist::Distribution::StudentT { .. } => "qq_student_t",
            _ => "qq_normal",
        };
        let path = dir.join(format!("{name}.csv"));
        let rows: Vec<Vec<String>> = qq
            .points
            .iter()
            .map(|p| vec![p.theoretical.to_string(), p.sample.to_string()])
            .collect();
        write_csv(
            &path,
            &["qq_points.theoretical", "qq_points.sample"],
            &rows,
        )?;
        push(path);
    }

    let path = dir.join("lag_pairs.csv");
    let rows: Vec<Vec<String>> = bundle
        .lag_pairs
        .pairs
        .iter()
        .map(|p| {
            vec![
                p.date.format("%Y-%m-%d").to_string(),
                p.prev.to_string(),
                p.current.to_string(),
            ]
        })
        .collect();
    write_csv(
        &path,
        &["date", "lag_pairs.prev", "lag_pairs.current"],
        &rows,
    )?;
    push(path);

    if let Some(g) = &bundle.garch {
        let path = dir.join("garch_fit.csv");
        write_csv(
            &path,
            &[
                "garch_fit.omega",
                "garch_fit.alpha",
                "garch_fit.beta",
                "garch_fit.log_likelihood",
                "garch_fit.iterations",
                "garch_fit.converged",
                "garch_fit.low_sample",
                "garch_fit.mean_subtracted",
                "garch_fit.unconditional_std",
            ],
            &[vec![
                g.params.omega.to_string(),
                g.params.alpha.to_string(),
                g.params.beta.to_string(),
                g.log_likelihood.to_string(),
                g.iterations.to_string(),
                g.converged.to_string(),
                g.low_sample.to_string(),
                g.mean_subtracted.to_string(),
                g.unconditional_std.to_string(),
            ]],
        )?;
        push(path);

        let path = dir.join("cond_volatility.csv");
        let rows: Vec<Vec<String>> = g
            .cond_volatility
            .iter()
            .map(|p| vec![p.date.format("%Y-%m-%d").to_string(), p.sigma.to_string()])
            .collect();
        write_csv(&path, &["date", "garch_fit.cond_volatility"], &rows)?;
        push(path);

        let path = dir.join("volatility_bands.csv");
        let rows: Vec<Vec<String>> = g
            .volatility_bands
            .iter()
            .map(|b| {
                vec![
                    b.date.format("%Y-%m-%d").to_string(),
                    b.normalized_return.to_string(),
                    b.upper.to_string(),
                    b.lower.to_string(),
                ]
            })
            .collect();
        write_csv(
            &path,
            &[
                "date",
                "volatility_bands.normalized_return",
                "volatility_bands.upper",
                "volatility_bands.lower",
            ],
            &rows,
        )?;
        push(path);
    }

    let path = dir.join("metadata.csv");
    let rows: Vec<Vec<String>> = bundle
        .metadata
        .iter()
        .map(|(k, v)| vec![k.clone(), v.clone()])
        .collect();
    write_csv(&path, &["key", "value"], &rows)?;
    push(path);

    let path = dir.join("stages.csv");
    let rows: Vec<Vec<String>> = bundle
        .stages
        .iter()
        .map(|(k, v)| {
            let (status, detail) = match v {
                crate::report::StageStatus::Ok => ("ok".to_string(), String::new()),
                crate::report::StageStatus::Skipped { reason } => {
                    ("skipped".to_string(), reason.clone())
                }
                crate::report::StageStatus::Failed { error } => {
                    ("failed".to_string(), error.clone())
                }
            };
            vec![k.clone(), status, detail]
        })
        .collect();
    write_csv(&path, &["stage", "status", "detail"], &rows)?;
    push(path);

    Ok(written)
}

fn emit_svg_dir(bundle: &ReportBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    for curve in &bundle.density {
        match curve.kind {
            CurveKind::Histogram => {
                let mut plot = Plot::new(
                    &format!("{}: histogram vs {}", bundle.instrument_id, curve.reference_label),
                    range_of(&curve.grid),
                    (0.0, {
                        let (_, hi_e) = (0.0, curve.empirical.iter().cloned().fold(0.0, f64::max));
                        let hi_r = curve.reference.iter().cloned().fold(0.0, f64::max);
                        hi_e.max(hi_r)
                    }),
                );
                plot.bars(
                    &curve.grid,
                    &curve.empirical,
                    curve.bin_width.unwrap_or(1.0),
                    "#7da7d9",
                );
                plot.polyline(&curve.grid, &curve.reference, "#c0392b", 1.8);
                let path = dir.join("histogram.svg");
                std::fs::write(&path, plot.finish())?;
                written.push(path);
            }
            CurveKind::Kde => {
                let hi = curve
                    .empirical
                    .iter()
                    .chain(&curve.reference)
                    .cloned()
                    .fold(0.0, f64::max);
                let mut plot = Plot::new(
                    &format!("{}: kernel density vs {}", bundle.instrument_id, curve.reference_label),
                    range_of(&curve.grid),
                    (0.0, hi),
                );
                plot.polyline(&curve.grid, &curve.empirical, "#2c3e50", 1.8);
                plot.polyline(&curve.grid, &curve.reference, "#c0392b", 1.4);
                let path = dir.join("kde.svg");
                std::fs::write(&path, plot.finish())?;
                written.push(path);
            }
        }
    }

    for qq in &bundle.qq {
        let (name, title) = match qq.reference {
            crate::dist::Distribution::StudentT { df } => (
                "qq_student_t",
                format!("{}: QQ vs student t(df={df})", bundle.instrument_id),
            ),
            _ => ("qq_normal", format!("{}: QQ vs normal", bundle.instrument_id)),
        };
        let theo: Vec<f64> = qq.points.iter().map(|p| p.theoretical).collect();
        let samp: Vec<f64> = qq.points.iter().map(|p| p.sample).collect();
        let (lo_t, hi_t) = range_of(&theo);
        let (lo_s, hi_s) = range_of(&samp);
        let lo = lo_t.min(lo_s);
        let hi = hi_t.max(hi_s);
        let mut plot = Plot::new(&title, (lo, hi), (lo, hi));
        plot.polyline(&[lo, hi], &[lo, hi], "#999999", 1.0);
        plot.scatter(&theo, &samp, "#2c3e50", 2.0);
        let path = dir.join(format!("{name}.svg"));
        std::fs::write(&path, plot.finish())?;
        written.push(path);
    }

    for acf in &bundle.acf {
        let lags: Vec<f64> = (1..=acf.rho.len()).map(|k| k as f64).collect();
        let (lo, hi) = range_of(&acf.rho);
        let band = acf.band_halfwidth;
        let mut plot = Plot::new(
            &format!("{}: ACF of {} returns", bundle.instrument_id, acf.transform.label()),
            (0.0, lags.len() as f64 + 1.0),
            (lo.min(-band) * 1.2, hi.max(band) * 1.2),
        );
        plot.hline(0.0, "#555555", false);
        plot.hline(band, "#2980b9", true);
        plot.hline(-band, "#2980b9", true);
        plot.stems(&lags, &acf.rho, "#2c3e50");
        let path = dir.join(format!("acf_{}.svg", acf.transform.label()));
        std::fs::write(&path, plot.finish())?;
        written.push(path);
    }

    if !bundle.mcleod_li.is_empty() {
        let lags: Vec<f64> = bundle.mcleod_li.iter().map(|p| p.lags as f64).collect();
        let ps: Vec<f64> = bundle.mcleod_li.iter().map(|p| p.p_value).collect();
        let mut plot = Plot::new(
            &format!("{}: McLeod-Li p-values", bundle.instrument_id),
            (0.0, lags.last().copied().unwrap_or(1.0) + 1.0),
            (0.0, 1.0),
        );
        plot.hline(0.05, "#c0392b", true);
        plot.scatter(&lags, &ps, "#2c3e50", 2.5);
        let path = dir.join("mcleod_li.svg");
        std::fs::write(&path, plot.finish())?;
        written.push(path);
    }

    if !bundle.lag_pairs.pairs.is_empty() {
        let prev: Vec<f64> = bundle.lag_pairs.pairs.iter().map(|p| p.prev).collect();
        let cur: Vec<f64> = bundle.lag_pairs.pairs.iter().map(|p| p.current).collect();
        let (lo_p, hi_p) = range_of(&prev);
        let (lo_c, hi_c) = range_of(&cur);
        let mut plot = Plot::new(
            &format!("{}: lag plot (r_t vs r_t-1)", bundle.instrument_id),
            (lo_p, hi_p),
            (lo_c, hi_c),
        );
        plot.scatter(&prev, &cur, "#2c3e50", 1.6);
        let path = dir.join("lag_plot.svg");
        std::fs::write(&path, plot.finish())?;
        written.push(path);
    }

    if let Some(g) = &bundle.garch {
        let xs: Vec<f64> = (0..g.cond_volatility.len()).map(|i| i as f64).collect();
        let sigma: Vec<f64> = g.cond_volatility.iter().map(|p| p.sigma).collect();
        let mut plot = Plot::new(
            &format!("{}: conditional volatility", bundle.instrument_id),
            (0.0, xs.len() as f64),
            range_of(&sigma),
        );
        plot.polyline(&xs, &sigma, "#2c3e50", 1.2);
        let path = dir.join("cond_volatility.svg");
        std::fs::write(&path, plot.finish())?;
        written.push(path);

        let returns: Vec<f64> = g.volatility_bands.iter().map(|b| b.normalized_return).collect();
        let upper: Vec<f64> = g.volatility_bands.iter().map(|b| b.upper).collect();
        let lower: Vec<f64> = g.volatility_bands.iter().map(|b| b.lower).collect();
        let (lo, hi) = range_of(&returns);
        let (blo, bhi) = range_of(&upper);
        let mut plot = Plot::new(
            &format!("{}: normalized returns with volatility bands", bundle.instrument_id),
            (0.0, returns.len() as f64),
            (lo.min(-bhi), hi.max(bhi).max(blo)),
        );
        plot.polyline(&xs, &returns, "#7f8c8d", 0.8);
        plot.polyline(&xs, &upper, "#c0392b", 1.2);
        plot.polyline(&xs, &lower, "#c0392b", 1.2);
        let path = dir.join("volatility_bands.svg");
        std::fs::write(&path, plot.finish())?;
        written.push(path);
    }

    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::garch::{garch_simulate, GarchParams, Innovation};
    use crate::report::{run_report, ReportConfig};
    use crate::series::{PricePoint, PriceSeries};
    use crate::svg::looks_like_valid_svg;
    use chrono::NaiveDate;

    fn sim_prices(n: usize, seed: u64) -> PriceSeries {
        let params = GarchParams::new(0.1, 0.1, 0.8).unwrap();
        let r = garch_simulate(&params, n, seed, Innovation::Normal).unwrap();
        let mut price = 100.0;
        let mut obs = vec![PricePoint {
            date: NaiveDate::from_ymd_opt(1999, 12, 31).unwrap(),
            price,
        }];
        for point in r.observations() {
            price *= (point.value / 100.0).exp();
            obs.push(PricePoint { date: point.date, price });
        }
        PriceSeries::new("sim", obs).unwrap()
    }

    #[test]
    fn emit_all_formats_and_roundtrip() {
        let p = sim_prices(700, 3);
        let mut config = ReportConfig::default();
        config.fixed_clock = Some("2020-01-01T00:00:00Z".into());
        config.subsample_last = vec![100];
        let bundle = run_report(&p, &config).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let files = emit(&bundle, dir.path(), &EmitFormat::ALL).unwrap();

        // JSON round trip is structurally identical.
        let json_path = dir.path().join("report.json");
        assert!(files.contains(&json_path));
        let parsed = crate::report::from_json(&std::fs::read_to_string(&json_path).unwrap())
            .unwrap();
        assert_eq!(parsed, bundle);

        // CSV row counts match bundle cardinalities.
        let csv_dir = dir.path().join("csv");
        let count_rows = |name: &str| {
            let content = std::fs::read_to_string(csv_dir.join(name)).unwrap();
            content.lines().count() - 1 // minus header
        };
        assert_eq!(count_rows("summary_by_scale.csv"), bundle.aggregation_scan.len());
        assert_eq!(count_rows("tests.csv"), bundle.tests.len());
        assert_eq!(count_rows("mcleod_li.csv"), bundle.mcleod_li.len());
        assert_eq!(count_rows("lag_pairs.csv"), bundle.lag_pairs.pairs.len());
        assert_eq!(
            count_rows("cond_volatility.csv"),
            bundle.garch.as_ref().unwrap().cond_volatility.len()
        );
        assert_eq!(count_rows("acf_identity.csv"), bundle.acf[0].rho.len());
        assert_eq!(count_rows("histogram.csv"), bundle.density[0].grid.len());
        assert_eq!(count_rows("qq_normal.csv"), bundle.qq[0].points.len());
        assert_eq!(count_rows("metadata.csv"), bundle.metadata.len());

        // SVG set: one file per figure, all well-formed.
        let svg_dir = dir.path().join("svg");
        let expected = [
            "histogram.svg",
            "kde.svg",
            "qq_normal.svg",
            "qq_student_t.svg",
            "acf_identity.svg",
            "acf_square.svg",
            "acf_absolute.svg",
            "mcleod_li.svg",
            "lag_plot.svg",
            "cond_volatility.svg",
            "volatility_bands.svg",
        ];
        let mut found: Vec<String> = std::fs::read_dir(&svg_dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        found.sort();
        let mut want: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
        want.sort();
        assert_eq!(found, want);
        for name in expected {
            let content = std::fs::read_to_string(svg_dir.join(name)).unwrap();
            assert!(looks_like_valid_svg(&content), "{name} is not well-formed");
        }
    }

    #[test]
    fn emit_json_only_writes_single_file() {
        let p = sim_prices(120, 5);
        let bundle = run_report(&p, &ReportConfig::default()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = emit(&bundle, dir.path(), &[EmitFormat::Json]).unwrap();
        assert_eq!(files.len(), 1);
        assert!(!dir.path().join("csv").exists());
    }

    #[test]
    fn emit_to_unwritable_path_is_io_error() {
        let p = sim_prices(120, 5);
        let bundle = run_report(&p, &ReportConfig::default()).unwrap();
        let err = emit(
            &bundle,
            Path::new("/proc/definitely/not/writable"),
            &[EmitFormat::Json],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
