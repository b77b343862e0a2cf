//! CSV, manifest and gnuplot emission.
//!
//! Numbers are written as `{:.8e}` (nine significant digits) so files are
//! byte-stable across runs on the same platform.

use std::fmt::Write as _;

use sscdl_core::experiments::{CurveResult, Method, RatioSeries, SinrSeries, SweepAxis};

use crate::CliError;

pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

/// The value a number takes after a CSV round trip.
pub fn csv_precision(x: f64) -> f64 {
    fmt_num(x).parse().expect("formatted float parses")
}

/// Builds CSV text from a header and rows of numbers.
pub fn csv_table(header: &[String], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt_num).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Axis column followed by `<method>_mean_db, <method>_stderr_db` pairs.
pub fn sinr_csv(curve: &CurveResult) -> String {
    let mut header = vec![curve.axis.label().to_string()];
    for s in &curve.sinr {
        header.push(format!("{}_mean_db", s.method.label()));
        header.push(format!("{}_stderr_db", s.method.label()));
    }
    let rows = curve.axis_values.iter().enumerate().map(|(i, &x)| {
        let mut row = vec![x];
        for s in &curve.sinr {
            row.push(s.mean_db[i]);
            row.push(s.stderr_db[i]);
        }
        row
    });
    csv_table(&header, rows)
}

/// Axis column followed by `<method>_int<j>_mean, ..._stderr` pairs.
pub fn projection_csv(curve: &CurveResult) -> String {
    let mut header = vec![curve.axis.label().to_string()];
    for s in &curve.projection {
        header.push(format!("{}_mean", s.label()));
        header.push(format!("{}_stderr", s.label()));
    }
    let rows = curve.axis_values.iter().enumerate().map(|(i, &x)| {
        let mut row = vec![x];
        for s in &curve.projection {
            row.push(s.mean[i]);
            row.push(s.stderr[i]);
        }
        row
    });
    csv_table(&header, rows)
}

fn parse_rows(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let bad = |msg: String| CliError::Config(format!("csv: {msg}"));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("missing header".into()))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("row {}: {e}", n + 1)))?;
        if row.len() != header.len() {
            return Err(bad(format!(
                "row {} has {} cells, header has {}",
                n + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

/// Parses a SINR curve file back into a `CurveResult` with no projection
/// series. Name, trial and failure counts are not part of the file.
pub fn parse_sinr_csv(text: &str) -> Result<CurveResult, CliError> {
    let bad = |msg: String| CliError::Config(format!("csv: {msg}"));
    let (header, rows) = parse_rows(text)?;
    let axis = SweepAxis::from_label(&header[0])
        .ok_or_else(|| bad(format!("unknown axis {:?}", header[0])))?;
    if header.len() % 2 != 1 {
        return Err(bad("expected mean/stderr column pairs".into()));
    }
    let mut sinr = Vec::new();
    for (k, pair) in header[1..].chunks(2).enumerate() {
        let label = pair[0]
            .strip_suffix("_mean_db")
            .ok_or_else(|| bad(format!("unexpected column {:?}", pair[0])))?;
        let method =
            Method::from_label(label).ok_or_else(|| bad(format!("unknown method {label:?}")))?;
        sinr.push(SinrSeries {
            method,
            mean_db: column(&rows, 1 + 2 * k),
            stderr_db: column(&rows, 2 + 2 * k),
        });
    }
    Ok(CurveResult {
        name: String::new(),
        axis,
        axis_values: column(&rows, 0),
        sinr,
        projection: Vec::new(),
        trials: 0,
        failures: 0,
    })
}

/// Parses a projection-ratio file into its series.
pub fn parse_projection_csv(text: &str) -> Result<Vec<RatioSeries>, CliError> {
    let bad = |msg: String| CliError::Config(format!("csv: {msg}"));
    let (header, rows) = parse_rows(text)?;
    let mut out = Vec::new();
    for (k, pair) in header[1..].chunks(2).enumerate() {
        let label = pair[0]
            .strip_suffix("_mean")
            .ok_or_else(|| bad(format!("unexpected column {:?}", pair[0])))?;
        let (method, int) = label
            .rsplit_once("_int")
            .ok_or_else(|| bad(format!("unexpected column {:?}", pair[0])))?;
        let j: usize = int
            .parse()
            .map_err(|_| bad(format!("bad interferer in {label:?}")))?;
        out.push(RatioSeries {
            method: method.to_string(),
            interferer: j - 1,
            mean: column(&rows, 1 + 2 * k),
            stderr: column(&rows, 2 + 2 * k),
        });
    }
    Ok(out)
}

/// File stems for the SINR and projection tables of an experiment.
pub fn curve_stems(curve: &CurveResult) -> (String, String) {
    let fixed = match curve.name.as_str() {
        "baseline" => Some(("fig4_sinr_vs_snr", "fig6_projection_vs_snr")),
        "snapshots" => Some(("fig5_sinr_vs_k", "fig7_projection_vs_k")),
        "subspace_dim" => Some(("fig8_sinr_vs_m", "fig8_projection_vs_m")),
        "doa_m45" => Some(("fig9_sinr_vs_snr_doa_m45", "fig9_projection_doa_m45")),
        "doa_m76" => Some(("fig11_sinr_vs_snr_doa_m76", "fig11_projection_doa_m76")),
        "n14" => Some(("fig13_sinr_vs_snr_n14", "fig13_projection_n14")),
        _ => None,
    };
    match fixed {
        Some((a, b)) => (a.to_string(), b.to_string()),
        None => {
            let axis = curve.axis.label();
            (
                format!("{}_sinr_vs_{axis}", curve.name),
                format!("{}_projection_vs_{axis}", curve.name),
            )
        }
    }
}

fn gp_header(out: &mut String, png: &str, xlabel: &str, ylabel: &str) {
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set datafile commentschars '#'");
    let _ = writeln!(out, "set terminal pngcairo size 900,600");
    let _ = writeln!(out, "set output '{png}'");
    let _ = writeln!(out, "set key autotitle columnhead");
    let _ = writeln!(out, "set grid");
    let _ = writeln!(out, "set xlabel '{xlabel}'");
    let _ = writeln!(out, "set ylabel '{ylabel}'");
}

fn axis_title(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::SnrDb => "input SNR (dB)",
        SweepAxis::Snapshots => "snapshots K",
        SweepAxis::SubspaceDim => "subspace dimension M",
        SweepAxis::None => "point",
    }
}

/// gnuplot script plotting every mean column of a curve file against the
/// axis column, with error bars from the paired standard-error column.
pub fn gnuplot_curves(
    csv_name: &str,
    axis: SweepAxis,
    series: usize,
    ylabel: &str,
    log_y: bool,
) -> String {
    let png = csv_name.replace(".csv", ".png");
    let mut out = String::new();
    gp_header(&mut out, &png, axis_title(axis), ylabel);
    if log_y {
        let _ = writeln!(out, "set logscale y");
    }
    let parts: Vec<String> = (0..series)
        .map(|k| {
            let (m, e) = (2 + 2 * k, 3 + 2 * k);
            format!("'{csv_name}' using 1:{m}:{e} with yerrorlines title columnhead({m})")
        })
        .collect();
    let _ = writeln!(out, "plot {}", parts.join(", \\\n     "));
    out
}

/// gnuplot script for a beampattern file whose dB columns sit at
/// `3, 5, 7, ...`.
pub fn gnuplot_beampattern(csv_name: &str, methods: usize) -> String {
    let png = csv_name.replace(".csv", ".png");
    let mut out = String::new();
    gp_header(&mut out, &png, "angle (deg)", "|w^H a| (dB)");
    let _ = writeln!(out, "set xrange [-90:90]");
    let _ = writeln!(out, "set yrange [-80:10]");
    let parts: Vec<String> = (0..methods)
        .map(|k| {
            let c = 3 + 2 * k;
            format!("'{csv_name}' using 1:{c} with lines title columnhead({c})")
        })
        .collect();
    let _ = writeln!(out, "plot {}", parts.join(", \\\n     "));
    out
}

/// gnuplot script for the γ sweep: SSC-DL and DL SINR against γ.
pub fn gnuplot_gamma(csv_name: &str) -> String {
    let png = csv_name.replace(".csv", ".png");
    let mut out = String::new();
    gp_header(&mut out, &png, "gamma", "output SINR (dB)");
    let _ = writeln!(
        out,
        "plot '{csv_name}' using 1:3 with lines title columnhead(3), \\\n     '{csv_name}' using 1:4 with lines title columnhead(4)"
    );
    out
}
