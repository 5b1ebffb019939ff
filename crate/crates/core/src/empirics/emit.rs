use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::replicate::{Benchmark, ReplicationReport};
use crate::error::{Error, Result};

/// Formats `x` with 17 significant digits: positional for exponents in
/// `[-5, 16]`, scientific otherwise.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..=16).contains(&exp) {
        format!("{x:.prec$}", prec = (16 - exp) as usize)
    } else {
        sci
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(format_sig17).unwrap_or_default()
}

/// Keeps ASCII alphanumerics, `-` and `_`; anything else becomes `_`.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(header).map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.write_record(&r).map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Human-readable tables with four decimals.
pub fn summary_text(report: &ReplicationReport) -> String {
    let mut s = String::new();
    let benchmark = match report.benchmark {
        Benchmark::True => "true prior",
        Benchmark::Recovered => "recovered prior",
    };
    writeln!(s, "seed: {}", report.seed).unwrap();
    writeln!(s, "benchmark: {benchmark}").unwrap();
    writeln!(
        s,
        "single lambda: {:.4} (mean format RMSE {:.4}; {})",
        report.single_fit.lambda, report.single_fit.rmse, report.single_fit.weighting
    )
    .unwrap();
    writeln!(s, "\nRMSE by format").unwrap();
    writeln!(s, "{:<12} {:>10} {:>10} {:>10}", "format", "fitted", "lambda=0", "lambda=1").unwrap();
    for r in &report.table2 {
        writeln!(s, "{:<12} {:>10.4} {:>10.4} {:>10.4}", r.format, r.rmse_fitted, r.rmse_zero, r.rmse_one).unwrap();
    }
    writeln!(s, "\nFormat-specific lambda").unwrap();
    writeln!(s, "{:<12} {:>10} {:>10} {:>10}", "format", "lambda", "rmse", "single").unwrap();
    for r in &report.table3 {
        writeln!(
            s,
            "{:<12} {:>10.4} {:>10.4} {:>10.4}",
            r.format, r.lambda, r.rmse_partition_dependent, r.rmse_single
        )
        .unwrap();
    }
    match &report.recovery {
        Some(rec) => {
            writeln!(s, "\nRecovered prior from {} (lambda {:.4})", rec.format, rec.lambda).unwrap();
            for (label, p) in report.states.iter().zip(&rec.prior) {
                writeln!(s, "  {label:>6}: {p:.4}").unwrap();
            }
            if rec.roots_found.len() > 1 {
                writeln!(s, "  note: {} roots found", rec.roots_found.len()).unwrap();
            }
        }
        None => writeln!(s, "\nNo prior recovery").unwrap(),
    }
    if !report.table4.is_empty() {
        writeln!(s, "\nTrue versus recovered prior").unwrap();
        writeln!(
            s,
            "{:<12} {:>10} {:>10} {:>10} {:>10}",
            "format", "lambda_t", "rmse_t", "lambda_r", "rmse_r"
        )
        .unwrap();
        for r in &report.table4 {
            writeln!(
                s,
                "{:<12} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
                r.format, r.lambda_true, r.rmse_true, r.lambda_recovered, r.rmse_recovered
            )
            .unwrap();
        }
    }
    for w in &report.warnings {
        writeln!(s, "warning: {w}").unwrap();
    }
    s
}

/// Writes `report.json`, `table2.csv`, `table3.csv`, `table4.csv`, one
/// `fig_<format>.csv` per figure series and `summary.txt`. Returns the paths
/// written, in that order.
pub fn emit_report(report: &ReplicationReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();

    let path = out_dir.join("report.json");
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    write_text(&path, &json)?;
    written.push(path);

    let path = out_dir.join("table2.csv");
    write_csv(
        &path,
        &["format", "rmse_fitted", "rmse_lambda_0", "rmse_lambda_1", "lambda_fitted"],
        report
            .table2
            .iter()
            .map(|r| {
                vec![
                    r.format.clone(),
                    format_sig17(r.rmse_fitted),
                    format_sig17(r.rmse_zero),
                    format_sig17(r.rmse_one),
                    format_sig17(report.single_fit.lambda),
                ]
            })
            .collect(),
    )?;
    written.push(path);

    let path = out_dir.join("table3.csv");
    write_csv(
        &path,
        &["format", "lambda", "rmse_partition_dependent", "rmse_single"],
        report
            .table3
            .iter()
            .map(|r| {
                vec![
                    r.format.clone(),
                    format_sig17(r.lambda),
                    format_sig17(r.rmse_partition_dependent),
                    format_sig17(r.rmse_single),
                ]
            })
            .collect(),
    )?;
    written.push(path);

    let path = out_dir.join("table4.csv");
    write_csv(
        &path,
        &["format", "lambda_true", "rmse_true", "lambda_recovered", "rmse_recovered"],
        report
            .table4
            .iter()
            .map(|r| {
                vec![
                    r.format.clone(),
                    format_sig17(r.lambda_true),
                    format_sig17(r.rmse_true),
                    format_sig17(r.lambda_recovered),
                    format_sig17(r.rmse_recovered),
                ]
            })
            .collect(),
    )?;
    written.push(path);

    for series in &report.figure_data {
        let path = out_dir.join(format!("fig_{}.csv", file_stem(&series.format)));
        write_csv(
            &path,
            &[
                "partition",
                "bin",
                "true",
                "empirical",
                "model",
                "model_partition_dependent",
                "recovered",
                "model_recovered",
            ],
            series
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.partition.clone(),
                        r.bin.clone(),
                        opt(r.true_prob),
                        format_sig17(r.empirical),
                        format_sig17(r.model),
                        format_sig17(r.model_partition_dependent),
                        opt(r.recovered),
                        opt(r.model_recovered),
                    ]
                })
                .collect(),
        )?;
        written.push(path);
    }

    let path = out_dir.join("summary.txt");
    write_text(&path, &summary_text(report))?;
    written.push(path);
    Ok(written)
}
