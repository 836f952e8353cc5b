//! CSV emission for sweep results.
//!
//! Three artifact groups land in the output directory: `results.csv` (one
//! line per solve, fixed header), `summary.csv` (worst-case aggregates per
//! rule/parameter/cap/p group), and `plotdata_{pof,percentf}_<rule>.csv`
//! shaped for max-PoF-vs-parameter and min-%F-vs-parameter curves. Floats are
//! written with Rust's shortest round-trip formatting, so identical runs
//! produce identical bytes.

use std::path::Path;

use super::{HarnessError, ResultRow, SummaryRow};

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_rows_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path).map_err(io_of_csv)?;
    writer
        .write_record([
            "instance",
            "rule",
            "parameter",
            "chain_cap",
            "p",
            "u_e",
            "u_fair",
            "pof",
            "percent_f",
            "region",
            "solve_time",
            "error",
        ])
        .map_err(io_of_csv)?;
    for row in rows {
        let record: [String; 12] = if let Some(error) = &row.error {
            [
                row.instance.clone(),
                row.rule.clone(),
                fmt_opt(row.parameter),
                row.chain_cap.to_string(),
                fmt(row.p),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                error.clone(),
            ]
        } else {
            [
                row.instance.clone(),
                row.rule.clone(),
                fmt_opt(row.parameter),
                row.chain_cap.to_string(),
                fmt(row.p),
                fmt(row.u_e),
                fmt(row.u_fair),
                fmt(row.pof),
                fmt(row.percent_f),
                row.region.label().to_string(),
                row.solve_units.to_string(),
                String::new(),
            ]
        };
        writer.write_record(&record).map_err(io_of_csv)?;
    }
    writer.flush()?;
    Ok(())
}

fn write_summary_csv(summary: &[SummaryRow], path: &Path) -> Result<(), HarnessError> {
    let mut writer = csv::Writer::from_path(path).map_err(io_of_csv)?;
    writer
        .write_record([
            "rule",
            "parameter",
            "chain_cap",
            "p",
            "max_pof",
            "min_percent_f",
            "mean_solve_time",
            "rows",
        ])
        .map_err(io_of_csv)?;
    for row in summary {
        writer
            .write_record([
                row.rule.clone(),
                fmt_opt(row.parameter),
                row.chain_cap.to_string(),
                fmt(row.p),
                fmt(row.max_pof),
                fmt(row.min_percent_f),
                fmt(row.mean_solve_units),
                row.rows.to_string(),
            ])
            .map_err(io_of_csv)?;
    }
    writer.flush()?;
    Ok(())
}

fn write_plotdata(
    summary: &[SummaryRow],
    rule: &str,
    dir: &Path,
) -> Result<(), HarnessError> {
    let rows: Vec<&SummaryRow> = summary
        .iter()
        .filter(|s| s.rule == rule && s.parameter.is_some())
        .collect();
    if rows.is_empty() {
        return Ok(());
    }
    let mut pof = csv::Writer::from_path(dir.join(format!("plotdata_pof_{rule}.csv")))
        .map_err(io_of_csv)?;
    pof.write_record(["parameter", "chain_cap", "p", "max_pof"])
        .map_err(io_of_csv)?;
    let mut fair = csv::Writer::from_path(dir.join(format!("plotdata_percentf_{rule}.csv")))
        .map_err(io_of_csv)?;
    fair.write_record(["parameter", "chain_cap", "p", "min_percent_f"])
        .map_err(io_of_csv)?;
    for row in rows {
        let parameter = fmt_opt(row.parameter);
        pof.write_record([
            parameter.clone(),
            row.chain_cap.to_string(),
            fmt(row.p),
            fmt(row.max_pof),
        ])
        .map_err(io_of_csv)?;
        fair.write_record([
            parameter,
            row.chain_cap.to_string(),
            fmt(row.p),
            fmt(row.min_percent_f),
        ])
        .map_err(io_of_csv)?;
    }
    pof.flush()?;
    fair.flush()?;
    Ok(())
}

fn io_of_csv(err: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(err))
}

/// Writes `results.csv`, `summary.csv`, and per-rule plot-data files into
/// `dir` (created if missing).
pub fn emit_report(
    rows: &[ResultRow],
    summary: &[SummaryRow],
    dir: &Path,
) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    write_rows_csv(rows, &dir.join("results.csv"))?;
    write_summary_csv(summary, &dir.join("summary.csv"))?;
    for rule in ["alpha", "weighted", "hybrid"] {
        write_plotdata(summary, rule, dir)?;
    }
    Ok(())
}
