//! CSV exports, their parsers, and the human-readable comparison table.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a written file reproduces the original values exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::TrustLabel;
use crate::ledger::Ledger;
use crate::purge::QuarantineEntry;
use crate::sim::{Aggregate, ExperimentOutput, ReportRow};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report line {line}: {message}")]
    Malformed { line: usize, message: String },
}

pub const REPORT_HEADER: &str =
    "run,initiator,provider,ts1,existing_decision,ts2,proposed_decision";
pub const LEDGER_HEADER: &str = "time,initiator,provider,rating,accepted";
pub const QUARANTINE_HEADER: &str = "entity,flagged_at,release_at,evidence";

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.run,
            row.initiator,
            row.provider,
            row.ts1,
            row.existing_decision,
            row.ts2,
            row.proposed_decision
        )
        .expect("string writes cannot fail");
    }
    out
}

pub fn parse_report_csv(text: &str) -> Result<Vec<ReportRow>, ReportError> {
    let mut rows = Vec::new();
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header == REPORT_HEADER => {}
        Some((_, header)) => {
            return Err(ReportError::Malformed {
                line: 1,
                message: format!("unexpected header `{header}`"),
            })
        }
        None => {
            return Err(ReportError::Malformed {
                line: 1,
                message: "empty report".to_string(),
            })
        }
    }
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 7 {
            return Err(ReportError::Malformed {
                line: idx + 1,
                message: format!("expected 7 fields, got {}", fields.len()),
            });
        }
        let malformed = |message: String| ReportError::Malformed {
            line: idx + 1,
            message,
        };
        rows.push(ReportRow {
            run: fields[0]
                .parse()
                .map_err(|_| malformed(format!("bad run index `{}`", fields[0])))?,
            initiator: fields[1].into(),
            provider: fields[2].into(),
            ts1: fields[3]
                .parse()
                .map_err(|_| malformed(format!("bad ts1 `{}`", fields[3])))?,
            existing_decision: TrustLabel::from_yes_no(fields[4])
                .ok_or_else(|| malformed(format!("bad decision `{}`", fields[4])))?,
            ts2: fields[5]
                .parse()
                .map_err(|_| malformed(format!("bad ts2 `{}`", fields[5])))?,
            proposed_decision: TrustLabel::from_yes_no(fields[6])
                .ok_or_else(|| malformed(format!("bad decision `{}`", fields[6])))?,
        });
    }
    Ok(rows)
}

pub fn ledger_csv(ledger: &Ledger) -> String {
    let mut out = String::from(LEDGER_HEADER);
    out.push('\n');
    for rec in ledger.records() {
        writeln!(
            out,
            "{},{},{},{},{}",
            rec.time.value(),
            rec.initiator,
            rec.provider,
            rec.outcome_rating,
            rec.accepted
        )
        .expect("string writes cannot fail");
    }
    out
}

pub fn quarantine_csv(entries: &[QuarantineEntry]) -> String {
    let mut out = String::from(QUARANTINE_HEADER);
    out.push('\n');
    for entry in entries {
        writeln!(
            out,
            "{},{},{},{}",
            entry.entity,
            entry.flagged_at.value(),
            entry.release_at.value(),
            entry.evidence
        )
        .expect("string writes cannot fail");
    }
    out
}

pub fn aggregate_csv(agg: &Aggregate) -> String {
    let mut out = String::from("metric,value\n");
    writeln!(out, "runs,{}", agg.runs).unwrap();
    writeln!(out, "flag_precision,{}", agg.flag_precision).unwrap();
    writeln!(out, "flag_recall,{}", agg.flag_recall).unwrap();
    writeln!(out, "yes_to_no_flips,{}", agg.yes_to_no_flips).unwrap();
    writeln!(out, "no_to_yes_flips,{}", agg.no_to_yes_flips).unwrap();
    writeln!(out, "runs_flagging_exact,{}", agg.runs_flagging_exact).unwrap();
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| ReportError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, text).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes the full experiment under `out_dir`:
///
/// - `report.csv` — every run's comparison rows
/// - `aggregate.csv` — flag precision/recall and flip counts
/// - `run_<i>/ledger.csv` and `run_<i>/quarantine.csv` per run
pub fn write_experiment(out_dir: &Path, output: &ExperimentOutput) -> Result<(), ReportError> {
    let all_rows: Vec<ReportRow> = output
        .runs
        .iter()
        .flat_map(|r| r.report.rows.iter().cloned())
        .collect();
    write_file(&out_dir.join("report.csv"), &report_csv(&all_rows))?;
    write_file(
        &out_dir.join("aggregate.csv"),
        &aggregate_csv(&output.aggregate),
    )?;
    for run in &output.runs {
        let dir = out_dir.join(format!("run_{}", run.report.run));
        write_file(&dir.join("ledger.csv"), &ledger_csv(&run.ledger))?;
        write_file(
            &dir.join("quarantine.csv"),
            &quarantine_csv(&run.quarantines),
        )?;
    }
    Ok(())
}

/// Plain-text comparison table, stable under a fixed seed.
pub fn render_table(output: &ExperimentOutput) -> String {
    let mut out = String::new();
    for run in &output.runs {
        writeln!(out, "run {}", run.report.run).unwrap();
        writeln!(
            out,
            "{:<9} {:<8} {:>7} {:<8} {:>7} {:<8}",
            "initiator", "provider", "ts1", "existing", "ts2", "proposed"
        )
        .unwrap();
        for row in &run.report.rows {
            writeln!(
                out,
                "{:<9} {:<8} {:>7.3} {:<8} {:>7.3} {:<8}",
                row.initiator.to_string(),
                row.provider.to_string(),
                row.ts1,
                row.existing_decision.to_string(),
                row.ts2,
                row.proposed_decision.to_string()
            )
            .unwrap();
        }
        let flagged: Vec<String> = run.report.flagged.iter().map(|e| e.to_string()).collect();
        writeln!(
            out,
            "flagged: {}",
            if flagged.is_empty() {
                "-".to_string()
            } else {
                flagged.join(", ")
            }
        )
        .unwrap();
        out.push('\n');
    }
    let agg = &output.aggregate;
    writeln!(
        out,
        "aggregate over {} run(s): flag precision {:.3}, flag recall {:.3}, \
         YES->NO flips {}, NO->YES flips {}",
        agg.runs, agg.flag_precision, agg.flag_recall, agg.yes_to_no_flips, agg.no_to_yes_flips
    )
    .unwrap();
    out
}
