//! CSV and JSON report output with fixed 4-decimal values.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{AgreementMatrix, RankError, RankedList};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Report<'a> {
    Matrix(&'a AgreementMatrix),
    Ranking(&'a RankedList),
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("strings serialize")
}

fn num(v: f64) -> String {
    format!("{v:.4}")
}

fn json_list<I: IntoIterator<Item = String>>(items: I) -> String {
    format!("[{}]", items.into_iter().collect::<Vec<_>>().join(", "))
}

pub fn render_report(report: Report<'_>, format: ReportFormat) -> String {
    let mut out = String::new();
    match (report, format) {
        (Report::Matrix(m), ReportFormat::Csv) => {
            let header: Vec<String> = m.outlets.iter().map(|o| csv_field(o)).collect();
            writeln!(out, "outlet,{}", header.join(",")).unwrap();
            for (outlet, row) in m.outlets.iter().zip(&m.values) {
                let cells: Vec<String> = row.iter().map(|v| num(*v)).collect();
                writeln!(out, "{},{}", csv_field(outlet), cells.join(",")).unwrap();
            }
        }
        (Report::Matrix(m), ReportFormat::Json) => {
            let rows: Vec<String> = m
                .values
                .iter()
                .map(|row| json_list(row.iter().map(|v| num(*v))))
                .collect();
            writeln!(out, "{{").unwrap();
            writeln!(out, "  \"outlets\": {},", json_list(m.outlets.iter().map(|o| json_str(o)))).unwrap();
            writeln!(out, "  \"values\": [").unwrap();
            for (i, row) in rows.iter().enumerate() {
                let comma = if i + 1 < rows.len() { "," } else { "" };
                writeln!(out, "    {row}{comma}").unwrap();
            }
            writeln!(out, "  ]").unwrap();
            writeln!(out, "}}").unwrap();
        }
        (Report::Ranking(r), ReportFormat::Csv) => {
            writeln!(out, "rank,item_id,score").unwrap();
            for (i, (id, score)) in r.item_ids.iter().zip(&r.scores).enumerate() {
                writeln!(out, "{},{},{}", i + 1, csv_field(id), num(*score)).unwrap();
            }
        }
        (Report::Ranking(r), ReportFormat::Json) => {
            writeln!(out, "{{").unwrap();
            writeln!(out, "  \"model_outlet\": {},", json_str(&r.model_outlet)).unwrap();
            writeln!(out, "  \"item_ids\": {},", json_list(r.item_ids.iter().map(|i| json_str(i)))).unwrap();
            writeln!(out, "  \"scores\": {}", json_list(r.scores.iter().map(|s| num(*s)))).unwrap();
            writeln!(out, "}}").unwrap();
        }
    }
    out
}

pub fn emit_report(report: Report<'_>, path: &Path, format: ReportFormat) -> Result<(), RankError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| RankError::IoFailure(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, render_report(report, format))
        .map_err(|e| RankError::IoFailure(format!("{}: {e}", path.display())))
}
