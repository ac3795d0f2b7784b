//! Result reports and their export formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::consistency::{consistency_report, ConsistencyReport};
use crate::document::{to_pretty, FORMAT_VERSION};
use crate::error::{DocumentError, HierarchyError};
use crate::hierarchy::Hierarchy;
use crate::synthesis::{contribution_matrix, synthesize, ContributionTable, Scored};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExportFormat {
    /// JSON report document.
    Structured,
    /// Comma-separated contribution table.
    Tabular,
    /// Plain-text summary.
    Text,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" | "json" => Ok(Self::Structured),
            "tabular" | "csv" => Ok(Self::Tabular),
            "text" => Ok(Self::Text),
            _ => Err(format!("unknown format `{s}` (expected structured, tabular or text)")),
        }
    }
}

/// Digits after the decimal point for tabular and text output.
pub const DEFAULT_DECIMALS: usize = 6;
/// Display mode matching the 3-decimal published table.
pub const TABLE_DECIMALS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub model_hash: String,
    pub tool_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeConsistency {
    pub node: String,
    pub report: ConsistencyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: u64,
    pub kind: String,
    pub provenance: Provenance,
    pub labels: BTreeMap<String, String>,
    pub ranking: Vec<Scored>,
    pub alternatives: Vec<Scored>,
    pub global_weights: Vec<Scored>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contribution_table: Option<ContributionTable>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub consistency: Vec<NodeConsistency>,
}

/// Synthesizes `h` and gathers everything a report shows. The contribution
/// table is included when the hierarchy has the goal -> criteria -> shared
/// alternatives shape.
pub fn build_report(h: &Hierarchy, model_hash: &str) -> Result<ReportDocument, HierarchyError> {
    let gp = synthesize(h)?;
    let table = match contribution_matrix(h, &gp) {
        Ok(t) => Some(t),
        Err(HierarchyError::NotTableShape(_)) => None,
        Err(e) => return Err(e),
    };
    let mut consistency = Vec::new();
    for n in h.internal_nodes() {
        if let (Some(m), Some(pv)) = (h.matrix(&n.id), h.local_priorities(&n.id)) {
            consistency.push(NodeConsistency { node: n.id.clone(), report: consistency_report(m, pv)? });
        }
    }
    Ok(ReportDocument {
        format_version: FORMAT_VERSION,
        kind: "report".into(),
        provenance: Provenance {
            model_hash: model_hash.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_at: None,
        },
        labels: h.nodes().iter().map(|n| (n.id.clone(), n.label.clone())).collect(),
        ranking: gp.ranking,
        alternatives: gp.alternatives,
        global_weights: gp.per_node,
        contribution_table: table,
        consistency,
    })
}

impl ReportDocument {
    fn label<'a>(&'a self, id: &'a str) -> &'a str {
        self.labels.get(id).map(String::as_str).unwrap_or(id)
    }
}

/// Serializes a report. `decimals` applies to tabular and text output
/// (default 6); structured output keeps full precision unless `decimals` is
/// given, in which case every number is rounded.
pub fn export_report(
    report: &ReportDocument,
    format: ExportFormat,
    decimals: Option<usize>,
) -> Result<Vec<u8>, DocumentError> {
    match format {
        ExportFormat::Structured => match decimals {
            None => Ok(to_pretty(report)),
            Some(d) => {
                let mut v = serde_json::to_value(report).map_err(|e| DocumentError::Export(e.to_string()))?;
                round_numbers(&mut v, d);
                Ok(to_pretty(&v))
            }
        },
        ExportFormat::Tabular => tabular(report, decimals.unwrap_or(DEFAULT_DECIMALS)),
        ExportFormat::Text => Ok(text(report, decimals.unwrap_or(DEFAULT_DECIMALS)).into_bytes()),
    }
}

pub fn load_report(bytes: &[u8]) -> Result<ReportDocument, DocumentError> {
    let r: ReportDocument = serde_json::from_slice(bytes).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if r.format_version != FORMAT_VERSION {
        return Err(DocumentError::UnsupportedVersion { found: r.format_version, supported: FORMAT_VERSION });
    }
    if r.kind != "report" {
        return Err(DocumentError::WrongKind { expected: "report", found: r.kind });
    }
    Ok(r)
}

fn round_numbers(v: &mut Value, decimals: usize) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let s = format!("{x:.decimals$}");
            if let Some(r) = s.parse::<f64>().ok().and_then(serde_json::Number::from_f64) {
                *n = r;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(|x| round_numbers(x, decimals)),
        Value::Object(o) => o.values_mut().for_each(|x| round_numbers(x, decimals)),
        _ => {}
    }
}

/// Criterion rows, alternative columns, a TOTAL column and a TOTAL row. Without
/// a contribution table, falls back to `alternative,score` rows.
fn tabular(r: &ReportDocument, d: usize) -> Result<Vec<u8>, DocumentError> {
    let err = |e: csv::Error| DocumentError::Export(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let num = |x: f64| format!("{x:.d$}");
    match &r.contribution_table {
        Some(t) => {
            let mut header = vec![String::new()];
            header.extend(t.columns.iter().map(|c| r.label(c).to_string()));
            header.push("TOTAL".into());
            w.write_record(&header).map_err(err)?;
            for ((id, row), total) in t.rows.iter().zip(&t.cells).zip(&t.row_totals) {
                let mut rec = vec![r.label(id).to_string()];
                rec.extend(row.iter().map(|&x| num(x)));
                rec.push(num(*total));
                w.write_record(&rec).map_err(err)?;
            }
            let mut rec = vec!["TOTAL".to_string()];
            rec.extend(t.column_totals.iter().map(|&x| num(x)));
            rec.push(String::new());
            w.write_record(&rec).map_err(err)?;
        }
        None => {
            w.write_record(["alternative", "score"]).map_err(err)?;
            for s in &r.alternatives {
                w.write_record([r.label(&s.id), &num(s.score)]).map_err(err)?;
            }
        }
    }
    w.into_inner().map_err(|e| DocumentError::Export(e.to_string()))
}

fn text(r: &ReportDocument, d: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Ranking");
    for (k, s) in r.ranking.iter().enumerate() {
        let _ = writeln!(out, "  {}. {:<24} {:.d$}", k + 1, r.label(&s.id), s.score);
    }
    if let Some(t) = &r.contribution_table {
        let width = t.rows.iter().map(|id| r.label(id).len()).max().unwrap_or(0).max(5) + 2;
        let cols: Vec<&str> = t.columns.iter().map(|c| r.label(c)).collect();
        let cw = cols.iter().map(|c| c.len()).max().unwrap_or(0).max(d + 3) + 2;
        let _ = writeln!(out, "\nContribution table");
        let _ = write!(out, "{:width$}", "");
        for c in &cols {
            let _ = write!(out, "{c:>cw$}");
        }
        let _ = writeln!(out, "{:>cw$}", "TOTAL");
        for ((id, row), total) in t.rows.iter().zip(&t.cells).zip(&t.row_totals) {
            let _ = write!(out, "{:width$}", r.label(id));
            for x in row {
                let _ = write!(out, "{x:>cw$.d$}");
            }
            let _ = writeln!(out, "{total:>cw$.d$}");
        }
        let _ = write!(out, "{:width$}", "TOTAL");
        for x in &t.column_totals {
            let _ = write!(out, "{x:>cw$.d$}");
        }
        let _ = writeln!(out);
    }
    if !r.consistency.is_empty() {
        let _ = writeln!(out, "\nConsistency");
        for c in &r.consistency {
            let rep = &c.report;
            let verdict = if rep.consistent { "consistent" } else { "INCONSISTENT" };
            let _ = write!(
                out,
                "  {:<24} lambda_max={:.d$} CI={:.d$} CR={:.d$} {verdict}",
                r.label(&c.node),
                rep.lambda_max,
                rep.ci,
                rep.cr
            );
            if let (false, Some(w)) = (rep.consistent, rep.worst_judgment) {
                let _ = write!(out, " (revise pair ({}, {}))", w.row + 1, w.col + 1);
            }
            let _ = writeln!(out);
        }
    }
    out
}
