//! Operations shared by the command line and the HTTP service, so both emit
//! the same bytes for the same input.

use std::fmt;

use ahp_core::document::{Model, FORMAT_VERSION};
use ahp_core::report::{build_report, export_report, ExportFormat, ReportDocument};
use ahp_core::synthesis::{sensitivity_sweep, RankChange, Scored, SweepPoint};
use ahp_core::{
    sensitivity, DocumentError, ElicitationError, ElicitationSession, Hierarchy, HierarchyError, MatrixError,
    PriorityError, SolverOptions,
};
use serde::{Deserialize, Serialize};

/// A domain error tagged with the module that raised it.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub module: &'static str,
    pub message: String,
}

impl Failure {
    pub fn new(module: &'static str, message: impl Into<String>) -> Self {
        Self { module, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.module, self.message)
    }
}

impl std::error::Error for Failure {}

macro_rules! failure_from {
    ($($t:ty => $m:literal),* $(,)?) => {
        $(impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::new($m, e.to_string())
            }
        })*
    };
}

failure_from! {
    MatrixError => "matrix",
    PriorityError => "priority",
    HierarchyError => "hierarchy",
    ElicitationError => "elicitation",
    DocumentError => "document",
    std::io::Error => "io",
}

/// The hierarchy results are computed on: the model's own judgments, or the
/// session's answers when a session is given.
pub fn resolve(
    model: &Model,
    session: Option<&ElicitationSession>,
    opts: &SolverOptions,
) -> Result<Hierarchy, Failure> {
    match session {
        Some(s) => Ok(s.apply(&model.hierarchy, opts)?),
        None => Ok(model.complete_hierarchy()?.clone()),
    }
}

pub fn results(
    model: &Model,
    session: Option<&ElicitationSession>,
    opts: &SolverOptions,
) -> Result<ReportDocument, Failure> {
    let h = resolve(model, session, opts)?;
    Ok(build_report(&h, &model.hash())?)
}

/// Full-precision structured report, the form served over HTTP.
pub fn results_bytes(
    model: &Model,
    session: Option<&ElicitationSession>,
    opts: &SolverOptions,
) -> Result<Vec<u8>, Failure> {
    Ok(export_report(&results(model, session, opts)?, ExportFormat::Structured, None)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRequest {
    pub criterion: String,
    pub weight: f64,
    /// Also evaluate a sweep over `[0, 1]` with this many intervals.
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityDocument {
    pub format_version: u64,
    pub kind: String,
    pub criterion: String,
    pub weight: f64,
    /// Alternative scores before the change, declaration order.
    pub baseline: Vec<Scored>,
    pub rank_changes: Vec<RankChange>,
    /// Report for the adjusted hierarchy.
    pub report: ReportDocument,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepPoint>>,
}

pub fn sensitivity_query(
    model: &Model,
    session: Option<&ElicitationSession>,
    req: &SensitivityRequest,
    opts: &SolverOptions,
) -> Result<SensitivityDocument, Failure> {
    let h = resolve(model, session, opts)?;
    let out = sensitivity(&h, &req.criterion, req.weight)?;
    let sweep = req.steps.map(|s| sensitivity_sweep(&h, &req.criterion, s)).transpose()?;
    Ok(SensitivityDocument {
        format_version: FORMAT_VERSION,
        kind: "sensitivity".into(),
        criterion: req.criterion.clone(),
        weight: req.weight,
        baseline: out.baseline.alternatives,
        rank_changes: out.rank_changes,
        report: build_report(&out.hierarchy, &model.hash())?,
        sweep,
    })
}

pub fn to_pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}
