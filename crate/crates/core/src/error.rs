use thiserror::Error;

use crate::matrix::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("matrix order {0} is outside the supported range 1..=15")]
    UnsupportedOrder(usize),
    #[error("matrix declares {items} items but has {rows} rows")]
    OrderMismatch { items: usize, rows: usize },
    #[error("invalid reciprocal matrix: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("permutation is not a bijection on the matrix items")]
    BadPermutation,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorityError {
    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("solver tolerance must be positive and max_iter at least 1")]
    InvalidOptions,
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("consistency needs lambda_max; derive priorities with the eigenvector method")]
    MissingLambdaMax,
    #[error("priority vector has {weights} weights but matrix has order {order}")]
    LengthMismatch { weights: usize, order: usize },
    #[error("random index is only tabulated for orders 1..=15, got {0}")]
    UnsupportedOrder(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HierarchyError {
    #[error("duplicate node id `{0}`")]
    DuplicateId(String),
    #[error("node `{parent}` references unknown child `{child}`")]
    UnknownChild { parent: String, child: String },
    #[error("node `{parent}` lists child `{child}` more than once")]
    DuplicateChild { parent: String, child: String },
    #[error("cycle through node `{0}`")]
    Cycle(String),
    #[error("hierarchy has no goal node")]
    NoGoal,
    #[error("hierarchy has more than one goal node: `{0}` and `{1}`")]
    MultipleGoals(String, String),
    #[error("goal `{0}` cannot be the child of another node")]
    GoalHasParent(String),
    #[error("node `{0}` has more than one parent; only alternatives may be shared")]
    MultipleParents(String),
    #[error("node `{0}` is not reachable from the goal")]
    Orphan(String),
    #[error("internal node `{node}` has {count} children; at least 2 are required")]
    TooFewChildren { node: String, count: usize },
    #[error("alternative `{0}` cannot have children")]
    AlternativeWithChildren(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("node `{0}` is a leaf and carries no local priorities")]
    NotInternal(String),
    #[error("node `{node}` has {children} children but {weights} weights were supplied")]
    LengthMismatch { node: String, children: usize, weights: usize },
    #[error("matrix items for node `{node}` do not match its children")]
    ItemMismatch { node: String },
    #[error("node `{0}` has no local priorities")]
    MissingPriorities(String),
    #[error("contribution table needs a goal -> criteria -> shared alternatives hierarchy: {0}")]
    NotTableShape(String),
    #[error("`{0}` is not a criterion directly under the goal")]
    NotTopCriterion(String),
    #[error("sensitivity weight {0} is outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("sibling weights of `{0}` are all zero; cannot redistribute")]
    ZeroSiblings(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Priority(#[from] PriorityError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ElicitationError {
    #[error("session has no comparisons for node `{0}`")]
    UnknownNode(String),
    #[error("pair ({}, {}) is not a comparison of node `{node}`", .pair.0 + 1, .pair.1 + 1)]
    UnknownPair { node: String, pair: (usize, usize) },
    #[error("judgment must be a positive finite ratio, got {0}")]
    NonPositive(f64),
    #[error("{value} is not on the 1-9 scale; allowed values are 1..9 and 1/2..1/9")]
    OffScale { value: f64 },
    #[error("node `{node}` is incomplete; missing pairs {}", fmt_pairs(.missing))]
    Incomplete { node: String, missing: Vec<(usize, usize)> },
    #[error("sessions to merge must share one model and node layout")]
    MergeMismatch,
    #[error("no sessions to merge")]
    EmptyMerge,
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Priority(#[from] PriorityError),
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed document at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema violation at {location}: {message}")]
    Schema { location: String, message: String },
    #[error("unsupported format_version {found}; this build reads version {supported}")]
    UnsupportedVersion { found: u64, supported: u64 },
    #[error("expected a {expected} document, found `{found}`")]
    WrongKind { expected: &'static str, found: String },
    #[error("session belongs to model {found}, expected {expected}")]
    ModelMismatch { expected: String, found: String },
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Elicitation(#[from] ElicitationError),
    #[error("export failed: {0}")]
    Export(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub(crate) fn fmt_pairs(pairs: &[(usize, usize)]) -> String {
    pairs
        .iter()
        .map(|(i, j)| format!("({}, {})", i + 1, j + 1))
        .collect::<Vec<_>>()
        .join(", ")
}
