//! Analytic Hierarchy Process toolkit.
//!
//! Judgments on the verbal 1-9 scale go into positive reciprocal matrices;
//! power iteration turns each matrix into local priorities with a consistency
//! check; distributive synthesis aggregates local priorities down a goal ->
//! criteria -> alternatives hierarchy.
//!
//! ```
//! use ahp_core::{derive_priorities_eigen, consistency_report, PairwiseMatrix, SolverOptions};
//!
//! let m = PairwiseMatrix::from_rows(vec![
//!     vec![1.0, 3.0, 5.0],
//!     vec![1.0 / 3.0, 1.0, 7.0],
//!     vec![1.0 / 5.0, 1.0 / 7.0, 1.0],
//! ])
//! .unwrap();
//! let pv = derive_priorities_eigen(&m, &SolverOptions::default()).unwrap();
//! let report = consistency_report(&m, &pv).unwrap();
//! assert!((pv.weights()[0] - 0.602).abs() < 1e-3);
//! assert!(!report.consistent);
//! ```

pub mod banking;
pub mod consistency;
pub mod document;
pub mod elicitation;
mod error;
pub mod hierarchy;
pub mod matrix;
pub mod priority;
pub mod report;
pub mod scale;
pub mod synthesis;

pub use consistency::{consistency_report, consistency_report_with, random_index, ConsistencyReport};
pub use elicitation::{comparison_schedule, ElicitationSession, Mode};
pub use error::{DocumentError, ElicitationError, HierarchyError, MatrixError, PriorityError};
pub use hierarchy::{build_hierarchy, Hierarchy, Node, NodeKind};
pub use matrix::{validate_reciprocal, PairwiseMatrix, Violation};
pub use priority::{derive_priorities_eigen, derive_priorities_geomean, Method, PriorityVector, SolverOptions};
pub use scale::{value_to_verbal, verbal_to_value, Direction, Intensity, VerbalJudgment};
pub use synthesis::{contribution_matrix, sensitivity, synthesize, ContributionTable, GlobalPriorities};
