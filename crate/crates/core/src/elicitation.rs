//! Pairwise judgment capture: comparison scheduling, session state and live
//! consistency feedback.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::consistency::{consistency_report, ConsistencyReport};
use crate::error::ElicitationError;
use crate::hierarchy::Hierarchy;
use crate::matrix::PairwiseMatrix;
use crate::priority::{derive_priorities_eigen, SolverOptions};
use crate::scale::{scale_values, snap_to_scale, verbal_to_value, VerbalJudgment};

/// Every pair `(i, j)` with `i < j < n`, lexicographic. There are `n(n-1)/2`.
pub fn comparison_schedule(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
}

pub fn question_text(first: &str, second: &str) -> String {
    format!("How important is {first} relative to {second}?")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Only 1..9 and reciprocals.
    #[default]
    Discrete,
    /// Any positive ratio.
    Continuous,
}

/// Judgments gathered so far for one node's children. Values are stored for
/// the upper triangle only; the reciprocal is implied.
#[derive(Debug, Clone, PartialEq)]
pub struct JudgmentSet {
    node: String,
    items: Vec<String>,
    answered: BTreeMap<(usize, usize), f64>,
}

impl JudgmentSet {
    pub fn new(node: impl Into<String>, items: Vec<String>) -> Self {
        Self { node: node.into(), items, answered: BTreeMap::new() }
    }

    pub fn node(&self) -> &str {
        &self.node
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn total(&self) -> usize {
        let n = self.items.len();
        n * n.saturating_sub(1) / 2
    }

    pub fn answered(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.answered.iter().map(|(&p, &v)| (p, v))
    }

    pub fn answered_count(&self) -> usize {
        self.answered.len()
    }

    pub fn pending(&self) -> Vec<(usize, usize)> {
        comparison_schedule(self.items.len())
            .into_iter()
            .filter(|p| !self.answered.contains_key(p))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.answered.len() == self.total()
    }

    /// `a_ij` for any ordered pair that has been answered.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        if i < j {
            self.answered.get(&(i, j)).copied()
        } else {
            self.answered.get(&(j, i)).map(|v| 1.0 / v)
        }
    }

    /// Stores `a_ij = value`; a lower-triangle pair is stored as its reciprocal.
    pub fn set(&mut self, (i, j): (usize, usize), value: f64) -> Result<(), ElicitationError> {
        let n = self.items.len();
        if i == j || i >= n || j >= n {
            return Err(ElicitationError::UnknownPair { node: self.node.clone(), pair: (i, j) });
        }
        if !value.is_finite() || value <= 0.0 {
            return Err(ElicitationError::NonPositive(value));
        }
        let (key, v) = if i < j { ((i, j), value) } else { ((j, i), 1.0 / value) };
        self.answered.insert(key, v);
        Ok(())
    }

    pub fn to_matrix(&self) -> Result<PairwiseMatrix, ElicitationError> {
        if !self.is_complete() {
            return Err(ElicitationError::Incomplete { node: self.node.clone(), missing: self.pending() });
        }
        Ok(PairwiseMatrix::from_upper(self.items.clone(), |i, j| self.answered[&(i, j)])?)
    }
}

/// One comparison awaiting an answer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub node: String,
    pub pair: (usize, usize),
    pub first: String,
    pub second: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeProgress {
    pub node: String,
    pub answered: usize,
    pub total: usize,
    /// Present once every pair of the node is answered.
    pub consistency: Option<ConsistencyReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStatus {
    pub nodes: Vec<NodeProgress>,
    pub answered: usize,
    pub total: usize,
    pub percent: f64,
    pub complete: bool,
}

/// Mutable record of one decision maker's answers. Single writer.
#[derive(Debug, Clone, PartialEq)]
pub struct ElicitationSession {
    pub id: String,
    pub model_hash: String,
    pub mode: Mode,
    pub created_at: u64,
    pub updated_at: u64,
    nodes: Vec<JudgmentSet>,
}

impl ElicitationSession {
    /// Fresh session with every comparison of every internal node pending,
    /// nodes in breadth-first order from the goal.
    pub fn new(id: impl Into<String>, model_hash: impl Into<String>, h: &Hierarchy, mode: Mode) -> Self {
        let nodes = h
            .internal_nodes()
            .into_iter()
            .map(|n| JudgmentSet::new(n.id.clone(), n.children.clone()))
            .collect();
        let now = unix_now();
        Self { id: id.into(), model_hash: model_hash.into(), mode, created_at: now, updated_at: now, nodes }
    }

    /// Reassembles a session from stored parts (used by document loaders).
    pub fn from_parts(
        id: String,
        model_hash: String,
        mode: Mode,
        created_at: u64,
        updated_at: u64,
        nodes: Vec<JudgmentSet>,
    ) -> Self {
        Self { id, model_hash, mode, created_at, updated_at, nodes }
    }

    pub fn judgment_sets(&self) -> &[JudgmentSet] {
        &self.nodes
    }

    pub fn judgment_set(&self, node: &str) -> Result<&JudgmentSet, ElicitationError> {
        self.nodes
            .iter()
            .find(|s| s.node == node)
            .ok_or_else(|| ElicitationError::UnknownNode(node.to_string()))
    }

    /// Records `a_ij = value` for `node`. Re-answering overwrites. Discrete
    /// sessions accept only scale values and snap them to the exact point.
    pub fn record_judgment(
        &mut self,
        node: &str,
        pair: (usize, usize),
        value: f64,
    ) -> Result<(), ElicitationError> {
        let value = match self.mode {
            Mode::Continuous => value,
            Mode::Discrete if !value.is_finite() || value <= 0.0 => {
                return Err(ElicitationError::NonPositive(value))
            }
            Mode::Discrete => snap_to_scale(value).ok_or(ElicitationError::OffScale { value })?,
        };
        let set = self
            .nodes
            .iter_mut()
            .find(|s| s.node == node)
            .ok_or_else(|| ElicitationError::UnknownNode(node.to_string()))?;
        set.set(pair, value)?;
        self.updated_at = unix_now().max(self.updated_at);
        Ok(())
    }

    pub fn record_verbal(
        &mut self,
        node: &str,
        pair: (usize, usize),
        judgment: VerbalJudgment,
    ) -> Result<(), ElicitationError> {
        self.record_judgment(node, pair, verbal_to_value(judgment))
    }

    /// Pending comparisons in asking order.
    pub fn pending(&self) -> Vec<(String, (usize, usize))> {
        self.nodes
            .iter()
            .flat_map(|s| s.pending().into_iter().map(move |p| (s.node.clone(), p)))
            .collect()
    }

    pub fn question(&self, h: &Hierarchy, node: &str, pair: (usize, usize)) -> Result<Question, ElicitationError> {
        let set = self.judgment_set(node)?;
        let (i, j) = pair;
        let (Some(a), Some(b)) = (set.items.get(i), set.items.get(j)) else {
            return Err(ElicitationError::UnknownPair { node: node.to_string(), pair });
        };
        let label = |id: &String| h.node(id).map(|n| n.label.clone()).unwrap_or_else(|| id.clone());
        Ok(Question {
            node: node.to_string(),
            pair,
            first: a.clone(),
            second: b.clone(),
            text: question_text(&label(a), &label(b)),
        })
    }

    pub fn next_question(&self, h: &Hierarchy) -> Option<Question> {
        let (node, pair) = self.pending().into_iter().next()?;
        self.question(h, &node, pair).ok()
    }

    pub fn matrix(&self, node: &str) -> Result<PairwiseMatrix, ElicitationError> {
        self.judgment_set(node)?.to_matrix()
    }

    pub fn is_complete(&self) -> bool {
        self.nodes.iter().all(JudgmentSet::is_complete)
    }

    /// Progress per node, with a consistency report for each completed node.
    pub fn status(&self, opts: &SolverOptions) -> Result<SessionStatus, ElicitationError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for s in &self.nodes {
            let consistency = if s.is_complete() {
                let m = s.to_matrix()?;
                let pv = derive_priorities_eigen(&m, opts)?;
                Some(consistency_report(&m, &pv)?)
            } else {
                None
            };
            nodes.push(NodeProgress {
                node: s.node.clone(),
                answered: s.answered_count(),
                total: s.total(),
                consistency,
            });
        }
        let answered: usize = nodes.iter().map(|n| n.answered).sum();
        let total: usize = nodes.iter().map(|n| n.total).sum();
        let percent = if total == 0 { 100.0 } else { 100.0 * answered as f64 / total as f64 };
        Ok(SessionStatus { nodes, answered, total, percent, complete: answered == total })
    }

    /// Attaches every node's judgment matrix to `h`. Fails on the first
    /// incomplete node, naming its missing pairs.
    pub fn apply(&self, h: &Hierarchy, opts: &SolverOptions) -> Result<Hierarchy, ElicitationError> {
        let mut out = h.clone();
        for s in &self.nodes {
            out = out.attach_matrix(&s.node, s.to_matrix()?, opts)?;
        }
        Ok(out)
    }
}

/// Combines several respondents' sessions by taking, per judgment, the
/// geometric mean of every answer given for it. The result is continuous.
pub fn merge_sessions(
    id: impl Into<String>,
    sessions: &[ElicitationSession],
) -> Result<ElicitationSession, ElicitationError> {
    let first = sessions.first().ok_or(ElicitationError::EmptyMerge)?;
    let same_layout = sessions.iter().all(|s| {
        s.model_hash == first.model_hash
            && s.nodes.len() == first.nodes.len()
            && s.nodes.iter().zip(&first.nodes).all(|(a, b)| a.node == b.node && a.items == b.items)
    });
    if !same_layout {
        return Err(ElicitationError::MergeMismatch);
    }
    let mut nodes = Vec::with_capacity(first.nodes.len());
    for (k, base) in first.nodes.iter().enumerate() {
        let mut merged = JudgmentSet::new(base.node.clone(), base.items.clone());
        for pair in comparison_schedule(base.items.len()) {
            let logs: Vec<f64> =
                sessions.iter().filter_map(|s| s.nodes[k].answered.get(&pair)).map(|v| v.ln()).collect();
            if !logs.is_empty() {
                let mean = logs.iter().sum::<f64>() / logs.len() as f64;
                merged.answered.insert(pair, mean.exp());
            }
        }
        nodes.push(merged);
    }
    let now = unix_now();
    Ok(ElicitationSession {
        id: id.into(),
        model_hash: first.model_hash.clone(),
        mode: Mode::Continuous,
        created_at: now,
        updated_at: now,
        nodes,
    })
}

/// Seconds since the Unix epoch; 0 where no clock is available.
pub fn unix_now() -> u64 {
    #[cfg(not(target_arch = "wasm32"))]
    {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
    #[cfg(target_arch = "wasm32")]
    {
        0
    }
}

/// Allowed discrete values, for error hints.
pub fn allowed_values_hint() -> String {
    let fmt = |v: f64| if v >= 1.0 { format!("{v}") } else { format!("1/{}", (1.0 / v).round()) };
    scale_values().into_iter().map(fmt).collect::<Vec<_>>().join(", ")
}
