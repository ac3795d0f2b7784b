//! Goal-rooted decision hierarchies.
//!
//! Goal and criterion nodes form a tree. Alternatives are leaves and may be
//! shared by several criteria, the usual layout where every criterion
//! evaluates the same set of options.

use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::HierarchyError;
use crate::matrix::PairwiseMatrix;
use crate::priority::{derive_priorities_eigen, PriorityVector, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Goal,
    Criterion,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<String>,
    /// Free-form descriptive notes; never part of the arithmetic.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

impl Node {
    pub fn new(id: impl Into<String>, label: impl Into<String>, kind: NodeKind) -> Self {
        Self { id: id.into(), label: label.into(), kind, children: Vec::new(), details: Vec::new() }
    }

    pub fn with_children<I, S>(mut self, children: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.children = children.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_details<I, S>(mut self, details: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.details = details.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_internal(&self) -> bool {
        self.kind != NodeKind::Alternative
    }
}

/// A validated hierarchy plus whatever local priorities have been attached.
#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    root: usize,
    local: BTreeMap<String, PriorityVector>,
    matrices: BTreeMap<String, PairwiseMatrix>,
}

/// Validates node declarations and assembles them into a [`Hierarchy`].
///
/// Children keep their declared order.
pub fn build_hierarchy(nodes: Vec<Node>) -> Result<Hierarchy, HierarchyError> {
    let mut index = HashMap::with_capacity(nodes.len());
    for (k, n) in nodes.iter().enumerate() {
        if index.insert(n.id.clone(), k).is_some() {
            return Err(HierarchyError::DuplicateId(n.id.clone()));
        }
    }
    for n in &nodes {
        let mut seen = Vec::with_capacity(n.children.len());
        for c in &n.children {
            if !index.contains_key(c) {
                return Err(HierarchyError::UnknownChild { parent: n.id.clone(), child: c.clone() });
            }
            if seen.contains(&c) {
                return Err(HierarchyError::DuplicateChild { parent: n.id.clone(), child: c.clone() });
            }
            seen.push(c);
        }
    }
    let children: Vec<Vec<usize>> =
        nodes.iter().map(|n| n.children.iter().map(|c| index[c]).collect()).collect();
    if let Some(k) = find_cycle(&children) {
        return Err(HierarchyError::Cycle(nodes[k].id.clone()));
    }

    let mut goals = nodes.iter().enumerate().filter(|(_, n)| n.kind == NodeKind::Goal);
    let root = match (goals.next(), goals.next()) {
        (None, _) => return Err(HierarchyError::NoGoal),
        (Some((k, _)), None) => k,
        (Some((_, a)), Some((_, b))) => {
            return Err(HierarchyError::MultipleGoals(a.id.clone(), b.id.clone()))
        }
    };

    let mut parents = vec![0usize; nodes.len()];
    for (k, n) in nodes.iter().enumerate() {
        if n.kind == NodeKind::Alternative && !n.children.is_empty() {
            return Err(HierarchyError::AlternativeWithChildren(n.id.clone()));
        }
        for &c in &children[k] {
            parents[c] += 1;
        }
    }
    if parents[root] > 0 {
        return Err(HierarchyError::GoalHasParent(nodes[root].id.clone()));
    }
    for (k, n) in nodes.iter().enumerate() {
        if n.kind == NodeKind::Criterion && parents[k] > 1 {
            return Err(HierarchyError::MultipleParents(n.id.clone()));
        }
    }

    let mut reached = vec![false; nodes.len()];
    let mut stack = vec![root];
    while let Some(k) = stack.pop() {
        if !std::mem::replace(&mut reached[k], true) {
            stack.extend(&children[k]);
        }
    }
    if let Some(k) = reached.iter().position(|r| !r) {
        return Err(HierarchyError::Orphan(nodes[k].id.clone()));
    }

    for n in &nodes {
        if n.is_internal() && n.children.len() < 2 {
            return Err(HierarchyError::TooFewChildren {
                node: n.id.clone(),
                count: n.children.len(),
            });
        }
    }

    Ok(Hierarchy { nodes, index, root, local: BTreeMap::new(), matrices: BTreeMap::new() })
}

/// Returns some node on a cycle, if any.
fn find_cycle(children: &[Vec<usize>]) -> Option<usize> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    let mut mark = vec![Mark::New; children.len()];
    for start in 0..children.len() {
        if mark[start] != Mark::New {
            continue;
        }
        // (node, next child index)
        let mut stack = vec![(start, 0usize)];
        mark[start] = Mark::Open;
        while let Some(&mut (k, ref mut next)) = stack.last_mut() {
            if let Some(&c) = children[k].get(*next) {
                *next += 1;
                match mark[c] {
                    Mark::Open => return Some(c),
                    Mark::New => {
                        mark[c] = Mark::Open;
                        stack.push((c, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[k] = Mark::Done;
                stack.pop();
            }
        }
    }
    None
}

impl Hierarchy {
    pub fn root(&self) -> &Node {
        &self.nodes[self.root]
    }

    /// All nodes in declaration order.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.index.get(id).map(|&k| &self.nodes[k])
    }

    pub(crate) fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<&Node, HierarchyError> {
        self.node(id).ok_or_else(|| HierarchyError::UnknownNode(id.to_string()))
    }

    /// Goal and criterion nodes in breadth-first order from the goal.
    pub fn internal_nodes(&self) -> Vec<&Node> {
        let mut out = Vec::new();
        let mut queue = VecDeque::from([self.root]);
        while let Some(k) = queue.pop_front() {
            let n = &self.nodes[k];
            if n.is_internal() {
                out.push(n);
                queue.extend(n.children.iter().map(|c| self.index[c]));
            }
        }
        out
    }

    /// Alternatives in declaration order.
    pub fn alternatives(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Alternative)
    }

    pub fn local_priorities(&self, id: &str) -> Option<&PriorityVector> {
        self.local.get(id)
    }

    pub fn matrix(&self, id: &str) -> Option<&PairwiseMatrix> {
        self.matrices.get(id)
    }

    pub fn matrices(&self) -> impl Iterator<Item = (&str, &PairwiseMatrix)> {
        self.matrices.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Sets `node`'s local weights directly. Any judgment matrix previously
    /// attached to the node is dropped, since it no longer backs the weights.
    pub fn attach_local_priorities(
        &self,
        node: &str,
        pv: PriorityVector,
    ) -> Result<Self, HierarchyError> {
        let n = self.require(node)?;
        if !n.is_internal() {
            return Err(HierarchyError::NotInternal(node.to_string()));
        }
        if pv.len() != n.children.len() {
            return Err(HierarchyError::LengthMismatch {
                node: node.to_string(),
                children: n.children.len(),
                weights: pv.len(),
            });
        }
        let mut h = self.clone();
        h.matrices.remove(node);
        h.local.insert(node.to_string(), pv);
        Ok(h)
    }

    /// Attaches a judgment matrix and the eigenvector priorities derived from
    /// it. The matrix items must be the node's children, in order.
    pub fn attach_matrix(
        &self,
        node: &str,
        matrix: PairwiseMatrix,
        opts: &SolverOptions,
    ) -> Result<Self, HierarchyError> {
        let n = self.require(node)?;
        if !n.is_internal() {
            return Err(HierarchyError::NotInternal(node.to_string()));
        }
        if matrix.item_ids() != n.children.as_slice() {
            return Err(HierarchyError::ItemMismatch { node: node.to_string() });
        }
        let pv = derive_priorities_eigen(&matrix, opts)?;
        let mut h = self.clone();
        h.local.insert(node.to_string(), pv);
        h.matrices.insert(node.to_string(), matrix);
        Ok(h)
    }

    /// Re-derives every matrix-backed priority vector with new solver settings.
    pub fn rederive(&self, opts: &SolverOptions) -> Result<Self, HierarchyError> {
        let mut h = self.clone();
        for (id, m) in &self.matrices {
            h.local.insert(id.clone(), derive_priorities_eigen(m, opts)?);
        }
        Ok(h)
    }

    /// Same structure with no local priorities or matrices.
    pub fn structure_only(&self) -> Self {
        Self { local: BTreeMap::new(), matrices: BTreeMap::new(), ..self.clone() }
    }
}
