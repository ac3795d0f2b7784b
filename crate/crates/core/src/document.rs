//! Versioned JSON documents for models and elicitation sessions.
//!
//! Pairs are written 1-based, as `[i, j]` with `i < j`. Matrix cells accept a
//! number, a ratio string such as `"1/3"`, or `null` for a judgment not yet
//! made. Only the upper triangle is authoritative: the loader recomputes the
//! lower triangle, rejecting lower entries that disagree with it.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::elicitation::{comparison_schedule, ElicitationSession, JudgmentSet, Mode};
use crate::error::{fmt_pairs, DocumentError, ElicitationError};
use crate::hierarchy::{build_hierarchy, Hierarchy, Node};
use crate::priority::{PriorityVector, SolverOptions};
use crate::scale::snap_to_scale;

pub const FORMAT_VERSION: u64 = 1;

/// Relative slack allowed between a written lower-triangle entry and the
/// reciprocal of its upper entry, so rounded decimals like `0.333` load.
pub const LOWER_TRIANGLE_SLACK: f64 = 0.01;

/// A model as stored on disk: structure, judgments (possibly incomplete) and
/// directly assigned weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub name: Option<String>,
    /// Structure plus every complete matrix and assigned weight vector.
    pub hierarchy: Hierarchy,
    /// Judgment matrices with at least one missing pair.
    pub partial: Vec<JudgmentSet>,
    /// Top-level fields this version does not interpret, kept for round trips.
    pub extra: Map<String, Value>,
}

impl Model {
    pub fn new(hierarchy: Hierarchy) -> Self {
        Self { name: None, hierarchy, partial: Vec::new(), extra: Map::new() }
    }

    /// The hierarchy, provided no embedded matrix is incomplete.
    pub fn complete_hierarchy(&self) -> Result<&Hierarchy, ElicitationError> {
        match self.partial.first() {
            Some(p) => Err(ElicitationError::Incomplete { node: p.node().to_string(), missing: p.pending() }),
            None => Ok(&self.hierarchy),
        }
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(save_model(self)))
    }

    /// Every judgment recorded in the model (complete or not) as a session.
    pub fn to_session(&self, id: impl Into<String>, mode: Mode) -> Result<ElicitationSession, ElicitationError> {
        let mut s = ElicitationSession::new(id, self.hash(), &self.hierarchy, mode);
        for (node, m) in self.hierarchy.matrices() {
            for (i, j) in comparison_schedule(m.order()) {
                s.record_judgment(node, (i, j), m.get(i, j))?;
            }
        }
        for p in &self.partial {
            for (pair, v) in p.answered() {
                s.record_judgment(p.node(), pair, v)?;
            }
        }
        Ok(s)
    }
}

impl From<Hierarchy> for Model {
    fn from(h: Hierarchy) -> Self {
        Self::new(h)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    format_version: u64,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    nodes: Vec<Node>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    judgments: BTreeMap<String, Vec<Vec<Option<Ratio>>>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    weights: BTreeMap<String, Vec<f64>>,
    #[serde(flatten)]
    extra: Map<String, Value>,
}

/// A ratio written as a number or as `"a/b"`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Ratio(f64);

impl Serialize for Ratio {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Ratio {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Ratio(v)),
            Raw::Text(t) => parse_ratio(&t).map(Ratio).map_err(serde::de::Error::custom),
        }
    }
}

/// Parses `"3"`, `"0.2"` or `"1/5"`.
pub fn parse_ratio(s: &str) -> Result<f64, String> {
    let bad = || format!("`{s}` is not a ratio (expected a number or `a/b`)");
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => s.trim().parse().map_err(|_| bad())?,
    };
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("`{s}` must be a positive finite ratio"))
    }
}

fn schema(location: impl Into<String>, message: impl Into<String>) -> DocumentError {
    DocumentError::Schema { location: location.into(), message: message.into() }
}

/// Parses JSON, checks `format_version` and `kind`, then decodes `T` with
/// path-qualified schema errors.
fn decode<T: DeserializeOwned>(bytes: &[u8], kind: &'static str) -> Result<T, DocumentError> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| DocumentError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| schema("$", "document must be an object"))?;
    let version = obj
        .get("format_version")
        .ok_or_else(|| schema("format_version", "missing field"))?
        .as_u64()
        .ok_or_else(|| schema("format_version", "must be a nonnegative integer"))?;
    if version != FORMAT_VERSION {
        return Err(DocumentError::UnsupportedVersion { found: version, supported: FORMAT_VERSION });
    }
    match obj.get("kind").and_then(Value::as_str) {
        Some(k) if k == kind => {}
        Some(k) => return Err(DocumentError::WrongKind { expected: kind, found: k.to_string() }),
        None => return Err(schema("kind", "missing or not a string")),
    }
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        schema(if path.is_empty() { "$".to_string() } else { path }, e.into_inner().to_string())
    })
}

/// Loads a model document, deriving eigenvector priorities for every complete
/// judgment matrix with `opts`.
pub fn load_model(bytes: &[u8], opts: &SolverOptions) -> Result<Model, DocumentError> {
    let doc: ModelDoc = decode(bytes, "model")?;
    let mut h = build_hierarchy(doc.nodes)?;
    let mut partial = Vec::new();

    for (node_id, grid) in doc.judgments {
        let loc = format!("judgments.{node_id}");
        let node = h.node(&node_id).ok_or_else(|| schema(&loc, "unknown node"))?;
        if !node.is_internal() {
            return Err(schema(&loc, "alternatives take no judgments"));
        }
        if doc.weights.contains_key(&node_id) {
            return Err(schema(&loc, "node has both judgments and assigned weights"));
        }
        let items = node.children.clone();
        let n = items.len();
        if grid.len() != n || grid.iter().any(|r| r.len() != n) {
            return Err(schema(&loc, format!("matrix must be {n}x{n} to match the node's children")));
        }
        let mut set = JudgmentSet::new(node_id.clone(), items);
        for i in 0..n {
            if let Some(Ratio(d)) = grid[i][i] {
                if d != 1.0 {
                    return Err(schema(format!("{loc}[{}][{}]", i + 1, i + 1), "diagonal entry must be 1"));
                }
            }
        }
        for (i, j) in comparison_schedule(n) {
            let upper = grid[i][j].map(|r| r.0);
            let lower = grid[j][i].map(|r| r.0);
            let cell = format!("{loc}[{}][{}]", j + 1, i + 1);
            for v in [upper, lower].into_iter().flatten() {
                if !(v.is_finite() && v > 0.0) {
                    return Err(schema(&cell, format!("entry {v} must be a positive finite ratio")));
                }
            }
            let value = match (upper, lower) {
                (Some(u), Some(l)) => {
                    if ((u * l) - 1.0).abs() > LOWER_TRIANGLE_SLACK {
                        return Err(schema(
                            cell,
                            format!(
                                "reciprocity violation at node `{node_id}`: a_{}{} = {l} but 1/a_{}{} = {}",
                                j + 1,
                                i + 1,
                                i + 1,
                                j + 1,
                                1.0 / u
                            ),
                        ));
                    }
                    Some(u)
                }
                (Some(u), None) => Some(u),
                (None, Some(l)) => Some(1.0 / l),
                (None, None) => None,
            };
            if let Some(v) = value {
                set.set((i, j), v)?;
            }
        }
        if set.is_complete() {
            h = h.attach_matrix(&node_id, set.to_matrix()?, opts)?;
        } else {
            partial.push(set);
        }
    }

    for (node_id, w) in doc.weights {
        let loc = format!("weights.{node_id}");
        if h.node(&node_id).is_none() {
            return Err(schema(loc, "unknown node"));
        }
        let pv = PriorityVector::assigned(w).map_err(|e| schema(&loc, e.to_string()))?;
        h = h.attach_local_priorities(&node_id, pv).map_err(|e| schema(&loc, e.to_string()))?;
    }

    // a node with neither judgments nor weights has every pair pending
    for n in h.internal_nodes() {
        if h.local_priorities(&n.id).is_none() && !partial.iter().any(|p| p.node() == n.id) {
            partial.push(JudgmentSet::new(n.id.clone(), n.children.clone()));
        }
    }
    // keep partial sets in hierarchy order
    let order: Vec<String> = h.internal_nodes().iter().map(|n| n.id.clone()).collect();
    partial.sort_by_key(|p| order.iter().position(|id| id == p.node()));
    Ok(Model { name: doc.name, hierarchy: h, partial, extra: doc.extra })
}

/// Canonical bytes for a model; equal models give identical bytes.
pub fn save_model(model: &Model) -> Vec<u8> {
    let h = &model.hierarchy;
    let mut judgments = BTreeMap::new();
    for (node, m) in h.matrices() {
        let grid = m.rows().into_iter().map(|r| r.into_iter().map(|v| Some(Ratio(v))).collect()).collect();
        judgments.insert(node.to_string(), grid);
    }
    for p in &model.partial {
        let n = p.items().len();
        let grid = (0..n)
            .map(|i| {
                (0..n).map(|j| if i == j { Some(Ratio(1.0)) } else { p.get(i, j).map(Ratio) }).collect()
            })
            .collect();
        judgments.insert(p.node().to_string(), grid);
    }
    let weights = h
        .internal_nodes()
        .into_iter()
        .filter(|n| h.matrix(&n.id).is_none())
        .filter_map(|n| h.local_priorities(&n.id).map(|pv| (n.id.clone(), pv.weights().to_vec())))
        .collect();
    let doc = ModelDoc {
        format_version: FORMAT_VERSION,
        kind: "model".into(),
        name: model.name.clone(),
        nodes: h.nodes().to_vec(),
        judgments,
        weights,
        extra: model.extra.clone(),
    };
    to_pretty(&doc)
}

pub(crate) fn to_pretty<T: Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("document types always serialize");
    out.push(b'\n');
    out
}

#[derive(Serialize, Deserialize)]
struct SessionDoc {
    format_version: u64,
    kind: String,
    session_id: String,
    model_hash: String,
    mode: Mode,
    created_at: u64,
    updated_at: u64,
    nodes: Vec<SessionNodeDoc>,
}

#[derive(Serialize, Deserialize)]
struct SessionNodeDoc {
    node: String,
    items: Vec<String>,
    answered: Vec<AnsweredDoc>,
    pending: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
struct AnsweredDoc {
    pair: [usize; 2],
    value: f64,
}

pub fn save_session(s: &ElicitationSession) -> Vec<u8> {
    let nodes = s
        .judgment_sets()
        .iter()
        .map(|set| SessionNodeDoc {
            node: set.node().to_string(),
            items: set.items().to_vec(),
            answered: set.answered().map(|((i, j), value)| AnsweredDoc { pair: [i + 1, j + 1], value }).collect(),
            pending: set.pending().into_iter().map(|(i, j)| [i + 1, j + 1]).collect(),
        })
        .collect();
    to_pretty(&SessionDoc {
        format_version: FORMAT_VERSION,
        kind: "session".into(),
        session_id: s.id.clone(),
        model_hash: s.model_hash.clone(),
        mode: s.mode,
        created_at: s.created_at,
        updated_at: s.updated_at,
        nodes,
    })
}

/// Loads a session; with `expected_model`, rejects sessions recorded against
/// any other model hash.
pub fn load_session(bytes: &[u8], expected_model: Option<&str>) -> Result<ElicitationSession, DocumentError> {
    let doc: SessionDoc = decode(bytes, "session")?;
    if let Some(expected) = expected_model {
        if doc.model_hash != expected {
            return Err(DocumentError::ModelMismatch { expected: expected.to_string(), found: doc.model_hash });
        }
    }
    let mut sets = Vec::with_capacity(doc.nodes.len());
    for (k, nd) in doc.nodes.into_iter().enumerate() {
        let loc = format!("nodes[{k}]");
        let mut set = JudgmentSet::new(nd.node, nd.items);
        let n = set.items().len();
        let pair = |p: [usize; 2], at: String| -> Result<(usize, usize), DocumentError> {
            let [i, j] = p;
            if i == 0 || i >= j || j > n {
                return Err(schema(at, format!("pair [{i}, {j}] is not a comparison of {n} items")));
            }
            Ok((i - 1, j - 1))
        };
        for (a, ans) in nd.answered.iter().enumerate() {
            let at = format!("{loc}.answered[{a}]");
            let p = pair(ans.pair, at.clone())?;
            if doc.mode == Mode::Discrete && snap_to_scale(ans.value) != Some(ans.value) {
                return Err(schema(at, format!("{} is not a discrete scale value", ans.value)));
            }
            set.set(p, ans.value).map_err(|e| schema(&at, e.to_string()))?;
        }
        let pending = nd
            .pending
            .iter()
            .enumerate()
            .map(|(q, p)| pair(*p, format!("{loc}.pending[{q}]")))
            .collect::<Result<Vec<_>, _>>()?;
        if pending != set.pending() || set.answered_count() != nd.answered.len() {
            return Err(schema(
                format!("{loc}.pending"),
                format!("answered and pending do not partition the comparisons; expected pending {}", fmt_pairs(&set.pending())),
            ));
        }
        sets.push(set);
    }
    Ok(ElicitationSession::from_parts(
        doc.session_id,
        doc.model_hash,
        doc.mode,
        doc.created_at,
        doc.updated_at,
        sets,
    ))
}
