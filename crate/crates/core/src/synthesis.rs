//! Distributive synthesis of local priorities into global scores, the
//! criterion x alternative contribution table, and one-at-a-time sensitivity.

use serde::{Deserialize, Serialize};

use crate::error::HierarchyError;
use crate::hierarchy::{Hierarchy, NodeKind};
use crate::priority::PriorityVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scored {
    pub id: String,
    pub score: f64,
}

/// Weight carried along one parent -> child edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub parent: String,
    pub child: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalPriorities {
    /// Global weight of every node in declaration order; the goal is 1 and an
    /// alternative's entry is its aggregated score.
    pub per_node: Vec<Scored>,
    pub flows: Vec<Flow>,
    /// Alternative scores in declaration order.
    pub alternatives: Vec<Scored>,
    /// Alternatives by descending score, ties in declaration order.
    pub ranking: Vec<Scored>,
}

impl GlobalPriorities {
    pub fn weight(&self, id: &str) -> Option<f64> {
        self.per_node.iter().find(|s| s.id == id).map(|s| s.score)
    }

    pub fn score(&self, alternative: &str) -> Option<f64> {
        self.alternatives.iter().find(|s| s.id == alternative).map(|s| s.score)
    }

    /// 1-based rank of an alternative.
    pub fn rank_of(&self, alternative: &str) -> Option<usize> {
        self.ranking.iter().position(|s| s.id == alternative).map(|p| p + 1)
    }
}

/// Distributive synthesis: `global(child) += global(parent) * local(child | parent)`,
/// summed over every parent of shared alternatives.
pub fn synthesize(h: &Hierarchy) -> Result<GlobalPriorities, HierarchyError> {
    let mut global = vec![0.0; h.nodes().len()];
    let mut flows = Vec::new();
    global[h.position(&h.root().id).expect("root indexed")] = 1.0;
    for node in h.internal_nodes() {
        let local = h
            .local_priorities(&node.id)
            .ok_or_else(|| HierarchyError::MissingPriorities(node.id.clone()))?;
        let own = global[h.position(&node.id).expect("indexed")];
        for (child, w) in node.children.iter().zip(local.weights()) {
            let weight = own * w;
            global[h.position(child).expect("indexed")] += weight;
            flows.push(Flow { parent: node.id.clone(), child: child.clone(), weight });
        }
    }
    let per_node: Vec<Scored> = h
        .nodes()
        .iter()
        .zip(&global)
        .map(|(n, &score)| Scored { id: n.id.clone(), score })
        .collect();
    let alternatives: Vec<Scored> = h
        .nodes()
        .iter()
        .zip(&per_node)
        .filter(|(n, _)| n.kind == NodeKind::Alternative)
        .map(|(_, s)| s.clone())
        .collect();
    let mut ranking = alternatives.clone();
    // stable sort keeps declaration order on ties
    ranking.sort_by(|a, b| b.score.total_cmp(&a.score));
    Ok(GlobalPriorities { per_node, flows, alternatives, ranking })
}

/// Criterion x alternative decomposition of the alternative scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionTable {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `cells[r][c] = global(criterion r) * local(alternative c | criterion r)`
    pub cells: Vec<Vec<f64>>,
    pub row_totals: Vec<f64>,
    pub column_totals: Vec<f64>,
}

impl ContributionTable {
    pub fn cell(&self, row: &str, column: &str) -> Option<f64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        Some(self.cells[r][c])
    }

    pub fn row_total(&self, row: &str) -> Option<f64> {
        self.rows.iter().position(|x| x == row).map(|r| self.row_totals[r])
    }

    pub fn column_total(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|x| x == column).map(|c| self.column_totals[c])
    }
}

/// Builds the contribution table of a goal -> criteria -> shared alternatives
/// hierarchy. Totals are sums of the cells.
pub fn contribution_matrix(
    h: &Hierarchy,
    gp: &GlobalPriorities,
) -> Result<ContributionTable, HierarchyError> {
    let shape = |msg: String| HierarchyError::NotTableShape(msg);
    let columns: Vec<String> = h.alternatives().map(|n| n.id.clone()).collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for cid in &h.root().children {
        let crit = h.node(cid).expect("validated child");
        if crit.kind != NodeKind::Criterion {
            return Err(shape(format!("goal child `{cid}` is not a criterion")));
        }
        if crit.children.len() != columns.len()
            || crit
                .children
                .iter()
                .any(|c| h.node(c).map(|n| n.kind) != Some(NodeKind::Alternative))
        {
            return Err(shape(format!("criterion `{cid}` does not parent every alternative")));
        }
        let local = h
            .local_priorities(cid)
            .ok_or_else(|| HierarchyError::MissingPriorities(cid.clone()))?;
        let g = gp.weight(cid).ok_or_else(|| HierarchyError::UnknownNode(cid.clone()))?;
        let row = columns
            .iter()
            .map(|a| {
                let k = crit.children.iter().position(|c| c == a).expect("checked above");
                g * local.weights()[k]
            })
            .collect::<Vec<f64>>();
        rows.push(cid.clone());
        cells.push(row);
    }
    let row_totals = cells.iter().map(|r| r.iter().sum()).collect();
    let column_totals =
        (0..columns.len()).map(|c| cells.iter().map(|r| r[c]).sum()).collect();
    Ok(ContributionTable { rows, columns, cells, row_totals, column_totals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankChange {
    pub id: String,
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityOutcome {
    /// The hierarchy with the adjusted goal weights.
    pub hierarchy: Hierarchy,
    pub baseline: GlobalPriorities,
    pub priorities: GlobalPriorities,
    pub rank_changes: Vec<RankChange>,
}

/// Sets one top-level criterion's local weight to `new_weight`, rescales its
/// siblings proportionally to fill `1 - new_weight`, and re-synthesizes.
pub fn sensitivity(
    h: &Hierarchy,
    criterion: &str,
    new_weight: f64,
) -> Result<SensitivityOutcome, HierarchyError> {
    if !(0.0..=1.0).contains(&new_weight) {
        return Err(HierarchyError::WeightOutOfRange(new_weight));
    }
    let root = h.root();
    let k = root
        .children
        .iter()
        .position(|c| c == criterion)
        .filter(|_| h.node(criterion).map(|n| n.kind) == Some(NodeKind::Criterion))
        .ok_or_else(|| HierarchyError::NotTopCriterion(criterion.to_string()))?;
    let current = h
        .local_priorities(&root.id)
        .ok_or_else(|| HierarchyError::MissingPriorities(root.id.clone()))?
        .weights();
    let baseline = synthesize(h)?;

    let others: f64 = current.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, w)| w).sum();
    let weights: Vec<f64> = if new_weight == current[k] {
        current.to_vec()
    } else if others > 0.0 {
        let scale = (1.0 - new_weight) / others;
        current
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == k { new_weight } else { w * scale })
            .collect()
    } else if new_weight == 1.0 {
        current.iter().enumerate().map(|(i, _)| if i == k { 1.0 } else { 0.0 }).collect()
    } else {
        return Err(HierarchyError::ZeroSiblings(criterion.to_string()));
    };
    let pv = PriorityVector::assigned(weights)?;
    let hierarchy = h.attach_local_priorities(&root.id, pv)?;
    let priorities = synthesize(&hierarchy)?;
    let rank_changes = baseline
        .ranking
        .iter()
        .enumerate()
        .filter_map(|(before, s)| {
            let after = priorities.rank_of(&s.id)?;
            (after != before + 1).then(|| RankChange { id: s.id.clone(), before: before + 1, after })
        })
        .collect();
    Ok(SensitivityOutcome { hierarchy, baseline, priorities, rank_changes })
}

/// One point of a sensitivity sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub weight: f64,
    /// Alternative scores in declaration order.
    pub scores: Vec<f64>,
}

/// Evaluates [`sensitivity`] at `steps + 1` evenly spaced weights in `[0, 1]`.
pub fn sensitivity_sweep(
    h: &Hierarchy,
    criterion: &str,
    steps: usize,
) -> Result<Vec<SweepPoint>, HierarchyError> {
    let steps = steps.max(1);
    (0..=steps)
        .map(|s| {
            let weight = s as f64 / steps as f64;
            let out = sensitivity(h, criterion, weight)?;
            Ok(SweepPoint {
                weight,
                scores: out.priorities.alternatives.iter().map(|a| a.score).collect(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{build_hierarchy, Node};
    use NodeKind::*;

    fn three_level(goal: &[f64], locals: &[&[f64]]) -> Hierarchy {
        let crits: Vec<String> = (0..goal.len()).map(|i| format!("c{i}")).collect();
        let mut nodes = vec![Node::new("g", "g", Goal).with_children(crits.clone())];
        for c in &crits {
            nodes.push(Node::new(c, c, Criterion).with_children(["x", "y", "z"]));
        }
        for a in ["x", "y", "z"] {
            nodes.push(Node::new(a, a, Alternative));
        }
        let mut h = build_hierarchy(nodes).unwrap();
        h = h.attach_local_priorities("g", PriorityVector::assigned(goal.to_vec()).unwrap()).unwrap();
        for (c, l) in crits.iter().zip(locals) {
            h = h.attach_local_priorities(c, PriorityVector::assigned(l.to_vec()).unwrap()).unwrap();
        }
        h
    }

    #[test]
    fn uniform_model_scores_evenly() {
        let third: &[f64] = &[1.0, 1.0, 1.0];
        let h = three_level(&[1.0; 4], &[third; 4]);
        let gp = synthesize(&h).unwrap();
        for a in &gp.alternatives {
            assert!((a.score - 1.0 / 3.0).abs() < 1e-12);
        }
        // ties keep declaration order
        let ids: Vec<_> = gp.ranking.iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["x", "y", "z"]);
        let t = contribution_matrix(&h, &gp).unwrap();
        for row in &t.cells {
            for c in row {
                assert!((c - 1.0 / 12.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_level_scores_equal_goal_weights() {
        let nodes = vec![
            Node::new("g", "g", Goal).with_children(["a", "b", "c"]),
            Node::new("a", "a", Alternative),
            Node::new("b", "b", Alternative),
            Node::new("c", "c", Alternative),
        ];
        let h = build_hierarchy(nodes).unwrap();
        let h = h
            .attach_local_priorities("g", PriorityVector::assigned(vec![0.2, 0.5, 0.3]).unwrap())
            .unwrap();
        let gp = synthesize(&h).unwrap();
        let s: Vec<f64> = gp.alternatives.iter().map(|a| a.score).collect();
        assert_eq!(s, vec![0.2, 0.5, 0.3]);
        assert_eq!(gp.ranking[0].id, "b");
        assert!(matches!(contribution_matrix(&h, &gp), Err(HierarchyError::NotTableShape(_))));
    }

    #[test]
    fn missing_priorities_name_the_node() {
        let h = three_level(&[1.0, 1.0], &[&[1.0, 2.0, 3.0]]);
        assert_eq!(synthesize(&h), Err(HierarchyError::MissingPriorities("c1".into())));
    }

    #[test]
    fn table_totals_match_global_weights() {
        let h = three_level(&[0.4, 0.35, 0.25], &[&[0.7, 0.2, 0.1], &[0.1, 0.1, 0.8], &[0.3, 0.3, 0.4]]);
        let gp = synthesize(&h).unwrap();
        let t = contribution_matrix(&h, &gp).unwrap();
        for (r, id) in t.rows.iter().enumerate() {
            assert!((t.row_totals[r] - gp.weight(id).unwrap()).abs() < 1e-12);
        }
        for (c, id) in t.columns.iter().enumerate() {
            assert!((t.column_totals[c] - gp.score(id).unwrap()).abs() < 1e-12);
        }
        assert!((t.cell("c0", "x").unwrap() - 0.28).abs() < 1e-12);
    }

    #[test]
    fn sensitivity_identity_and_extremes() {
        let h = three_level(&[0.5, 0.3, 0.2], &[&[0.7, 0.2, 0.1], &[0.1, 0.1, 0.8], &[0.2, 0.6, 0.2]]);
        let same = sensitivity(&h, "c1", 0.3).unwrap();
        assert_eq!(same.priorities, same.baseline);
        assert!(same.rank_changes.is_empty());

        let all = sensitivity(&h, "c1", 1.0).unwrap();
        let s: Vec<f64> = all.priorities.alternatives.iter().map(|a| a.score).collect();
        for (a, b) in s.iter().zip([0.1, 0.1, 0.8]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(!all.rank_changes.is_empty());

        // c0 -> 0: siblings rescale from (0.3, 0.2) to (0.6, 0.4)
        let none = sensitivity(&h, "c0", 0.0).unwrap();
        let g = none.hierarchy.local_priorities("g").unwrap().weights().to_vec();
        assert!((g[1] - 0.6).abs() < 1e-12 && (g[2] - 0.4).abs() < 1e-12);
    }

    #[test]
    fn sensitivity_rejections() {
        let h = three_level(&[1.0, 0.0], &[&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]]);
        assert_eq!(sensitivity(&h, "c0", 1.5).unwrap_err(), HierarchyError::WeightOutOfRange(1.5));
        assert_eq!(sensitivity(&h, "x", 0.5).unwrap_err(), HierarchyError::NotTopCriterion("x".into()));
        assert_eq!(sensitivity(&h, "c0", 0.5).unwrap_err(), HierarchyError::ZeroSiblings("c0".into()));
        assert!(sensitivity(&h, "c0", 1.0).is_ok());
    }

    #[test]
    fn sweep_endpoints() {
        let h = three_level(&[0.5, 0.5], &[&[0.6, 0.3, 0.1], &[0.1, 0.3, 0.6]]);
        let sweep = sensitivity_sweep(&h, "c0", 4).unwrap();
        assert_eq!(sweep.len(), 5);
        assert_eq!(sweep[0].weight, 0.0);
        assert!((sweep[0].scores[2] - 0.6).abs() < 1e-12);
        assert!((sweep[4].scores[0] - 0.6).abs() < 1e-12);
    }
}
