//! Positive reciprocal judgment matrices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::MatrixError;

/// Largest supported matrix order (the random index table stops here).
pub const MAX_ORDER: usize = 15;

/// Relative tolerance on `a_ij * a_ji = 1`.
pub const RECIPROCITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Row length differs from the declared order.
    Shape,
    /// Diagonal entry is not 1.
    Diagonal,
    NonPositive,
    NonFinite,
    /// `a_ji != 1 / a_ij`.
    Reciprocity,
}

/// One failed matrix invariant, located by 0-based `(row, col)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub row: usize,
    pub col: usize,
    pub kind: ViolationKind,
    pub value: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.kind {
            ViolationKind::Shape => "row length does not match matrix order",
            ViolationKind::Diagonal => "diagonal entry must be 1",
            ViolationKind::NonPositive => "entry must be strictly positive",
            ViolationKind::NonFinite => "entry must be finite",
            ViolationKind::Reciprocity => "entry is not the reciprocal of its mirror",
        };
        // 1-based for humans
        write!(f, "({}, {}): {what} (got {})", self.row + 1, self.col + 1, self.value)
    }
}

/// Checks the three reciprocal-matrix invariants on a raw square grid.
///
/// Returns every violation found; an empty list means the grid is a valid
/// positive reciprocal matrix. Reciprocity is reported once per pair, at the
/// lower-triangle cell `(j, i)` with `j > i`.
pub fn validate_reciprocal(rows: &[Vec<f64>]) -> Vec<Violation> {
    let n = rows.len();
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            out.push(Violation {
                row: i,
                col: row.len(),
                kind: ViolationKind::Shape,
                value: row.len() as f64,
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for i in 0..n {
        for j in 0..n {
            let v = rows[i][j];
            let kind = if !v.is_finite() {
                Some(ViolationKind::NonFinite)
            } else if v <= 0.0 {
                Some(ViolationKind::NonPositive)
            } else if i == j && v != 1.0 {
                Some(ViolationKind::Diagonal)
            } else {
                None
            };
            if let Some(kind) = kind {
                out.push(Violation { row: i, col: j, kind, value: v });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (rows[i][j], rows[j][i]);
            let usable = a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0;
            if usable && ((a * b) - 1.0).abs() > RECIPROCITY_TOLERANCE {
                out.push(Violation {
                    row: j,
                    col: i,
                    kind: ViolationKind::Reciprocity,
                    value: b,
                });
            }
        }
    }
    out
}

/// A validated `n x n` positive reciprocal matrix over a fixed list of items.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    item_ids: Vec<String>,
    entries: Vec<f64>,
}

impl PairwiseMatrix {
    /// Builds a matrix from full rows, rejecting any grid that fails
    /// [`validate_reciprocal`].
    pub fn new(item_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let n = item_ids.len();
        check_order(n)?;
        if rows.len() != n {
            return Err(MatrixError::OrderMismatch { items: n, rows: rows.len() });
        }
        let violations = validate_reciprocal(&rows);
        if !violations.is_empty() {
            return Err(MatrixError::Invalid(violations));
        }
        Ok(Self { item_ids, entries: rows.into_iter().flatten().collect() })
    }

    /// Builds a matrix from strict upper-triangle judgments; the diagonal is 1
    /// and the lower triangle is the exact reciprocal.
    ///
    /// `upper(i, j)` is called for every `i < j`.
    pub fn from_upper<F>(item_ids: Vec<String>, mut upper: F) -> Result<Self, MatrixError>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let n = item_ids.len();
        check_order(n)?;
        let mut entries = vec![1.0; n * n];
        let mut bad = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = upper(i, j);
                if !v.is_finite() || v <= 0.0 {
                    let kind = if v.is_finite() {
                        ViolationKind::NonPositive
                    } else {
                        ViolationKind::NonFinite
                    };
                    bad.push(Violation { row: i, col: j, kind, value: v });
                    continue;
                }
                entries[i * n + j] = v;
                entries[j * n + i] = 1.0 / v;
            }
        }
        if !bad.is_empty() {
            return Err(MatrixError::Invalid(bad));
        }
        Ok(Self { item_ids, entries })
    }

    /// The perfectly consistent matrix `a_ij = w_i / w_j`.
    pub fn from_weights(item_ids: Vec<String>, weights: &[f64]) -> Result<Self, MatrixError> {
        if weights.len() != item_ids.len() {
            return Err(MatrixError::OrderMismatch { items: item_ids.len(), rows: weights.len() });
        }
        Self::from_upper(item_ids, |i, j| weights[i] / weights[j])
    }

    /// Matrix with generated ids `"1".."n"`, mainly for examples and tests.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self, MatrixError> {
        let ids = (1..=rows.len()).map(|i| i.to_string()).collect();
        Self::new(ids, rows)
    }

    pub fn order(&self) -> usize {
        self.item_ids.len()
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.order();
        &self.entries[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.order()).map(|i| self.row(i).to_vec()).collect()
    }

    /// `A * x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.order())
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Reorders rows, columns and ids so that new position `k` holds old item
    /// `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self, MatrixError> {
        let n = self.order();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(MatrixError::BadPermutation);
        }
        let ids = perm.iter().map(|&p| self.item_ids[p].clone()).collect();
        let mut entries = Vec::with_capacity(n * n);
        for &pi in perm {
            for &pj in perm {
                entries.push(self.get(pi, pj));
            }
        }
        Ok(Self { item_ids: ids, entries })
    }
}

fn check_order(n: usize) -> Result<(), MatrixError> {
    if n == 0 || n > MAX_ORDER {
        return Err(MatrixError::UnsupportedOrder(n));
    }
    Ok(())
}
