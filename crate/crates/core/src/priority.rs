//! Local priority vectors and the two derivation routes.

use serde::{Deserialize, Serialize};

use crate::error::PriorityError;
use crate::matrix::PairwiseMatrix;

/// Tolerance within which an assigned vector is taken as already normalized.
const NORMALIZED_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Eigenvector,
    GeometricMean,
    Assigned,
}

/// Normalized local weights of one node's children.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriorityVector {
    weights: Vec<f64>,
    lambda_max: Option<f64>,
    method: Method,
}

impl PriorityVector {
    /// Directly assigned weights. Entries must be finite and nonnegative with a
    /// positive sum; the vector is rescaled to sum to 1 unless it already does.
    pub fn assigned(weights: Vec<f64>) -> Result<Self, PriorityError> {
        if weights.is_empty() {
            return Err(PriorityError::InvalidWeights("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(PriorityError::InvalidWeights(format!(
                "weights must be finite and nonnegative, got {w}"
            )));
        }
        let weights = normalize(weights)
            .ok_or_else(|| PriorityError::InvalidWeights("weights sum to zero".into()))?;
        Ok(Self { weights, lambda_max: None, method: Method::Assigned })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn lambda_max(&self) -> Option<f64> {
        self.lambda_max
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn normalize(mut w: Vec<f64>) -> Option<Vec<f64>> {
    let sum: f64 = w.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return None;
    }
    if (sum - 1.0).abs() > NORMALIZED_EPS {
        w.iter_mut().for_each(|x| *x /= sum);
    }
    Some(w)
}

/// Power-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the L1 change between iterates is at most this.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iter: 1000 }
    }
}

/// Principal right eigenvector of `matrix`, L1-normalized, by power iteration
/// from the uniform vector.
///
/// `lambda_max` is the mean of `(A w)_i / w_i` at the converged `w`.
pub fn derive_priorities_eigen(
    matrix: &PairwiseMatrix,
    opts: &SolverOptions,
) -> Result<PriorityVector, PriorityError> {
    if !(opts.tolerance > 0.0) || opts.max_iter == 0 {
        return Err(PriorityError::InvalidOptions);
    }
    let n = matrix.order();
    let mut w = vec![1.0 / n as f64; n];
    for _ in 0..opts.max_iter {
        let next = normalize(matrix.mul_vec(&w)).expect("positive matrix times positive vector");
        let delta: f64 = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
        w = next;
        if delta <= opts.tolerance {
            let aw = matrix.mul_vec(&w);
            let lambda = aw.iter().zip(&w).map(|(a, b)| a / b).sum::<f64>() / n as f64;
            return Ok(PriorityVector {
                weights: w,
                lambda_max: Some(lambda),
                method: Method::Eigenvector,
            });
        }
    }
    Err(PriorityError::NoConvergence { iterations: opts.max_iter })
}

/// Normalized row geometric means. Closed form; equals the eigenvector for
/// every consistent matrix and for every matrix of order 3 or less.
pub fn derive_priorities_geomean(matrix: &PairwiseMatrix) -> PriorityVector {
    let n = matrix.order();
    let means: Vec<f64> = (0..n)
        .map(|i| (matrix.row(i).iter().map(|a| a.ln()).sum::<f64>() / n as f64).exp())
        .collect();
    let sum: f64 = means.iter().sum();
    PriorityVector {
        weights: means.into_iter().map(|m| m / sum).collect(),
        lambda_max: None,
        method: Method::GeometricMean,
    }
}
