//! Consistency index, random index and consistency ratio.

use serde::{Deserialize, Serialize};

use crate::error::PriorityError;
use crate::matrix::PairwiseMatrix;
use crate::priority::PriorityVector;

/// Conventional acceptance threshold on the consistency ratio.
pub const DEFAULT_CR_THRESHOLD: f64 = 0.10;

/// Saaty's random index for orders 1..=15.
const RANDOM_INDEX: [f64; 15] = [
    0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49, 1.51, 1.54, 1.56, 1.57, 1.58,
];

/// Deviations closer than this are treated as a tie when picking the worst
/// judgment.
const TIE_EPS: f64 = 1e-9;

pub fn random_index(n: usize) -> Result<f64, PriorityError> {
    match n {
        1..=15 => Ok(RANDOM_INDEX[n - 1]),
        _ => Err(PriorityError::UnsupportedOrder(n)),
    }
}

mod one_based {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(i: &usize, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(*i as u64 + 1)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<usize, D::Error> {
        usize::deserialize(d)?.checked_sub(1).ok_or_else(|| D::Error::custom("indices are 1-based"))
    }
}

/// The judgment that disagrees most with the derived weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstJudgment {
    /// 0-based row, always `< col`. Documents store both indices 1-based.
    #[serde(with = "one_based")]
    pub row: usize,
    #[serde(with = "one_based")]
    pub col: usize,
    /// `|ln a_ij - ln(w_i / w_j)|`
    pub deviation: f64,
    /// The ratio the weights imply, `w_i / w_j`.
    pub implied: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub order: usize,
    pub lambda_max: f64,
    pub ci: f64,
    pub ri: f64,
    pub cr: f64,
    pub threshold: f64,
    pub consistent: bool,
    pub worst_judgment: Option<WorstJudgment>,
}

/// Consistency report at the default CR threshold of 0.10.
pub fn consistency_report(
    matrix: &PairwiseMatrix,
    pv: &PriorityVector,
) -> Result<ConsistencyReport, PriorityError> {
    consistency_report_with(matrix, pv, DEFAULT_CR_THRESHOLD)
}

pub fn consistency_report_with(
    matrix: &PairwiseMatrix,
    pv: &PriorityVector,
    threshold: f64,
) -> Result<ConsistencyReport, PriorityError> {
    let lambda_max = pv.lambda_max().ok_or(PriorityError::MissingLambdaMax)?;
    let n = matrix.order();
    if pv.len() != n {
        return Err(PriorityError::LengthMismatch { weights: pv.len(), order: n });
    }
    let ri = random_index(n)?;
    let (ci, cr) = if n <= 2 {
        (0.0, 0.0)
    } else {
        let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
        (ci, ci / ri)
    };
    Ok(ConsistencyReport {
        order: n,
        lambda_max,
        ci,
        ri,
        cr,
        threshold,
        consistent: cr <= threshold,
        worst_judgment: worst_judgment(matrix, pv.weights()),
    })
}

/// Largest log-ratio residual over `i < j`. Near-ties go to the more extreme
/// judgment (larger `|ln a_ij|`), then to the earlier pair.
pub fn worst_judgment(matrix: &PairwiseMatrix, weights: &[f64]) -> Option<WorstJudgment> {
    let n = matrix.order();
    if n <= 2 {
        return None;
    }
    let mut best: Option<WorstJudgment> = None;
    for i in 0..n {
        for j in (i + 1)..n {
            let implied = weights[i] / weights[j];
            let deviation = (matrix.get(i, j).ln() - implied.ln()).abs();
            let take = match best {
                None => true,
                Some(b) if deviation > b.deviation + TIE_EPS => true,
                Some(b) if (deviation - b.deviation).abs() <= TIE_EPS => {
                    matrix.get(i, j).ln().abs() > matrix.get(b.row, b.col).ln().abs() + TIE_EPS
                }
                _ => false,
            };
            if take {
                best = Some(WorstJudgment { row: i, col: j, deviation, implied });
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priority::{derive_priorities_eigen, derive_priorities_geomean, SolverOptions};

    fn fig1() -> PairwiseMatrix {
        PairwiseMatrix::from_rows(vec![
            vec![1.0, 3.0, 5.0],
            vec![1.0 / 3.0, 1.0, 7.0],
            vec![1.0 / 5.0, 1.0 / 7.0, 1.0],
        ])
        .unwrap()
    }

    #[test]
    fn worst_pair_is_stored_one_based() {
        let m = fig1();
        let pv = derive_priorities_eigen(&m, &SolverOptions::default()).unwrap();
        let r = consistency_report(&m, &pv).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["worst_judgment"]["row"], 2);
        assert_eq!(v["worst_judgment"]["col"], 3);
        let back: ConsistencyReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn random_index_table() {
        assert_eq!(random_index(1).unwrap(), 0.0);
        assert_eq!(random_index(2).unwrap(), 0.0);
        assert_eq!(random_index(3).unwrap(), 0.58);
        assert_eq!(random_index(10).unwrap(), 1.49);
        assert_eq!(random_index(15).unwrap(), 1.58);
        assert_eq!(random_index(0), Err(PriorityError::UnsupportedOrder(0)));
        let e = random_index(16).unwrap_err();
        assert!(e.to_string().contains("1..=15"));
    }

    #[test]
    fn consistent_matrix_has_zero_cr() {
        let m = PairwiseMatrix::from_weights(
            vec!["a".into(), "b".into(), "c".into()],
            &[0.6, 0.3, 0.1],
        )
        .unwrap();
        let pv = derive_priorities_eigen(&m, &SolverOptions::default()).unwrap();
        let r = consistency_report(&m, &pv).unwrap();
        assert!(r.cr.abs() < 1e-9);
        assert!(r.consistent);
    }

    #[test]
    fn three_by_three_example_is_inconsistent() {
        // CI = (3.2332267 - 3) / 2 = 0.1166134, CR = CI / 0.58 = 0.2010575
        let m = fig1();
        let pv = derive_priorities_eigen(&m, &SolverOptions::default()).unwrap();
        let r = consistency_report(&m, &pv).unwrap();
        assert!((r.ci - 0.1166134).abs() < 1e-6);
        assert!((r.cr - 0.2010575).abs() < 1e-6);
        assert!(!r.consistent);
        // all three residuals are 0.4783615; the tie goes to the a_23 = 7 judgment
        let wj = r.worst_judgment.unwrap();
        assert_eq!((wj.row, wj.col), (1, 2));
        assert!((wj.deviation - 0.4783615).abs() < 1e-6);
    }

    #[test]
    fn worst_judgment_by_enumeration() {
        let m = PairwiseMatrix::from_rows(vec![
            vec![1.0, 2.0, 4.0, 9.0],
            vec![0.5, 1.0, 2.0, 1.0 / 3.0],
            vec![0.25, 0.5, 1.0, 2.0],
            vec![1.0 / 9.0, 3.0, 0.5, 1.0],
        ])
        .unwrap();
        let pv = derive_priorities_eigen(&m, &SolverOptions::default()).unwrap();
        let w = pv.weights();
        let mut devs = vec![];
        for i in 0..4 {
            for j in (i + 1)..4 {
                devs.push(((m.get(i, j) / (w[i] / w[j])).ln().abs(), (i, j)));
            }
        }
        devs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let wj = worst_judgment(&m, w).unwrap();
        assert_eq!((wj.row, wj.col), devs[0].1);
    }

    #[test]
    fn two_by_two_is_always_consistent() {
        let m = PairwiseMatrix::from_upper(vec!["a".into(), "b".into()], |_, _| 9.0).unwrap();
        let pv = derive_priorities_eigen(&m, &SolverOptions::default()).unwrap();
        let r = consistency_report(&m, &pv).unwrap();
        assert_eq!((r.ci, r.cr), (0.0, 0.0));
        assert!(r.consistent);
        assert!(r.worst_judgment.is_none());
    }

    #[test]
    fn geometric_mean_priorities_lack_lambda() {
        let m = fig1();
        let pv = derive_priorities_geomean(&m);
        assert_eq!(consistency_report(&m, &pv), Err(PriorityError::MissingLambdaMax));
    }

    #[test]
    fn threshold_is_configurable() {
        let m = fig1();
        let pv = derive_priorities_eigen(&m, &SolverOptions::default()).unwrap();
        assert!(consistency_report_with(&m, &pv, 0.25).unwrap().consistent);
    }
}
