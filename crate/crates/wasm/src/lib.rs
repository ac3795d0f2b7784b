//! Browser bindings for the demo page in `www/`.
//!
//! Each export takes and returns JSON text. The plain functions in [`api`]
//! do the work and are tested natively; the `#[wasm_bindgen]` wrappers only
//! convert errors.

use wasm_bindgen::prelude::*;

pub mod api {
    use ahp_core::banking::{reconstructed_banking_model, ASPECTS, GOAL};
    use ahp_core::document::parse_ratio;
    use ahp_core::synthesis::sensitivity_sweep;
    use ahp_core::{
        consistency_report, contribution_matrix, derive_priorities_eigen, derive_priorities_geomean,
        synthesize, value_to_verbal, Hierarchy, PairwiseMatrix, PriorityVector, SolverOptions,
    };
    use serde::{Deserialize, Serialize};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Number(f64),
        Text(String),
    }

    impl Cell {
        fn value(&self) -> Result<f64, String> {
            match self {
                Cell::Number(v) => Ok(*v),
                Cell::Text(t) => parse_ratio(t),
            }
        }
    }

    #[derive(Deserialize)]
    struct MatrixInput {
        labels: Vec<String>,
        /// `upper[k]` holds row k's entries right of the diagonal.
        upper: Vec<Vec<Cell>>,
    }

    #[derive(Serialize)]
    struct Worst {
        /// 1-based.
        pair: [usize; 2],
        entered: f64,
        implied: f64,
        suggestion: String,
    }

    #[derive(Serialize)]
    struct MatrixAnalysis {
        weights: Vec<f64>,
        geometric_mean: Vec<f64>,
        lambda_max: f64,
        ci: f64,
        ri: f64,
        cr: f64,
        consistent: bool,
        worst: Option<Worst>,
    }

    /// Priorities and consistency for a matrix given by its upper triangle.
    pub fn analyze_matrix(input: &str) -> Result<String, String> {
        let inp: MatrixInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
        let n = inp.labels.len();
        if inp.upper.len() + 1 < n || (0..n).any(|i| inp.upper.get(i).map_or(0, Vec::len) < n - i - 1) {
            return Err(format!("upper triangle does not fit {n} items"));
        }
        let mut err = None;
        let m = PairwiseMatrix::from_upper(inp.labels, |i, j| match inp.upper[i][j - i - 1].value() {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        let m = m.map_err(|e| e.to_string())?;
        let pv = derive_priorities_eigen(&m, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let r = consistency_report(&m, &pv).map_err(|e| e.to_string())?;
        let worst = r.worst_judgment.map(|w| Worst {
            pair: [w.row + 1, w.col + 1],
            entered: m.get(w.row, w.col),
            implied: w.implied,
            suggestion: value_to_verbal(w.implied).to_string(),
        });
        let out = MatrixAnalysis {
            weights: pv.weights().to_vec(),
            geometric_mean: derive_priorities_geomean(&m).weights().to_vec(),
            lambda_max: r.lambda_max,
            ci: r.ci,
            ri: r.ri,
            cr: r.cr,
            consistent: r.consistent,
            worst,
        };
        Ok(serde_json::to_string(&out).expect("serializable"))
    }

    #[derive(Deserialize, Default)]
    struct BankingInput {
        /// Aspect weights in `ASPECTS` order; the reconstructed ones when absent.
        #[serde(default)]
        aspects: Option<Vec<f64>>,
    }

    fn banking(input: &str) -> Result<Hierarchy, String> {
        let inp: BankingInput =
            if input.trim().is_empty() { BankingInput::default() } else { serde_json::from_str(input).map_err(|e| e.to_string())? };
        let h = reconstructed_banking_model();
        match inp.aspects {
            None => Ok(h),
            Some(w) => {
                let pv = PriorityVector::assigned(w).map_err(|e| e.to_string())?;
                h.attach_local_priorities(GOAL, pv).map_err(|e| e.to_string())
            }
        }
    }

    #[derive(Serialize)]
    struct BankingResults {
        labels: Vec<String>,
        aspect_weights: Vec<f64>,
        columns: Vec<String>,
        cells: Vec<Vec<f64>>,
        row_totals: Vec<f64>,
        column_totals: Vec<f64>,
        ranking: Vec<String>,
    }

    /// Contribution table of the banking model, optionally with new aspect weights.
    pub fn banking_results(input: &str) -> Result<String, String> {
        let h = banking(input)?;
        let gp = synthesize(&h).map_err(|e| e.to_string())?;
        let t = contribution_matrix(&h, &gp).map_err(|e| e.to_string())?;
        let label = |id: &String| h.node(id).map_or_else(|| id.clone(), |n| n.label.clone());
        let out = BankingResults {
            labels: t.rows.iter().map(label).collect(),
            aspect_weights: h.local_priorities(GOAL).expect("weights attached").weights().to_vec(),
            columns: t.columns.iter().map(label).collect(),
            cells: t.cells,
            row_totals: t.row_totals,
            column_totals: t.column_totals,
            ranking: gp.ranking.iter().map(|s| label(&s.id)).collect(),
        };
        Ok(serde_json::to_string(&out).expect("serializable"))
    }

    #[derive(Deserialize)]
    struct SweepInput {
        criterion: String,
        #[serde(default = "default_steps")]
        steps: usize,
        #[serde(default)]
        aspects: Option<Vec<f64>>,
    }

    fn default_steps() -> usize {
        50
    }

    #[derive(Serialize)]
    struct Curves {
        criterion: String,
        current: f64,
        alternatives: Vec<String>,
        weights: Vec<f64>,
        /// `scores[a][k]` is alternative a's score at `weights[k]`.
        scores: Vec<Vec<f64>>,
    }

    /// Alternative scores as one aspect's weight sweeps over `[0, 1]`.
    pub fn sensitivity_curves(input: &str) -> Result<String, String> {
        let inp: SweepInput = serde_json::from_str(input).map_err(|e| e.to_string())?;
        let aspects = inp.aspects.map(|a| serde_json::json!({ "aspects": a }).to_string()).unwrap_or_default();
        let h = banking(&aspects)?;
        let k = ASPECTS
            .iter()
            .position(|a| *a == inp.criterion)
            .ok_or_else(|| format!("unknown aspect `{}`", inp.criterion))?;
        let points = sensitivity_sweep(&h, &inp.criterion, inp.steps.clamp(1, 1000)).map_err(|e| e.to_string())?;
        let alts: Vec<String> =
            h.alternatives().map(|n| n.label.clone()).collect();
        let scores = (0..alts.len()).map(|a| points.iter().map(|p| p.scores[a]).collect()).collect();
        let out = Curves {
            criterion: inp.criterion,
            current: h.local_priorities(GOAL).expect("weights attached").weights()[k],
            alternatives: alts,
            weights: points.iter().map(|p| p.weight).collect(),
            scores,
        };
        Ok(serde_json::to_string(&out).expect("serializable"))
    }
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = analyzeMatrix)]
pub fn analyze_matrix(input: &str) -> Result<String, JsValue> {
    js(api::analyze_matrix(input))
}

#[wasm_bindgen(js_name = bankingResults)]
pub fn banking_results(input: &str) -> Result<String, JsValue> {
    js(api::banking_results(input))
}

#[wasm_bindgen(js_name = sensitivityCurves)]
pub fn sensitivity_curves(input: &str) -> Result<String, JsValue> {
    js(api::sensitivity_curves(input))
}
