use std::sync::Arc;

use ahp_cli::cli::{run, Cli};
use ahp_cli::server::{router, AppState, SessionStore, MODEL_HASH_HEADER};
use ahp_core::banking::{reconstruct_local_weights, ASPECTS, BUNDLED_MODEL, PUBLISHED_TABLE};
use ahp_core::SolverOptions;
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use clap::Parser;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

fn app_with(store: SessionStore) -> Router {
    router(Arc::new(AppState::new(store, SolverOptions::default()).unwrap()))
}

fn app() -> Router {
    app_with(SessionStore::new(None))
}

async fn send(app: &Router, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri).body(body.into()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes().to_vec())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, b) = send(app, Method::GET, uri, Body::empty()).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn post(app: &Router, uri: &str, body: Value) -> (StatusCode, Value) {
    let (s, b) = send(app, Method::POST, uri, body.to_string()).await;
    (s, serde_json::from_slice(&b).unwrap())
}

async fn upload(app: &Router, doc: &str) -> String {
    let (s, b) = send(app, Method::POST, "/models", doc.to_string()).await;
    assert!(s.is_success(), "{}", String::from_utf8_lossy(&b));
    let v: Value = serde_json::from_slice(&b).unwrap();
    v["model_hash"].as_str().unwrap().to_string()
}

fn blank_model(criteria: &[&str]) -> String {
    let mut nodes = vec![json!({"id": "g", "label": "Goal", "kind": "goal", "children": criteria})];
    for c in criteria {
        nodes.push(json!({"id": c, "label": c.to_uppercase(), "kind": "criterion", "children": ["x", "y"]}));
    }
    nodes.push(json!({"id": "x", "label": "X", "kind": "alternative"}));
    nodes.push(json!({"id": "y", "label": "Y", "kind": "alternative"}));
    json!({"format_version": 1, "kind": "model", "nodes": nodes}).to_string()
}

async fn new_session(app: &Router, hash: &str, mode: &str) -> String {
    let (s, v) = post(app, "/sessions", json!({"model_hash": hash, "mode": mode})).await;
    assert_eq!(s, StatusCode::CREATED, "{v}");
    v["session_id"].as_str().unwrap().to_string()
}

#[tokio::test]
async fn banking_model_is_served_and_preloaded() {
    let app = app();
    let req = Request::builder().uri("/banking-model").body(Body::empty()).unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let hash = resp.headers()[MODEL_HASH_HEADER].to_str().unwrap().to_string();
    let body = resp.into_body().collect().await.unwrap().to_bytes();
    let doc: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(doc["kind"], "model");
    // re-uploading the served document is idempotent
    let (s, v) = post(&app, "/models", doc).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["model_hash"], hash);
    let (s, r) = get(&app, &format!("/models/{hash}/results")).await;
    assert_eq!(s, StatusCode::OK);
    let cols = &r["contribution_table"]["column_totals"];
    for (c, want) in [0.449, 0.346, 0.206].iter().enumerate() {
        assert!((cols[c].as_f64().unwrap() - want).abs() < 0.002);
    }
}

#[tokio::test]
async fn first_question_of_four_criteria() {
    let app = app();
    let hash = upload(&app, &blank_model(&["a", "b", "c", "d"])).await;
    let id = new_session(&app, &hash, "discrete").await;
    let (s, v) = get(&app, &format!("/sessions/{id}/next")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["question"]["node"], "g");
    assert_eq!(v["question"]["pair"], json!([1, 2]));
    assert_eq!(v["question"]["text"], "How important is A relative to B?");
    assert_eq!(v["answered"], 0);
    // 6 goal pairs plus one per criterion
    assert_eq!(v["total"], 10);
}

#[tokio::test]
async fn verbal_judgment_stores_ratio_and_reciprocal() {
    let app = app();
    let hash = upload(&app, &blank_model(&["a", "b", "c"])).await;
    let id = new_session(&app, &hash, "discrete").await;
    let uri = format!("/sessions/{id}/judgments");
    let (s, v) = post(&app, &uri, json!({"node": "g", "pair": [1, 2], "verbal": {"intensity": "strong", "direction": "first_over_second"}})).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["value"], 5.0);
    assert_eq!(v["reciprocal"], 0.2);
    let (_, v) = post(&app, &uri, json!({"node": "g", "pair": [1, 3], "verbal": {"intensity": "strong", "direction": "second_over_first"}})).await;
    assert_eq!(v["value"], 0.2);
    let (_, v) = post(&app, &uri, json!({"node": "g", "pair": [2, 3], "value": "1/7"})).await;
    assert!((v["value"].as_f64().unwrap() - 1.0 / 7.0).abs() < 1e-15);
    assert!(v["progress"]["consistency"]["cr"].is_number());
    // pairs may be given in either orientation
    let (_, v) = post(&app, &uri, json!({"node": "g", "pair": [2, 1], "value": 3})).await;
    assert_eq!(v["pair"], json!([2, 1]));
    let (_, doc) = get(&app, &format!("/sessions/{id}")).await;
    let answered = &doc["nodes"][0]["answered"];
    assert_eq!(answered[0], json!({"pair": [1, 2], "value": 1.0 / 3.0}));
}

#[tokio::test]
async fn invalid_judgments_are_422_with_hint() {
    let app = app();
    let hash = upload(&app, &blank_model(&["a", "b"])).await;
    let id = new_session(&app, &hash, "discrete").await;
    let uri = format!("/sessions/{id}/judgments");
    for body in [
        json!({"node": "g", "pair": [1, 2], "value": 2.5}),
        json!({"node": "g", "pair": [1, 2], "value": -1}),
        json!({"node": "g", "pair": [1, 3], "value": 3}),
        json!({"node": "g", "pair": [0, 1], "value": 3}),
        json!({"node": "g", "pair": [1, 1], "value": 3}),
        json!({"node": "g", "pair": [1, 2], "value": "x/y"}),
    ] {
        let (s, v) = post(&app, &uri, body.clone()).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{body} -> {v}");
        assert!(v["allowed"].as_str().unwrap().contains("1/9"), "{v}");
    }
    let (s, _) = post(&app, &uri, json!({"node": "nope", "pair": [1, 2], "value": 3})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = send(&app, Method::POST, &uri, "{not json").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = post(&app, &uri, json!({"node": "g", "pair": [1, 2]})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let (s, _) = post(&app, &uri, json!({"node": "g", "pair": [1, 2], "value": 3, "verbal": {"intensity": "weak", "direction": "first_over_second"}})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn continuous_sessions_accept_any_ratio() {
    let app = app();
    let hash = upload(&app, &blank_model(&["a", "b"])).await;
    let id = new_session(&app, &hash, "continuous").await;
    let (s, v) = post(&app, &format!("/sessions/{id}/judgments"), json!({"node": "g", "pair": [1, 2], "value": 2.5})).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["value"], 2.5);
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let app = app();
    for uri in ["/models/abc", "/models/abc/results", "/sessions/abc", "/sessions/abc/next", "/sessions/abc/status", "/sessions/abc/results"] {
        let (s, v) = get(&app, uri).await;
        assert_eq!(s, StatusCode::NOT_FOUND, "{uri}");
        assert_eq!(v["error"], "not_found");
    }
    let (s, _) = post(&app, "/sessions/abc/judgments", json!({"node": "g", "pair": [1, 2], "value": 3})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = post(&app, "/sessions", json!({"model_hash": "abc"})).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn malformed_models_are_rejected() {
    let app = app();
    let (s, v) = send(&app, Method::POST, "/models", "{").await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
    let v: Value = serde_json::from_slice(&v).unwrap();
    assert_eq!(v["module"], "document");
    let doc = json!({"format_version": 2, "kind": "model", "nodes": []});
    assert_eq!(post(&app, "/models", doc).await.0, StatusCode::BAD_REQUEST);
    let mut bad: Value = serde_json::from_str(BUNDLED_MODEL).unwrap();
    bad["judgments"]["management"][1][0] = json!(7);
    let (s, v) = post(&app, "/models", bad).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(v["message"].as_str().unwrap().contains("reciprocity"), "{v}");
}

#[tokio::test]
async fn incomplete_results_are_conflicts() {
    let app = app();
    let hash = upload(&app, &blank_model(&["a", "b"])).await;
    let (s, v) = get(&app, &format!("/models/{hash}/results")).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert!(v["message"].as_str().unwrap().contains("missing pairs (1, 2)"), "{v}");
    let id = new_session(&app, &hash, "discrete").await;
    let (s, _) = get(&app, &format!("/sessions/{id}/results")).await;
    assert_eq!(s, StatusCode::CONFLICT);
}

/// Answers the banking reconstruction judgments over HTTP in continuous mode.
async fn answer_banking(app: &Router) -> (String, String) {
    let (_, doc) = send(app, Method::GET, "/banking-model", Body::empty()).await;
    let mut doc: Value = serde_json::from_slice(&doc).unwrap();
    doc.as_object_mut().unwrap().remove("judgments");
    let hash = upload(app, &doc.to_string()).await;
    let id = new_session(app, &hash, "continuous").await;
    let weights = reconstruct_local_weights(&PUBLISHED_TABLE).unwrap();
    loop {
        let (_, next) = get(app, &format!("/sessions/{id}/next")).await;
        let q = &next["question"];
        if q.is_null() {
            break;
        }
        let node = q["node"].as_str().unwrap();
        let [i, j] = [q["pair"][0].as_u64().unwrap() as usize - 1, q["pair"][1].as_u64().unwrap() as usize - 1];
        let w = weights[node].weights();
        let (s, v) = post(app, &format!("/sessions/{id}/judgments"), json!({"node": node, "pair": q["pair"], "value": w[i] / w[j]})).await;
        assert_eq!(s, StatusCode::OK, "{v}");
    }
    (hash, id)
}

#[tokio::test]
async fn banking_session_results_match_the_table() {
    let app = app();
    let (_, id) = answer_banking(&app).await;
    let (s, status) = get(&app, &format!("/sessions/{id}/status")).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(status["complete"], true);
    assert_eq!(status["answered"], 6 + 4 * 3);
    assert!(status["nodes"][0]["consistency"]["cr"].as_f64().unwrap().abs() < 1e-9);
    let (s, r) = get(&app, &format!("/sessions/{id}/results")).await;
    assert_eq!(s, StatusCode::OK);
    let t = &r["contribution_table"];
    for (a, row) in ASPECTS.iter().enumerate() {
        assert_eq!(t["rows"][a], *row);
        for c in 0..3 {
            let got = t["cells"][a][c].as_f64().unwrap();
            assert!((got - PUBLISHED_TABLE.cells[a][c]).abs() <= 0.002);
        }
    }
    let order: Vec<&str> = r["ranking"].as_array().unwrap().iter().map(|s| s["id"].as_str().unwrap()).collect();
    assert_eq!(order, ["confidentiality", "integrity", "availability"]);
}

#[tokio::test]
async fn sensitivity_endpoints() {
    let app = app();
    let (_, id) = answer_banking(&app).await;
    let (s, v) = post(&app, &format!("/sessions/{id}/sensitivity"), json!({"criterion": "culture", "weight": 0.0, "steps": 10})).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["kind"], "sensitivity");
    let conf = v["report"]["alternatives"][0]["score"].as_f64().unwrap();
    assert!((conf - 0.5158228).abs() < 1e-6);
    assert_eq!(v["sweep"].as_array().unwrap().len(), 11);
    let (s, _) = post(&app, &format!("/sessions/{id}/sensitivity"), json!({"criterion": "integrity", "weight": 0.5})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = post(&app, &format!("/sessions/{id}/sensitivity"), json!({"criterion": "culture", "weight": 1.5})).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = post(&app, &format!("/sessions/{id}/sensitivity"), json!({"weight": 0.5})).await;
    assert_eq!(s, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn results_endpoint_is_byte_equal_to_cli_compute() {
    let app = app();
    let hash = upload(&app, BUNDLED_MODEL).await;
    let (s, http) = send(&app, Method::GET, &format!("/models/{hash}/results"), Body::empty()).await;
    assert_eq!(s, StatusCode::OK);
    let mut cli = Vec::new();
    run(Cli::parse_from(["ahp", "compute", "--banking"]), &mut std::io::empty(), &mut cli).unwrap();
    assert_eq!(http, cli);
    // idempotent
    let (_, again) = send(&app, Method::GET, &format!("/models/{hash}/results"), Body::empty()).await;
    assert_eq!(again, http);
}

#[tokio::test]
async fn get_model_round_trips() {
    let app = app();
    let hash = upload(&app, BUNDLED_MODEL).await;
    let (_, bytes) = send(&app, Method::GET, &format!("/models/{hash}"), Body::empty()).await;
    let again = upload(&app, std::str::from_utf8(&bytes).unwrap()).await;
    assert_eq!(again, hash);
}

#[tokio::test]
async fn prefilled_session_is_complete() {
    let app = app();
    let hash = upload(&app, BUNDLED_MODEL).await;
    let (s, v) = post(&app, "/sessions", json!({"model_hash": hash, "mode": "continuous", "prefill": true})).await;
    assert_eq!(s, StatusCode::CREATED);
    let id = v["session_id"].as_str().unwrap();
    let (_, next) = get(&app, &format!("/sessions/{id}/next")).await;
    assert!(next["question"].is_null());
    let (_, model_results) = send(&app, Method::GET, &format!("/models/{hash}/results"), Body::empty()).await;
    let (_, session_results) = send(&app, Method::GET, &format!("/sessions/{id}/results"), Body::empty()).await;
    let a: Value = serde_json::from_slice(&model_results).unwrap();
    let b: Value = serde_json::from_slice(&session_results).unwrap();
    assert_eq!(a["ranking"], b["ranking"]);
}

#[tokio::test]
async fn concurrent_writes_to_one_session_are_serialized() {
    let app = app();
    let hash = upload(&app, &blank_model(&["a", "b", "c", "d", "e", "f"])).await;
    let id = new_session(&app, &hash, "continuous").await;
    let mut tasks = Vec::new();
    for k in 0..64u32 {
        let app = app.clone();
        let uri = format!("/sessions/{id}/judgments");
        tasks.push(tokio::spawn(async move {
            let i = (k % 5) as usize + 1;
            let body = json!({"node": "g", "pair": [i, 6], "value": 1.0 + f64::from(k)});
            post(&app, &uri, body).await.0
        }));
    }
    for t in tasks {
        assert_eq!(t.await.unwrap(), StatusCode::OK);
    }
    let (_, doc) = get(&app, &format!("/sessions/{id}")).await;
    let answered = doc["nodes"][0]["answered"].as_array().unwrap();
    assert_eq!(answered.len(), 5);
}

#[tokio::test]
async fn snapshots_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let app = app_with(SessionStore::new(Some(dir.path().to_path_buf())));
    let hash = upload(&app, &blank_model(&["a", "b"])).await;
    let id = new_session(&app, &hash, "discrete").await;
    post(&app, &format!("/sessions/{id}/judgments"), json!({"node": "g", "pair": [1, 2], "value": 3})).await;
    let (_, before) = send(&app, Method::GET, &format!("/sessions/{id}"), Body::empty()).await;

    let store = SessionStore::new(Some(dir.path().to_path_buf()));
    assert_eq!(store.restore().unwrap(), 1);
    let app = app_with(store);
    let (s, after) = send(&app, Method::GET, &format!("/sessions/{id}"), Body::empty()).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(after, before);
}
