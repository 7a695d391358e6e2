use std::fs;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use zwm_core::registry::{ManualClock, Timestamp};
use zwm_core::{extract_and_verify, generate, CompareMode, Registry};
use zwm_server::{router, AppState};

const SAMPLE: &str = "this is a test and this is fun";

struct Fixture {
    _dir: tempfile::TempDir,
    path: std::path::PathBuf,
    state: AppState,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ca.jsonl");
    let registry = Arc::new(Registry::open(&path).unwrap());
    let clock = Arc::new(ManualClock::new(Timestamp::from_millis(1_800_000_000_000)));
    Fixture {
        _dir: dir,
        path,
        state: AppState::with_clock(registry, clock),
    }
}

async fn call(state: &AppState, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let builder = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => builder.header("content-type", "application/json").body(Body::from(b.to_string())).unwrap(),
        None => builder.body(Body::empty()).unwrap(),
    };
    let resp = router(state.clone()).oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap_or(Value::Null) };
    (status, value)
}

#[tokio::test]
async fn health() {
    let f = fixture();
    let (status, body) = call(&f.state, "GET", "/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn register_and_verify_round_trip() {
    let f = fixture();
    let (status, record) = call(&f.state, "POST", "/records", Some(json!({"author": "alice", "text": SAMPLE, "keyword": "is"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(record["watermark"]["pairs"], json!([[4, 1], [4, 3]]));
    assert_eq!(record["kw_count"], 2);
    assert_eq!(record["registered_at"], "2027-01-15T08:00:00.000Z");
    let id = record["id"].as_str().unwrap().to_owned();

    let (status, verdict) = call(&f.state, "POST", "/verify", Some(json!({"text": SAMPLE, "record_id": id}))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(verdict["tampered"], false);
    assert_eq!(verdict["war"], 1.0);
    assert_eq!(verdict["wdr"], 0.0);

    let (_, verdict) = call(&f.state, "POST", "/verify", Some(json!({"text": "this was a test and this is fun", "record_id": id}))).await;
    assert_eq!(verdict["tampered"], true);
    assert_eq!(verdict["war"], 0.25);
    assert_eq!(verdict["kw_count_observed"], 1);
}

#[tokio::test]
async fn verify_inline_watermark_matches_core() {
    let f = fixture();
    let attacked = "this is a small test and this is fun";
    let (status, verdict) = call(
        &f.state,
        "POST",
        "/verify",
        Some(json!({"text": attacked, "keyword": "is", "watermark": [[4, 1], [4, 3]], "mode": "lcs_symbol"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let expected = extract_and_verify(attacked, &generate(SAMPLE, "is").unwrap(), CompareMode::LcsSymbol).unwrap();
    assert_eq!(verdict, serde_json::to_value(expected).unwrap());
}

#[tokio::test]
async fn keyword_errors_are_422() {
    let f = fixture();
    let (status, body) = call(&f.state, "POST", "/records", Some(json!({"author": "a", "text": SAMPLE, "keyword": "zebra"}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "ExplicitKeywordAbsent");
    let (status, body) = call(&f.state, "POST", "/records", Some(json!({"author": "a", "text": ""}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "NoWords");
    let (status, _) = call(&f.state, "POST", "/verify", Some(json!({"text": SAMPLE, "keyword": "is", "watermark": []}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(!f.path.exists());
}

#[tokio::test]
async fn unknown_record_is_404() {
    let f = fixture();
    let (status, body) = call(&f.state, "POST", "/verify", Some(json!({"text": SAMPLE, "record_id": "0123456789abcdef"}))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "UnknownRecord");
}

#[tokio::test]
async fn malformed_body_is_rejected() {
    let f = fixture();
    let (status, _) = call(&f.state, "POST", "/verify", Some(json!({"text": SAMPLE}))).await;
    assert!(status.is_client_error());
}

#[tokio::test]
async fn list_filters_and_reads_do_not_write() {
    let f = fixture();
    call(&f.state, "POST", "/records", Some(json!({"author": "alice", "text": SAMPLE}))).await;
    call(&f.state, "POST", "/records", Some(json!({"author": "bob", "text": "and so and so", "keyword": "and"}))).await;
    let before = fs::read(&f.path).unwrap();

    let (status, all) = call(&f.state, "GET", "/records", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(all.as_array().unwrap().len(), 2);
    let (_, alice) = call(&f.state, "GET", "/records?author=alice", None).await;
    assert_eq!(alice.as_array().unwrap().len(), 1);
    let digest = alice[0]["text_digest"].as_str().unwrap().to_owned();
    let (_, by_digest) = call(&f.state, "GET", &format!("/records?digest={digest}"), None).await;
    assert_eq!(by_digest[0]["author"], "alice");
    let (_, none) = call(&f.state, "GET", "/records?author=alice&keyword=and", None).await;
    assert!(none.as_array().unwrap().is_empty());
    let id = alice[0]["id"].as_str().unwrap();
    call(&f.state, "POST", "/verify", Some(json!({"text": "tampered", "record_id": id}))).await;
    call(&f.state, "GET", "/health", None).await;

    assert_eq!(fs::read(&f.path).unwrap(), before);
}

#[tokio::test]
async fn concurrent_registrations_all_land() {
    let f = fixture();
    let mut handles = Vec::new();
    for i in 0..16 {
        let state = f.state.clone();
        handles.push(tokio::spawn(async move {
            call(&state, "POST", "/records", Some(json!({"author": format!("a{i}"), "text": SAMPLE}))).await.0
        }));
    }
    for h in handles {
        assert_eq!(h.await.unwrap(), StatusCode::CREATED);
    }
    let reloaded = Registry::open(&f.path).unwrap();
    assert_eq!(reloaded.len(), 16);
    let stamps: Vec<_> = reloaded.records().iter().map(|r| r.registered_at).collect();
    assert!(stamps.windows(2).all(|w| w[0] <= w[1]));
}
