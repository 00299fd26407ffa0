#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use teaser_service::api::{router, AppState};
use teaser_service::config::{Backends, ServiceConfig};
use teaser_service::store::ProjectStore;
use teaser_service::workflow::BackendChoice;
use tower::ServiceExt;

pub const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/episode.json");
pub const BIN: &str = env!("CARGO_BIN_EXE_teaser");

pub fn config(store: &Path) -> ServiceConfig {
    ServiceConfig {
        store_dir: store.to_path_buf(),
        bind_addr: "127.0.0.1:0".parse().unwrap(),
        backend: BackendChoice::Mock,
        music_manifest: None,
        asset_root: store.join("assets"),
    }
}

pub fn state_with(store: &Path, backends: Backends) -> Arc<AppState> {
    let projects = ProjectStore::open(store).expect("store opens");
    Arc::new(AppState::new(projects, backends, config(store)))
}

pub fn app(store: &Path) -> Router {
    router(state_with(store, Backends::offline(teaser_core::production::default_library())))
}

pub async fn call(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Bytes) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(v) => req
            .header("content-type", "application/json")
            .body(Body::from(serde_json::to_vec(&v).unwrap())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (status, resp.into_body().collect().await.unwrap().to_bytes())
}

pub async fn call_json(app: &Router, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = call(app, method, uri, body).await;
    (status, serde_json::from_slice(&bytes).unwrap_or(Value::Null))
}

/// Uploads `bundle` as a multipart form and returns the project id.
pub async fn upload(app: &Router, bundle: &[u8]) -> String {
    let boundary = "teaserboundary";
    let mut form = format!(
        "--{boundary}\r\nContent-Disposition: form-data; name=\"bundle\"; filename=\"bundle.json\"\r\nContent-Type: application/json\r\n\r\n"
    )
    .into_bytes();
    form.extend_from_slice(bundle);
    form.extend_from_slice(format!("\r\n--{boundary}--\r\n").as_bytes());
    let req = Request::builder()
        .method(Method::POST)
        .uri("/projects")
        .header("content-type", format!("multipart/form-data; boundary={boundary}"))
        .body(Body::from(form))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    let v: Value = serde_json::from_slice(&resp.into_body().collect().await.unwrap().to_bytes()).unwrap();
    v["id"].as_str().unwrap().to_string()
}

pub fn extract_body() -> Value {
    json!({
        "target_length": 30,
        "speakers": "guest_only",
        "style": "funny",
        "keywords": ["travel", "music"],
        "backend": "mock"
    })
}

/// Drives the scripted pipeline over HTTP, asserting 200 at each step, and returns the EDL.
pub async fn api_pipeline(app: &Router) -> (String, Vec<u8>) {
    let id = upload(app, &std::fs::read(FIXTURE).unwrap()).await;
    let p = format!("/projects/{id}");
    let ok = |step: &str, status: StatusCode, body: &Value| {
        assert_eq!(status, StatusCode::OK, "{step}: {body}");
    };

    let (s, page) = call_json(app, Method::POST, &format!("{p}/extract"), Some(extract_body())).await;
    ok("extract", s, &page);
    let (s, moment) = call_json(app, Method::POST, &format!("{p}/select"), Some(json!({"candidate": 0}))).await;
    ok("select", s, &moment);
    let (s, ctx) = call_json(app, Method::GET, &format!("{p}/refine/context"), None).await;
    ok("context", s, &ctx);
    let range = &moment["sentence_range"];
    let ids: Vec<u64> = (range["first"].as_u64().unwrap()..=range["last"].as_u64().unwrap()).collect();
    let (s, sel) = call_json(
        app,
        Method::PUT,
        &format!("{p}/selection"),
        Some(json!({"ids": ids, "remove_fillers": true})),
    )
    .await;
    ok("selection", s, &sel);
    let (s, tv) = call_json(app, Method::GET, &format!("{p}/transitions"), None).await;
    ok("transitions", s, &tv);
    for jc in tv["jump_cuts"].as_array().unwrap() {
        let b = jc["boundary"].as_u64().unwrap();
        let (s, v) = call_json(app, Method::POST, &format!("{p}/transitions/{b}/zoom"), None).await;
        ok("zoom", s, &v);
    }
    let (s, m) = call_json(app, Method::POST, &format!("{p}/music"), Some(json!({"style": "uplifting"}))).await;
    ok("music", s, &m);
    let (s, f) = call_json(
        app,
        Method::POST,
        &format!("{p}/finish"),
        Some(json!({"aspect": "vertical", "caption_style": "rapid"})),
    )
    .await;
    ok("finish", s, &f);
    let (s, edl) = call(app, Method::GET, &format!("{p}/export/edl"), None).await;
    assert_eq!(s, StatusCode::OK);
    (id, edl.to_vec())
}

pub fn teaser(project: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--project")
        .arg(project)
        .args(args)
        .env_remove("LLM_ENDPOINT")
        .env_remove("MUSIC_MANIFEST")
        .output()
        .expect("teaser binary runs")
}

/// The same pipeline as [`api_pipeline`] through the command line; returns the EDL.
pub fn cli_pipeline(work: &Path) -> Vec<u8> {
    let project = work.join("project");
    let edl = work.join("edl.json");
    let steps: [Vec<&str>; 5] = [
        vec!["ingest", FIXTURE],
        vec![
            "extract", "--length", "30", "--speakers", "guest", "--style", "funny", "--keywords", "travel,music",
            "--backend", "mock",
        ],
        vec!["assemble", "--remove-fillers"],
        vec!["produce", "--zoom", "all", "--music", "uplifting", "--captions", "rapid", "--aspect", "vertical"],
        vec!["export", "--edl", edl.to_str().unwrap()],
    ];
    for args in steps {
        let out = teaser(&project, &args);
        assert!(
            out.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    std::fs::read(edl).unwrap()
}
