mod common;

use axum::http::{Method, StatusCode};
use common::{api_pipeline, app, call, call_json, extract_body, state_with, upload, FIXTURE};
use serde_json::{json, Value};
use teaser_core::production::default_library;
use teaser_service::api::router;
use teaser_service::config::Backends;

async fn project_with_selection(app: &axum::Router) -> String {
    let id = upload(app, &std::fs::read(FIXTURE).unwrap()).await;
    let p = format!("/projects/{id}");
    assert_eq!(call(app, Method::POST, &format!("{p}/extract"), Some(extract_body())).await.0, StatusCode::OK);
    let (_, m) = call_json(app, Method::POST, &format!("{p}/select"), Some(json!({"candidate": 1}))).await;
    let first = m["sentence_range"]["first"].as_u64().unwrap();
    let (s, _) = call_json(app, Method::PUT, &format!("{p}/selection"), Some(json!({"ids": [first]}))).await;
    assert_eq!(s, StatusCode::OK);
    id
}

#[tokio::test]
async fn happy_path_is_ok_at_every_step() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, edl) = api_pipeline(&app).await;
    let edl: Value = serde_json::from_slice(&edl).unwrap();
    assert!(edl["total_duration_ms"].as_u64().unwrap() > 0);
    assert_eq!(edl["fillers_removed"], true);

    let (s, project) = call_json(&app, Method::GET, &format!("/projects/{id}"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(project["step"], "done");
    for kind in ["srt", "vtt"] {
        let (s, body) = call(&app, Method::GET, &format!("/projects/{id}/export/{kind}"), None).await;
        assert_eq!(s, StatusCode::OK);
        assert!(!body.is_empty());
    }
    let (s, preview) = call_json(&app, Method::GET, &format!("/projects/{id}/preview"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(preview["total_duration_ms"].as_u64().unwrap() > 0);
}

#[tokio::test]
async fn raw_json_upload_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let bundle: Value = serde_json::from_slice(&std::fs::read(FIXTURE).unwrap()).unwrap();
    let (s, v) = call_json(&app, Method::POST, "/projects", Some(bundle)).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["step"], "extract");
}

#[tokio::test]
async fn malformed_bundle_is_422() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (s, v) = call_json(&app, Method::POST, "/projects", Some(json!({"speakers": []}))).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{v}");
}

#[tokio::test]
async fn duplicate_ids_are_422() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = project_with_selection(&app).await;
    let (s, v) = call_json(
        &app,
        Method::PUT,
        &format!("/projects/{id}/selection"),
        Some(json!({"ids": [3, 4, 3]})),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["kind"], "validation");
}

#[tokio::test]
async fn bad_bodies_are_422() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = project_with_selection(&app).await;
    let p = format!("/projects/{id}");
    for (method, uri, body) in [
        (Method::PUT, format!("{p}/selection"), json!({"ids": []})),
        (Method::PUT, format!("{p}/selection"), json!({"ids": "1,2"})),
        (Method::PUT, format!("{p}/selection"), json!({"ids": [100000]})),
        (Method::POST, format!("{p}/music"), json!({"style": "polka"})),
        (Method::POST, format!("{p}/extract"), json!({"target_length": 20})),
    ] {
        let (s, v) = call_json(&app, method, &uri, Some(body.clone())).await;
        assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY, "{uri} {body}: {v}");
    }
}

#[tokio::test]
async fn music_before_selection_is_409() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = upload(&app, &std::fs::read(FIXTURE).unwrap()).await;
    let p = format!("/projects/{id}");
    let (s, v) = call_json(&app, Method::POST, &format!("{p}/music"), Some(json!({"style": "uplifting"}))).await;
    assert_eq!(s, StatusCode::CONFLICT, "{v}");
    assert_eq!(v["kind"], "step_order");

    call(&app, Method::POST, &format!("{p}/extract"), Some(extract_body())).await;
    let (s, _) = call_json(&app, Method::POST, &format!("{p}/music"), Some(json!({"style": "uplifting"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    for uri in [format!("{p}/export/edl"), format!("{p}/transitions"), format!("{p}/refine/context")] {
        assert_eq!(call(&app, Method::GET, &uri, None).await.0, StatusCode::CONFLICT, "{uri}");
    }
}

#[tokio::test]
async fn unknown_project_is_404() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    for (method, uri) in [
        (Method::GET, "/projects/p99"),
        (Method::POST, "/projects/p99/extract"),
        (Method::GET, "/projects/p99/export/edl"),
        (Method::GET, "/projects/..%2Fetc/transitions"),
    ] {
        assert_eq!(call(&app, method, uri, None).await.0, StatusCode::NOT_FOUND, "{uri}");
    }
}

#[tokio::test]
async fn unavailable_model_is_502() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = upload(&app, &std::fs::read(FIXTURE).unwrap()).await;
    let mut body = extract_body();
    body["backend"] = json!("llm");
    let (s, v) = call_json(&app, Method::POST, &format!("/projects/{id}/extract"), Some(body)).await;
    assert_eq!(s, StatusCode::BAD_GATEWAY, "{v}");
    assert_eq!(v["kind"], "backend");
    assert_eq!(v["degraded"], false);
    let (_, project) = call_json(&app, Method::GET, &format!("/projects/{id}"), None).await;
    assert_eq!(project["step"], "extract");
}

#[tokio::test]
async fn show_more_pages_are_disjoint() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = upload(&app, &std::fs::read(FIXTURE).unwrap()).await;
    let p = format!("/projects/{id}");
    let (_, first) = call_json(&app, Method::POST, &format!("{p}/extract"), Some(extract_body())).await;
    let (s, second) = call_json(&app, Method::POST, &format!("{p}/extract?page=1"), None).await;
    assert_eq!(s, StatusCode::OK, "{second}");
    let ranges = |v: &Value| -> Vec<(u64, u64)> {
        v["candidates"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| {
                let r = &c["moment"]["sentence_range"];
                (r["first"].as_u64().unwrap(), r["last"].as_u64().unwrap())
            })
            .collect()
    };
    let all: Vec<(u64, u64)> = ranges(&first).into_iter().chain(ranges(&second)).collect();
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            assert!(a.1 < b.0 || b.1 < a.0, "{a:?} overlaps {b:?}");
        }
    }
    let (s, _) = call_json(&app, Method::POST, &format!("{p}/select"), Some(json!({"candidate": 4}))).await;
    assert_eq!(s, StatusCode::OK);
}

#[tokio::test]
async fn each_mutation_is_audited_once() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, _) = api_pipeline(&app).await;
    let p = format!("/projects/{id}");
    // A rejected request must not leave a trace.
    call(&app, Method::PUT, &format!("{p}/selection"), Some(json!({"ids": [1, 1]}))).await;
    let (_, project) = call_json(&app, Method::GET, &p, None).await;
    let (_, tv) = call_json(&app, Method::GET, &format!("{p}/transitions"), None).await;
    let zooms = tv["jump_cuts"].as_array().unwrap().len();

    let audit = project["audit"].as_array().unwrap();
    let actions: Vec<&str> = audit.iter().map(|e| e["action"].as_str().unwrap()).collect();
    let mut expected = vec!["create", "extract", "select", "selection"];
    expected.extend(std::iter::repeat_n("add_transition", zooms));
    expected.extend(["music", "finish"]);
    assert_eq!(actions, expected);
    let seqs: Vec<u64> = audit.iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, (1..=audit.len() as u64).collect::<Vec<_>>());
}

#[tokio::test]
async fn going_back_clears_downstream() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let (id, _) = api_pipeline(&app).await;
    let p = format!("/projects/{id}");
    let (s, _) = call_json(&app, Method::POST, &format!("{p}/select"), Some(json!({"candidate": 2}))).await;
    assert_eq!(s, StatusCode::OK);
    let (_, project) = call_json(&app, Method::GET, &p, None).await;
    assert_eq!(project["step"], "refine");
    assert!(project["cutlist"].is_null());
    assert!(project["music"].is_null());
    assert!(project["finish"].is_null());
    assert_eq!(call(&app, Method::GET, &format!("{p}/export/edl"), None).await.0, StatusCode::CONFLICT);
}

#[tokio::test]
async fn transitions_add_and_remove() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = project_with_selection(&app).await;
    let p = format!("/projects/{id}");
    let (_, tv) = call_json(&app, Method::GET, &format!("{p}/transitions"), None).await;
    let Some(jc) = tv["jump_cuts"].as_array().unwrap().first().cloned() else {
        return;
    };
    let b = jc["boundary"].as_u64().unwrap();
    let (s, v) = call_json(&app, Method::POST, &format!("{p}/transitions/{b}/zoom"), Some(json!({"scale": 1.2}))).await;
    assert_eq!(s, StatusCode::OK, "{v}");
    assert_eq!(v["effects"].as_array().unwrap().len(), 1);
    let (s, v) = call_json(&app, Method::DELETE, &format!("{p}/transitions/{b}/zoom"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["effects"].as_array().unwrap().is_empty());
    let (s, _) = call_json(&app, Method::POST, &format!("{p}/transitions/{b}/sparkle"), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = call_json(&app, Method::POST, &format!("{p}/transitions/9999/zoom"), None).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
}

#[tokio::test]
async fn state_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let (id, before) = api_pipeline(&app(dir.path())).await;
    let (_, srt_before) = call(&app(dir.path()), Method::GET, &format!("/projects/{id}/export/srt"), None).await;

    let restarted = router(state_with(dir.path(), Backends::offline(default_library())));
    let (s, after) = call(&restarted, Method::GET, &format!("/projects/{id}/export/edl"), None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(before, after.to_vec());
    let (_, srt_after) = call(&restarted, Method::GET, &format!("/projects/{id}/export/srt"), None).await;
    assert_eq!(srt_before, srt_after);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_writers_are_serialized() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path());
    let id = project_with_selection(&app).await;
    let p = format!("/projects/{id}");
    let (_, tv) = call_json(&app, Method::GET, &format!("{p}/transitions"), None).await;
    let Some(b) = tv["jump_cuts"].as_array().unwrap().first().map(|j| j["boundary"].as_u64().unwrap()) else {
        return;
    };
    let (_, before) = call_json(&app, Method::GET, &p, None).await;
    let base = before["audit"].as_array().unwrap().len();

    let n = 16;
    let tasks: Vec<_> = (0..n)
        .map(|i| {
            let app = app.clone();
            let uri = format!("{p}/transitions/{b}/zoom");
            tokio::spawn(async move {
                let method = if i % 2 == 0 { Method::POST } else { Method::DELETE };
                call(&app, method, &uri, None).await.0
            })
        })
        .collect();
    let mut ok = 0;
    for t in tasks {
        if t.await.unwrap() == StatusCode::OK {
            ok += 1;
        }
    }
    let (_, after) = call_json(&app, Method::GET, &p, None).await;
    let audit = after["audit"].as_array().unwrap();
    // No update lost: every accepted request left exactly one entry.
    assert_eq!(audit.len(), base + ok);
    let seqs: Vec<u64> = audit.iter().map(|e| e["seq"].as_u64().unwrap()).collect();
    assert_eq!(seqs, (1..=audit.len() as u64).collect::<Vec<_>>());
}
