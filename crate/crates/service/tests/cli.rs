mod common;

use common::{api_pipeline, app, cli_pipeline, teaser, FIXTURE};

const ANNOTATIONS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures/annotations");

#[tokio::test]
async fn scripted_pipeline_matches_the_service() {
    let dir = tempfile::tempdir().unwrap();
    let (_, from_api) = api_pipeline(&app(&dir.path().join("store"))).await;
    let from_cli = cli_pipeline(dir.path());
    assert_eq!(String::from_utf8(from_cli).unwrap(), String::from_utf8(from_api).unwrap());
}

#[test]
fn extract_prints_three_candidates() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("p");
    assert!(teaser(&project, &["ingest", FIXTURE]).status.success());
    let out = teaser(&project, &["extract"]);
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = table.lines().skip(1).filter(|l| !l.starts_with("warning")).collect();
    assert_eq!(rows.len(), 3, "{table}");
    for (i, row) in rows.iter().enumerate() {
        assert!(row.starts_with(&i.to_string()), "{row}");
    }
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("p");
    let out = teaser(&project, &["extract", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(teaser(&project, &["dance"]).status.code(), Some(1));
    assert_eq!(teaser(&project, &["--help"]).status.code(), Some(0));
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("p");
    // No project yet.
    assert_eq!(teaser(&project, &["extract"]).status.code(), Some(1));
    assert!(teaser(&project, &["ingest", FIXTURE]).status.success());
    assert_eq!(teaser(&project, &["extract", "--length", "20"]).status.code(), Some(1));
    assert_eq!(teaser(&project, &["extract", "--style", "sad"]).status.code(), Some(1));
    // Out of order.
    let out = teaser(&project, &["produce", "--music", "uplifting"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(teaser(&project, &["extract"]).status.success());
    assert_eq!(
        teaser(&project, &["assemble", "--sentences", "3,3"]).status.code(),
        Some(1)
    );
    // Ingest refuses to clobber an existing project.
    assert_eq!(teaser(&project, &["ingest", FIXTURE]).status.code(), Some(1));
}

#[test]
fn backend_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let project = dir.path().join("p");
    assert!(teaser(&project, &["ingest", FIXTURE]).status.success());
    let out = std::process::Command::new(common::BIN)
        .arg("--project")
        .arg(&project)
        .args(["extract", "--backend", "llm"])
        .env("LLM_ENDPOINT", "http://127.0.0.1:9/v1/chat/completions")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn eval_writes_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let out_md = dir.path().join("table.md");
    let out = teaser(
        dir.path(),
        &[
            "eval",
            "--single",
            &format!("{ANNOTATIONS}/single.csv"),
            "--multi",
            &format!("{ANNOTATIONS}/multi.csv"),
            "--out",
            out_md.to_str().unwrap(),
        ],
    );
    assert!(out.status.success());
    let md = std::fs::read_to_string(out_md).unwrap();
    assert_eq!(md, String::from_utf8(out.stdout).unwrap());
    assert!(md.contains("| Single-parameter | 86.1% | 88.9% | 77.1% | 87.5% |"), "{md}");
}

#[test]
fn exports_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    cli_pipeline(dir.path());
    let project = dir.path().join("project");
    let assets = dir.path().join("assets");
    assert!(teaser(&project, &["synth", "--out", dir.path().join("b.json").to_str().unwrap(), "--assets", assets.to_str().unwrap()])
        .status
        .success());
    let (srt, vtt, sh) = (dir.path().join("t.srt"), dir.path().join("t.vtt"), dir.path().join("t.sh"));
    let out = teaser(
        &project,
        &[
            "export",
            "--srt",
            srt.to_str().unwrap(),
            "--vtt",
            vtt.to_str().unwrap(),
            "--render-script",
            sh.to_str().unwrap(),
            "--asset-root",
            assets.to_str().unwrap(),
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(std::fs::read_to_string(vtt).unwrap().starts_with("WEBVTT"));
    assert!(std::fs::read_to_string(sh).unwrap().starts_with("#!/usr/bin/env bash"));
    assert!(subtp::srt::SubRip::parse(&std::fs::read_to_string(srt).unwrap()).is_ok());
    assert_eq!(teaser(&project, &["export"]).status.code(), Some(1));
}
