//! Survey HTTP API exercised in-process.

use std::collections::BTreeMap;
use std::path::Path;

use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use refined_bias_cli::server::{router, ServerConfig};
use refined_bias_core::data::{Dominance, StimulusEntry, StimulusKind, Superclass};
use refined_bias_core::stats::fleiss_kappa;
use refined_bias_core::survey::{SessionConfig, SurveyStore};
use refined_bias_core::StimulusManifest;
use serde_json::{json, Value};
use tower::ServiceExt;

const TOKEN: &str = "operator-secret";

/// 10 shape-dominant and 10 texture-dominant superclasses, 5 cues each, 3 sources each.
fn manifest() -> StimulusManifest {
    let mut superclasses = Vec::new();
    let mut stimuli = Vec::new();
    for (d, dom) in [(0, Dominance::Shape), (1, Dominance::Texture)] {
        for c in 0..10 {
            let id = format!("{}{c}", if d == 0 { "shape" } else { "texture" });
            superclasses.push(Superclass { id: id.clone(), dominance: dom, members: vec![d * 10 + c] });
            for i in 0..5 {
                stimuli.push(StimulusEntry {
                    id: format!("{id}_{i}"),
                    kind: if d == 0 { StimulusKind::ShapeCue } else { StimulusKind::TextureCue },
                    shape_superclass: (d == 0).then(|| id.clone()),
                    texture_superclass: (d == 1).then(|| id.clone()),
                    image_path: format!("cues/{id}_{i}.png"),
                    source_image_path: Some(format!("sources/{id}_{}.jpg", i % 3)),
                    mask_path: None,
                });
            }
        }
    }
    StimulusManifest::new(20, superclasses, stimuli).unwrap()
}

fn app(data: &Path, stimuli: &Path) -> Router {
    router(ServerConfig {
        manifest: manifest(),
        store: SurveyStore::open(data).unwrap(),
        session_defaults: SessionConfig::default(),
        stimuli_root: stimuli.to_path_buf(),
        export_token: Some(TOKEN.into()),
        export_seed: 0,
        noise_duration_ms: 1000,
    })
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>, auth: Option<&str>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    if let Some(t) = auth {
        req = req.header(header::AUTHORIZATION, format!("Bearer {t}"));
    }
    let req = match body {
        Some(b) => req.header(header::CONTENT_TYPE, "application/json").body(Body::from(b.to_string())).unwrap(),
        None => req.body(Body::empty()).unwrap(),
    };
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn json_call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (s, b) = call(app, method, uri, body, None).await;
    (s, serde_json::from_slice(&b).unwrap_or(Value::Null))
}

fn truth(task: &Value) -> String {
    let id = task["stimulus_id"].as_str().unwrap();
    id.rsplit_once('_').unwrap().0.to_string()
}

/// Answer every remaining task with `answer(task)`; returns the number answered.
async fn finish(app: &Router, id: &str, answer: impl Fn(&Value) -> String) -> usize {
    let mut n = 0;
    loop {
        let (s, next) = json_call(app, "GET", &format!("/sessions/{id}/next"), None).await;
        assert_eq!(s, StatusCode::OK);
        if next["completed"].as_bool().unwrap() {
            assert!(next["task"].is_null());
            return n;
        }
        let task = &next["task"];
        let index = task["index"].as_u64().unwrap();
        assert_eq!(index, next["cursor"].as_u64().unwrap());
        assert_eq!(task["noise_before"].as_bool().unwrap(), next["noise_url"].is_string());
        assert_eq!(next["noise_url"].is_string(), next["noise_duration_ms"] == 1000);
        let body = json!({ "index": index, "choice": answer(task), "response_time_ms": 700 });
        let (s, ack) = json_call(app, "POST", &format!("/sessions/{id}/responses"), Some(body)).await;
        assert_eq!(s, StatusCode::OK, "{ack}");
        assert_eq!(ack["cursor"].as_u64().unwrap(), index + 1);
        n += 1;
    }
}

#[tokio::test]
async fn scripted_sessions_and_export() {
    let data = tempfile::tempdir().unwrap();
    let stim = tempfile::tempdir().unwrap();
    let app = app(data.path(), stim.path());

    let (s, created) = json_call(&app, "POST", "/sessions", Some(json!({ "seed": 11 }))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(created["n_tasks"], 100);
    let id = created["session_id"].as_str().unwrap().to_string();

    let (s, fam) = json_call(&app, "GET", &format!("/sessions/{id}/familiarization?section=shape"), None).await;
    assert_eq!(s, StatusCode::OK);
    let images = fam["images"].as_object().unwrap();
    assert_eq!(images.len(), 10);
    assert!(images.values().all(|v| v.as_array().unwrap().len() == 3));
    assert_eq!(images["shape0"][0], "/stimuli/sources/shape0_0.jpg");

    // shape section first: every task before index 50 is shape
    let (_, next) = json_call(&app, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(next["task"]["cue_type"], "shape");
    assert_eq!(next["image_url"].as_str().unwrap().split('/').nth(1), Some("stimuli"));

    let bad = json!({ "index": 3, "choice": "shape0" });
    let (s, _) = json_call(&app, "POST", &format!("/sessions/{id}/responses"), Some(bad)).await;
    assert_eq!(s, StatusCode::CONFLICT);
    let wrong = json!({ "index": 0, "choice": "texture0" });
    let (s, _) = json_call(&app, "POST", &format!("/sessions/{id}/responses"), Some(wrong)).await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    let (s, _) = json_call(&app, "GET", "/sessions/nope/next", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let answered = finish(&app, &id, truth).await;
    assert_eq!(answered, 100);
    let (s, _) = json_call(&app, "GET", &format!("/sessions/{id}/familiarization?section=texture"), None).await;
    assert_eq!(s, StatusCode::CONFLICT, "texture section already started");

    let store = SurveyStore::open(data.path()).unwrap();
    let session = store.session(&id).unwrap();
    let first_texture = session.task_sequence.iter().position(|t| t.cue_type == refined_bias_core::Cue::Texture);
    assert_eq!(first_texture, Some(50));
    drop(store);

    // a second unanimous participant, same seed so items coincide
    let (_, created) = json_call(&app, "POST", "/sessions", Some(json!({ "seed": 11 }))).await;
    let id2 = created["session_id"].as_str().unwrap().to_string();
    finish(&app, &id2, truth).await;

    let (s, _) = call(&app, "GET", "/export", None, None).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, _) = call(&app, "GET", "/export", None, Some("wrong")).await;
    assert_eq!(s, StatusCode::UNAUTHORIZED);
    let (s, body) = call(&app, "GET", "/export", None, Some(TOKEN)).await;
    assert_eq!(s, StatusCode::OK);
    let export: Value = serde_json::from_slice(&body).unwrap();
    let matrices = export.as_array().unwrap();
    assert_eq!(matrices.len(), 2);
    for m in matrices {
        // hand-built: each of 50 items rated by both participants into its true class
        let ratings = &m["ratings"];
        let cats: Vec<&str> = ratings["categories"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
        let counts: Vec<Vec<u64>> = serde_json::from_value(ratings["counts"].clone()).unwrap();
        let items: Vec<&str> = ratings["item_ids"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
        assert_eq!(items.len(), 50);
        let mut expected = Vec::new();
        for item in &items {
            let class = item.rsplit_once('_').unwrap().0;
            expected.push(cats.iter().map(|c| if *c == class { 2 } else { 0 }).collect::<Vec<u64>>());
        }
        assert_eq!(counts, expected);
        assert_eq!(fleiss_kappa(&counts, 2).unwrap().kappa, 1.0);
    }
}

#[tokio::test]
async fn responses_survive_restart() {
    let data = tempfile::tempdir().unwrap();
    let stim = tempfile::tempdir().unwrap();
    let first = app(data.path(), stim.path());
    let (_, created) =
        json_call(&first, "POST", "/sessions", Some(json!({ "seed": 2, "order": "texture_first" }))).await;
    let id = created["session_id"].as_str().unwrap().to_string();
    let mut answers = BTreeMap::new();
    for _ in 0..37 {
        let (_, next) = json_call(&first, "GET", &format!("/sessions/{id}/next"), None).await;
        let task = &next["task"];
        assert_eq!(task["cue_type"], "texture");
        let choice = task["candidate_classes"][0].as_str().unwrap().to_string();
        let index = task["index"].as_u64().unwrap();
        let (s, _) = json_call(
            &first,
            "POST",
            &format!("/sessions/{id}/responses"),
            Some(json!({ "index": index, "choice": choice })),
        )
        .await;
        assert_eq!(s, StatusCode::OK);
        answers.insert(index, choice);
    }
    drop(first);

    // "refresh": a new process over the same data directory
    let second = app(data.path(), stim.path());
    let (_, next) = json_call(&second, "GET", &format!("/sessions/{id}/next"), None).await;
    assert_eq!(next["cursor"], 37);
    let (s, _) = json_call(
        &second,
        "POST",
        &format!("/sessions/{id}/responses"),
        Some(json!({ "index": 36, "choice": answers[&36] })),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT, "duplicate of a pre-restart answer");
    let store = SurveyStore::open(data.path()).unwrap();
    let snap = store.snapshot();
    let recorded: BTreeMap<u64, String> = snap[0].1.iter().map(|r| (r.index as u64, r.chosen.clone())).collect();
    assert_eq!(recorded, answers);
}

#[tokio::test]
async fn noise_static_and_export_without_data() {
    let data = tempfile::tempdir().unwrap();
    let stim = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(stim.path().join("cues")).unwrap();
    std::fs::write(stim.path().join("cues/a.png"), b"not really a png").unwrap();
    let app = app(data.path(), stim.path());

    let (s, png) = call(&app, "GET", "/noise/42", None, None).await;
    assert_eq!(s, StatusCode::OK);
    let img = image::load_from_memory(&png).unwrap().to_luma8();
    assert_eq!(img.dimensions(), (256, 256));
    let (_, again) = call(&app, "GET", "/noise/42", None, None).await;
    assert_eq!(png, again);

    let (s, body) = call(&app, "GET", "/stimuli/cues/a.png", None, None).await;
    assert_eq!((s, body.as_slice()), (StatusCode::OK, b"not really a png".as_slice()));
    let (s, _) = call(&app, "GET", "/stimuli/../secret", None, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
    let (s, _) = call(&app, "GET", "/stimuli/cues/missing.png", None, None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);

    let (s, _) = call(&app, "GET", "/export", None, Some(TOKEN)).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}
