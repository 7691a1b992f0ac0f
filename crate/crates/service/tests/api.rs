use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use taskdraft_core::bundled;
use taskdraft_core::pipeline::{derived_example, example_model};
use taskdraft_core::script::{AuthorScript, Command};
use taskdraft_service::{router, router_shared, Session};

async fn send(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Vec<u8>) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header(header::CONTENT_TYPE, "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, bytes)
}

async fn send_json(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let (status, bytes) = send(app, method, uri, body).await;
    let value =
        serde_json::from_slice(&bytes).unwrap_or_else(|_| panic!("not json: {}", String::from_utf8_lossy(&bytes)));
    (status, value)
}

fn example_app() -> Router {
    router(Session::new(example_model()))
}

/// Turns a script command into the request the UI would send for it.
fn request_for(command: &Command, revision: u64) -> (&'static str, Value) {
    match command {
        Command::Action { sentence } => ("/action", json!({"revision": revision, "sentence": sentence})),
        Command::Plan { id, mode, label } => (
            "/plan",
            json!({"revision": revision, "id": id, "mode": mode.as_str(), "name": label}),
        ),
        Command::Link { kind, from, to, order } => (
            "/link",
            json!({"revision": revision, "kind": kind.as_str(), "from": from, "to": to, "order": order}),
        ),
    }
}

#[tokio::test]
async fn expansions_of_information_include_document() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/cnl/expansions",
        Some(json!({"pattern": "reader save [information]", "slot": 0})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let replacements: Vec<&str> = body["expansions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["replacement"].as_str().unwrap())
        .collect();
    assert!(replacements.contains(&"[document]"), "{replacements:?}");
}

#[tokio::test]
async fn default_completion_is_ground() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/cnl/default",
        Some(json!({"pattern": "reader save [information]"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let sentence = body["sentence"].as_str().unwrap();
    assert!(
        sentence.starts_with("reader save ") && !sentence.contains('['),
        "{sentence}"
    );
}

#[tokio::test]
async fn expansions_reject_non_slot_index() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/cnl/expansions",
        Some(json!({"pattern": "reader save [information]", "slot": 3})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "not-a-slot");
}

#[tokio::test]
async fn duplicate_goal_is_422() {
    let app = example_app();
    let (_, model) = send_json(&app, "GET", "/model", None).await;
    let rev = model["revision"].as_u64().unwrap();
    let (status, body) = send_json(
        &app,
        "POST",
        "/link",
        Some(json!({"revision": rev, "kind": "goal", "from": "cancel-plan", "to": "open-save-as"})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    assert_eq!(body["error"], "duplicate-goal");
    // nothing changed
    let (_, after) = send_json(&app, "GET", "/model", None).await;
    assert_eq!(after["revision"].as_u64().unwrap(), rev);
}

#[tokio::test]
async fn draft_english_matches_golden() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/draft",
        Some(json!({"goal": "save-a-document", "languages": ["en"]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let drafts = body["drafts"].as_array().unwrap();
    assert_eq!(drafts.len(), 1);
    assert_eq!(drafts[0]["language"], "en");
    assert_eq!(drafts[0]["text"].as_str().unwrap(), bundled::GOLDEN_EN);
    let spans = drafts[0]["provenance"].as_array().unwrap();
    // title, two alternatives, one result, three plain steps, one note
    assert_eq!(spans.len(), 8);
    let text: Vec<char> = bundled::GOLDEN_EN.chars().collect();
    let save_button = spans
        .iter()
        .find(|s| s["node"] == "choose-save-button" && s["act"] == "step")
        .expect("span for the save button step");
    let (a, b) = (
        save_button["start"].as_u64().unwrap() as usize,
        save_button["end"].as_u64().unwrap() as usize,
    );
    assert_eq!(text[a..b].iter().collect::<String>(), "Choose the Save button.");
}

#[tokio::test]
async fn draft_both_languages() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/draft",
        Some(json!({"goal": "save-a-document", "languages": ["en", "fr"]})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["drafts"][1]["text"].as_str().unwrap(), bundled::GOLDEN_FR);
}

#[tokio::test]
async fn draft_same_revision_is_byte_identical() {
    let app = example_app();
    let req = json!({"goal": "save-a-document", "languages": ["en", "fr"]});
    let (_, a) = send(&app, "POST", "/draft", Some(req.clone())).await;
    // a read in between must not matter
    send(&app, "GET", "/graph", None).await;
    let (_, b) = send(&app, "POST", "/draft", Some(req)).await;
    assert_eq!(a, b);
}

#[tokio::test]
async fn draft_errors() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/draft",
        Some(json!({"goal": "nope", "languages": ["en"]})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "unknown-node");

    let (status, body) = send_json(
        &app,
        "POST",
        "/draft",
        Some(json!({"goal": "click-save-icon", "languages": ["en"]})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "no-plan-for-goal");

    let (status, body) = send_json(
        &app,
        "POST",
        "/draft",
        Some(json!({"goal": "save-a-document", "languages": ["de"]})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "unsupported-language");
}

#[tokio::test]
async fn stale_revision_is_409() {
    let app = router(Session::new(derived_example()));
    let (status, body) = send_json(
        &app,
        "POST",
        "/action",
        Some(json!({"revision": 0, "sentence": "reader open folder"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["revision"], 1);
    assert_eq!(body["id"], "open-folder");
    assert_eq!(body["delta"], "action reader open folder");

    let (status, body) = send_json(&app, "POST", "/plan", Some(json!({"revision": 0, "mode": "sequence"}))).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "stale-revision");
    assert_eq!(body["revision"], 1);
    let (_, model) = send_json(&app, "GET", "/model", None).await;
    assert_eq!(model["plans"].as_array().unwrap().len(), 0);
}

#[tokio::test]
async fn schema_errors_are_400() {
    let app = example_app();
    for body in [
        json!({"pattern": "reader save [information]"}),
        json!({"pattern": 3, "slot": 0}),
        json!({"pattern": "reader save [information]", "slot": 0, "extra": true}),
    ] {
        let (status, resp) = send_json(&app, "POST", "/cnl/expansions", Some(body)).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{resp}");
        assert_eq!(resp["error"], "schema");
    }
    let (status, _) = send_json(&app, "POST", "/plan", Some(json!({"revision": 0, "mode": "parallel"}))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = send_json(
        &app,
        "POST",
        "/link",
        Some(json!({"revision": 0, "kind": "causes", "from": "a", "to": "b"})),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    // not JSON at all
    let req = Request::builder()
        .method("POST")
        .uri("/action")
        .header(header::CONTENT_TYPE, "application/json")
        .body(Body::from("{revision"))
        .unwrap();
    assert_eq!(
        app.clone().oneshot(req).await.unwrap().status(),
        StatusCode::BAD_REQUEST
    );
}

#[tokio::test]
async fn unknown_ids_are_404() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/link",
        Some(json!({"revision": 0, "kind": "sub-action", "from": "cancel-plan", "to": "no-such-action", "order": 2})),
    )
    .await;
    assert_eq!(status, StatusCode::NOT_FOUND, "{body}");
    assert_eq!(body["error"], "unknown-node");
}

#[tokio::test]
async fn sentence_outside_grammar_is_422() {
    let app = example_app();
    let (status, body) = send_json(
        &app,
        "POST",
        "/action",
        Some(json!({"revision": 0, "sentence": "reader save the planet"})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "not-in-grammar");
}

#[tokio::test]
async fn duplicate_action_does_not_bump_revision() {
    let app = router(Session::new(derived_example()));
    let req = json!({"revision": 0, "sentence": "reader open folder"});
    let (_, first) = send_json(&app, "POST", "/action", Some(req)).await;
    assert_eq!(first["revision"], 1);
    let (status, second) = send_json(
        &app,
        "POST",
        "/action",
        Some(json!({"revision": 1, "sentence": "reader  open folder"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(second["revision"], 1);
    assert_eq!(second["duplicate"], true);
    assert_eq!(second["id"], "open-folder");
    assert!(second["delta"].is_null());
    let (_, journal) = send(&app, "GET", "/journal", None).await;
    assert_eq!(String::from_utf8(journal).unwrap().matches("action ").count(), 1);
}

/// Drives the whole bundled author script through the API, one request per
/// command, and checks revision accounting and journal replay.
#[tokio::test]
async fn api_session_replays_to_the_same_model() {
    let session = Session::new(derived_example());
    let state = std::sync::Arc::new(tokio::sync::RwLock::new(session));
    let app = router_shared(state.clone());
    let script = AuthorScript::parse(bundled::SAVE_SCRIPT).unwrap();

    for (revision, (_, command)) in (0u64..).zip(&script.commands) {
        let (uri, body) = request_for(command, revision);
        let (status, resp) = send_json(&app, "POST", uri, Some(body)).await;
        assert_eq!(status, StatusCode::OK, "{command}: {resp}");
        assert_eq!(resp["revision"].as_u64().unwrap(), revision + 1, "{command}");
        assert_eq!(resp["delta"].as_str().unwrap(), command.to_string());
        if let Command::Plan { id, .. } = command {
            assert_eq!(resp["id"].as_str().unwrap(), id.as_str());
        }
    }

    let (_, model) = send_json(&app, "GET", "/model", None).await;
    let expected = example_model();
    assert_eq!(model["kb"].as_str().unwrap(), expected.to_text());

    let (_, validate) = send_json(&app, "GET", "/validate", None).await;
    assert_eq!(validate["valid"], true);

    let (_, journal) = send(&app, "GET", "/journal", None).await;
    let journal = AuthorScript::parse(std::str::from_utf8(&journal).unwrap()).unwrap();
    let replayed = journal.apply(&derived_example(), &bundled::grammar()).unwrap().0;
    assert_eq!(replayed.to_text(), expected.to_text());
    let session = state.read().await;
    assert_eq!(
        taskdraft_service::replay(session.initial(), &session)
            .unwrap()
            .to_text(),
        expected.to_text()
    );
}

#[tokio::test]
async fn unnamed_plans_get_fresh_ids() {
    let app = router(Session::new(derived_example()));
    let (_, a) = send_json(&app, "POST", "/plan", Some(json!({"revision": 0, "mode": "sequence"}))).await;
    let (_, b) = send_json(&app, "POST", "/plan", Some(json!({"revision": 1, "mode": "choice"}))).await;
    assert_ne!(a["id"], b["id"]);
    assert_eq!(b["revision"], 2);
    let (status, c) = send_json(
        &app,
        "POST",
        "/plan",
        Some(json!({"revision": 2, "id": a["id"], "mode": "choice"})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{c}");
    assert_eq!(c["error"], "id-clash");
}

#[tokio::test]
async fn graph_json_and_dot() {
    let app = example_app();
    let (status, graph) = send_json(&app, "GET", "/graph", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(graph["nodes"].as_array().unwrap().len(), 13);
    let (status, dot) = send(&app, "GET", "/graph?format=dot", None).await;
    assert_eq!(status, StatusCode::OK);
    let dot = String::from_utf8(dot).unwrap();
    assert!(dot.starts_with("digraph taskmodel {"));
    assert_eq!(dot, taskdraft_core::Graph::of(&example_model()).to_dot());
    let (status, _) = send(&app, "GET", "/graph?format=svg", None).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn validate_reports_violations() {
    let mut model = example_model();
    // break the choice plan down to one alternative
    let text = model
        .to_text()
        .replace("edge sub-action open-save-as-plan click-save-icon order=2\n", "");
    assert_ne!(text, model.to_text(), "fixture edge line must exist");
    model = taskdraft_core::TaskModel::from_text(&text).unwrap();
    let app = router(Session::new(model));
    let (_, body) = send_json(&app, "GET", "/validate", None).await;
    assert_eq!(body["valid"], false);
    let codes: Vec<&str> = body["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["code"].as_str().unwrap())
        .collect();
    assert_eq!(codes, ["needs-≥2-alternatives"]);
    let (status, body) = send_json(
        &app,
        "POST",
        "/draft",
        Some(json!({"goal": "save-a-document", "languages": ["en"]})),
    )
    .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "invalid-model");
}

#[tokio::test]
async fn save_writes_model_file() {
    let dir = std::env::temp_dir().join(format!("taskdraft-save-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("model.kb");
    let app = router(Session::new(example_model()).with_save_path(&path));
    let (status, body) = send_json(&app, "POST", "/save", Some(json!({}))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(std::fs::read_to_string(&path).unwrap(), example_model().to_text());
    std::fs::remove_dir_all(&dir).unwrap();

    let app = example_app();
    let (status, body) = send_json(&app, "POST", "/save", Some(json!({}))).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(body["error"], "no-save-path");
}

#[tokio::test]
async fn cors_is_enabled() {
    let app = example_app();
    let req = Request::builder()
        .method("OPTIONS")
        .uri("/draft")
        .header(header::ORIGIN, "http://localhost:5173")
        .header(header::ACCESS_CONTROL_REQUEST_METHOD, "POST")
        .body(Body::empty())
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN));
    let req = Request::builder()
        .uri("/model")
        .header(header::ORIGIN, "http://localhost:5173")
        .body(Body::empty())
        .unwrap();
    let resp = app.oneshot(req).await.unwrap();
    assert!(resp.headers().contains_key(header::ACCESS_CONTROL_ALLOW_ORIGIN));
}

#[tokio::test]
async fn concurrent_mutations_serialize() {
    // Twenty clients race to add a plan at revision 0: exactly one wins.
    let app = router(Session::new(derived_example()));
    let mut handles = Vec::new();
    for _ in 0..20 {
        let app = app.clone();
        handles.push(tokio::spawn(async move {
            send(&app, "POST", "/plan", Some(json!({"revision": 0, "mode": "sequence"})))
                .await
                .0
        }));
    }
    let mut ok = 0;
    let mut conflict = 0;
    for h in handles {
        match h.await.unwrap() {
            StatusCode::OK => ok += 1,
            StatusCode::CONFLICT => conflict += 1,
            other => panic!("unexpected {other}"),
        }
    }
    assert_eq!((ok, conflict), (1, 19));
}
