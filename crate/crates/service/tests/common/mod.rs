#![allow(dead_code)]

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::Arc;

use advisor::{build_state, router, AppState};
use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::Value;
use tempfile::TempDir;
use tower::ServiceExt;

pub fn kb_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../kb")
}

pub fn copy_kb(into: &Path) {
    fs::create_dir_all(into).unwrap();
    for entry in fs::read_dir(kb_dir()).unwrap() {
        let path = entry.unwrap().path();
        fs::copy(&path, into.join(path.file_name().unwrap())).unwrap();
    }
}

/// An in-process service over a private copy of the shipped KB.
pub struct TestApp {
    pub dir: TempDir,
    pub state: Arc<AppState>,
    pub router: Router,
}

impl TestApp {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        copy_kb(&dir.path().join("kb"));
        Self::open(dir)
    }

    pub fn open(dir: TempDir) -> Self {
        let state = build_state(&dir.path().join("kb"), &dir.path().join("data")).unwrap();
        let router = router(Arc::clone(&state));
        TestApp { dir, state, router }
    }

    pub fn kb_path(&self) -> PathBuf {
        self.dir.path().join("kb")
    }

    pub async fn raw(&self, method: Method, uri: &str, body: impl Into<Body>) -> (StatusCode, Value) {
        let req = Request::builder()
            .method(method)
            .uri(uri)
            .header("content-type", "application/json")
            .body(body.into())
            .unwrap();
        let resp = self.router.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = serde_json::from_slice(&bytes)
            .unwrap_or_else(|e| panic!("non-JSON body for {uri} ({status}): {e}: {:?}", String::from_utf8_lossy(&bytes)));
        (status, value)
    }

    pub async fn get(&self, uri: &str) -> (StatusCode, Value) {
        self.raw(Method::GET, uri, Body::empty()).await
    }

    pub async fn post(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.raw(Method::POST, uri, body.to_string()).await
    }

    pub async fn put(&self, uri: &str, body: Value) -> (StatusCode, Value) {
        self.raw(Method::PUT, uri, body.to_string()).await
    }

    /// Starts a session and answers prompts by query id until decided.
    pub async fn consult(&self, topic: &str, answer: impl Fn(&str) -> &'static str) -> (String, Value) {
        let (status, mut body) = self.post("/api/sessions", serde_json::json!({"topic_id": topic})).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        let id = body["session_id"].as_str().unwrap().to_string();
        while let Some(q) = body.get("prompt").map(|p| p["query_id"].as_str().unwrap().to_string()) {
            let (status, next) = self
                .post(&format!("/api/sessions/{id}/answers"), serde_json::json!({"query_id": q, "answer": answer(&q)}))
                .await;
            assert_eq!(status, StatusCode::OK, "{next}");
            body = next;
        }
        (id, body["decision"].clone())
    }
}

pub const DEMONSTRATOR_QUERIES: [&str; 12] = [
    "bachelor_degree",
    "recognized_university",
    "estimation_excellent",
    "estimation_very_good",
    "estimation_good",
    "period_4",
    "period_5",
    "period_6",
    "period_7",
    "period_8",
    "committee_recommends",
    "council_approves",
];

/// Answer function for a demonstrator case with estimation "good" and the given study period.
pub fn demonstrator_good(period: u8) -> impl Fn(&str) -> &'static str {
    move |q: &str| match q {
        "estimation_excellent" | "estimation_very_good" => "no",
        q if q.starts_with("period_") => {
            if q == format!("period_{period}") {
                "yes"
            } else {
                "no"
            }
        }
        _ => "yes",
    }
}

/// The `advisor serve` binary on an ephemeral port.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn start(kb: &Path, data: &Path) -> Server {
        let mut child = Command::new(env!("CARGO_BIN_EXE_advisor"))
            .args(["serve", "--port", "0", "--kb", kb.to_str().unwrap(), "--data", data.to_str().unwrap()])
            .env("RUST_LOG", "warn")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .unwrap();
        let mut line = String::new();
        BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
        let addr = line.trim().strip_prefix("listening on ").unwrap_or_else(|| panic!("unexpected: {line:?}"));
        Server { child, base: format!("http://{addr}") }
    }

    pub fn kill(mut self) {
        self.child.kill().unwrap();
        self.child.wait().unwrap();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

