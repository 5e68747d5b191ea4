use std::collections::VecDeque;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use super::cache::{CacheEntry, ResponseCache};
use super::{parse_node_list, parse_single_node, DEFAULT_MODEL_NAME, DEFAULT_TEMPERATURE};
use crate::graph::{CentralityMethod, CentralityParams, Graph, NodeLabel};
use crate::render::{rasterize, sha256_hex, ImageArtifact, RenderError};

/// Environment variable holding the chat endpoint credential.
pub const API_KEY_ENV: &str = "MLLM_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    Mllm,
    Scripted,
    Heuristic,
    Oracle,
}

#[derive(Debug, Error)]
pub enum SelectorError {
    #[error("environment variable {0} is not set")]
    MissingCredential(String),
    #[error("authentication rejected (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("rate limited after {attempts} attempts")]
    RateLimited { attempts: u32 },
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("malformed API reply: {0}")]
    Malformed(String),
    #[error("scripted replies exhausted after {served}")]
    ScriptExhausted { served: usize },
    #[error("{backend:?} backend cannot answer {task} queries")]
    Unsupported { backend: BackendKind, task: &'static str },
    #[error("invalid reply fixture: {0}")]
    Fixture(String),
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error("cache: {0}")]
    Cache(#[from] std::io::Error),
}

/// What the caller is asking for. Non-visual backends answer from this and
/// the graph rather than from the prompt text.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskHint {
    Seeds { k: usize },
    RemoveOne,
    Question { truth_reply: String },
}

impl TaskHint {
    fn name(&self) -> &'static str {
        match self {
            TaskHint::Seeds { .. } => "seed selection",
            TaskHint::RemoveOne => "node removal",
            TaskHint::Question { .. } => "benchmark question",
        }
    }
}

pub struct QueryContext<'a> {
    pub graph: &'a Graph,
    pub task: TaskHint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectorRequest {
    #[serde(skip)]
    pub image: Option<ImageArtifact>,
    pub prompt: String,
    pub model_name: String,
    pub temperature: f64,
    /// Distinguishes repeated samples of the same prompt.
    pub attempt: u32,
    pub request_id: String,
}

impl SelectorRequest {
    pub fn new(
        image: Option<ImageArtifact>,
        prompt: impl Into<String>,
        model_name: impl Into<String>,
        temperature: f64,
        attempt: u32,
    ) -> Self {
        let prompt = prompt.into();
        let model_name = model_name.into();
        let image_hash = image.as_ref().map_or("-", |i| i.content_hash.as_str());
        let key = format!("{image_hash}\0{prompt}\0{model_name}\0{temperature:?}\0{attempt}");
        Self {
            request_id: sha256_hex(key.as_bytes()),
            image,
            prompt,
            model_name,
            temperature,
            attempt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectorResponse {
    pub request_id: String,
    pub raw_text: String,
    /// Node labels, present only when the reply fits the task's output grammar.
    pub parsed: Option<Vec<NodeLabel>>,
    pub backend: BackendKind,
    pub cached: bool,
    pub latency_ms: u64,
}

pub trait Backend: Send + Sync {
    fn kind(&self) -> BackendKind;

    fn model_name(&self) -> String;

    /// Whether requests must carry a rendered image.
    fn needs_image(&self) -> bool {
        false
    }

    fn complete(&self, req: &SelectorRequest, ctx: &QueryContext<'_>) -> Result<String, SelectorError>;
}

fn parse_for(task: &TaskHint, raw: &str) -> Option<Vec<NodeLabel>> {
    match task {
        TaskHint::Seeds { .. } => parse_node_list(raw).ok(),
        TaskHint::RemoveOne => parse_single_node(raw).ok().map(|v| vec![v]),
        TaskHint::Question { .. } => None,
    }
}

/// Answers `req`, consulting and filling `cache` when given. A reply is
/// cached only after the backend returned it successfully.
pub fn query(
    backend: &dyn Backend,
    req: &SelectorRequest,
    ctx: &QueryContext<'_>,
    cache: Option<&ResponseCache>,
) -> Result<SelectorResponse, SelectorError> {
    if let Some(cache) = cache {
        if let Some(hit) = cache.get(&req.request_id)? {
            return Ok(SelectorResponse {
                request_id: req.request_id.clone(),
                parsed: parse_for(&ctx.task, &hit.raw_text),
                raw_text: hit.raw_text,
                backend: hit.backend,
                cached: true,
                latency_ms: 0,
            });
        }
    }
    let started = Instant::now();
    let raw_text = backend.complete(req, ctx)?;
    let latency_ms = started.elapsed().as_millis() as u64;
    if let Some(cache) = cache {
        cache.put(&CacheEntry {
            request_id: req.request_id.clone(),
            model_name: req.model_name.clone(),
            temperature: req.temperature,
            attempt: req.attempt,
            image_hash: req.image.as_ref().map(|i| i.content_hash.clone()),
            prompt: req.prompt.clone(),
            backend: backend.kind(),
            raw_text: raw_text.clone(),
        })?;
    }
    Ok(SelectorResponse {
        request_id: req.request_id.clone(),
        parsed: parse_for(&ctx.task, &raw_text),
        raw_text,
        backend: backend.kind(),
        cached: false,
        latency_ms,
    })
}

/// Replies served in queue order from a fixture.
pub struct ScriptedBackend {
    replies: Mutex<VecDeque<String>>,
    all: Vec<String>,
    cycle: bool,
    served: Mutex<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Fixture {
    List(Vec<String>),
    Object {
        replies: Vec<String>,
        #[serde(default)]
        cycle: bool,
    },
}

impl ScriptedBackend {
    pub fn new(replies: Vec<String>, cycle: bool) -> Self {
        Self {
            replies: Mutex::new(replies.iter().cloned().collect()),
            all: replies,
            cycle,
            served: Mutex::new(0),
        }
    }

    /// Accepts either a JSON array of replies or `{"replies": [...], "cycle": bool}`.
    pub fn from_json(text: &str) -> Result<Self, SelectorError> {
        let fixture: Fixture =
            serde_json::from_str(text).map_err(|e| SelectorError::Fixture(e.to_string()))?;
        Ok(match fixture {
            Fixture::List(replies) => Self::new(replies, false),
            Fixture::Object { replies, cycle } => Self::new(replies, cycle),
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, SelectorError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| SelectorError::Fixture(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_json(&text)
    }

    pub fn remaining(&self) -> usize {
        self.replies.lock().expect("scripted queue poisoned").len()
    }
}

impl Backend for ScriptedBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Scripted
    }

    fn model_name(&self) -> String {
        "scripted".into()
    }

    fn complete(&self, _req: &SelectorRequest, _ctx: &QueryContext<'_>) -> Result<String, SelectorError> {
        let mut queue = self.replies.lock().expect("scripted queue poisoned");
        let mut served = self.served.lock().expect("scripted counter poisoned");
        if queue.is_empty() && self.cycle && !self.all.is_empty() {
            queue.extend(self.all.iter().cloned());
        }
        let reply = queue
            .pop_front()
            .ok_or(SelectorError::ScriptExhausted { served: *served })?;
        *served += 1;
        Ok(reply)
    }
}

/// Answers from a centrality ranking of the graph in the query context.
/// On a residual graph this is the adaptive variant (HD, HCI, ...).
pub struct HeuristicBackend {
    pub method: CentralityMethod,
    pub params: CentralityParams,
}

impl HeuristicBackend {
    pub fn new(method: CentralityMethod) -> Self {
        Self {
            method,
            params: CentralityParams::default(),
        }
    }
}

impl Backend for HeuristicBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Heuristic
    }

    fn model_name(&self) -> String {
        format!("heuristic-{}", self.method.name())
    }

    fn complete(&self, _req: &SelectorRequest, ctx: &QueryContext<'_>) -> Result<String, SelectorError> {
        let g = ctx.graph;
        let pick = |k| super::heuristic_select_with(g, self.method, k, &self.params);
        match ctx.task {
            TaskHint::Seeds { k } => {
                let labels: Vec<String> = pick(k).into_iter().map(|v| g.label(v).to_string()).collect();
                Ok(format!("[{}]", labels.join(", ")))
            }
            TaskHint::RemoveOne => pick(1)
                .first()
                .map(|&v| g.label(v).to_string())
                .ok_or(SelectorError::Unsupported {
                    backend: BackendKind::Heuristic,
                    task: "empty-graph",
                }),
            TaskHint::Question { .. } => Err(SelectorError::Unsupported {
                backend: BackendKind::Heuristic,
                task: ctx.task.name(),
            }),
        }
    }
}

/// Replies with the known answer; closes the loop in benchmark tests.
pub struct OracleBackend;

impl Backend for OracleBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Oracle
    }

    fn model_name(&self) -> String {
        "oracle".into()
    }

    fn complete(&self, _req: &SelectorRequest, ctx: &QueryContext<'_>) -> Result<String, SelectorError> {
        match &ctx.task {
            TaskHint::Question { truth_reply } => Ok(truth_reply.clone()),
            other => Err(SelectorError::Unsupported {
                backend: BackendKind::Oracle,
                task: other.name(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MllmConfig {
    /// Full URL of an OpenAI-compatible `chat/completions` endpoint.
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub max_in_flight: usize,
    pub timeout_secs: u64,
}

impl Default for MllmConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model_name: DEFAULT_MODEL_NAME.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_retries: 3,
            backoff_ms: 1000,
            max_in_flight: 4,
            timeout_secs: 120,
        }
    }
}

/// Counting semaphore bounding concurrent requests.
struct Gate {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Gate);

impl Gate {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("gate poisoned");
        while *free == 0 {
            free = self.cv.wait(free).expect("gate poisoned");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("gate poisoned") += 1;
        self.0.cv.notify_one();
    }
}

pub struct MllmBackend {
    config: MllmConfig,
    api_key: String,
    client: reqwest::blocking::Client,
    gate: Gate,
}

enum Outcome {
    Done(String),
    Fatal(SelectorError),
    Retry(SelectorError, Option<Duration>),
}

impl MllmBackend {
    /// Reads the credential from `MLLM_API_KEY`.
    pub fn from_env(config: MllmConfig) -> Result<Self, SelectorError> {
        let key = std::env::var(API_KEY_ENV)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| SelectorError::MissingCredential(API_KEY_ENV.into()))?;
        Self::with_api_key(config, key)
    }

    pub fn with_api_key(config: MllmConfig, api_key: impl Into<String>) -> Result<Self, SelectorError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| SelectorError::Transport(e.to_string()))?;
        Ok(Self {
            gate: Gate::new(config.max_in_flight),
            config,
            api_key: api_key.into(),
            client,
        })
    }

    pub fn config(&self) -> &MllmConfig {
        &self.config
    }

    fn body(&self, req: &SelectorRequest) -> Result<serde_json::Value, SelectorError> {
        let mut content = vec![json!({"type": "text", "text": req.prompt})];
        if let Some(image) = &req.image {
            let png = match &image.png {
                Some(png) => png.clone(),
                None => rasterize(image, 1.0)?.png.unwrap_or_default(),
            };
            let data = base64::engine::general_purpose::STANDARD.encode(png);
            content.push(json!({
                "type": "image_url",
                "image_url": {"url": format!("data:image/png;base64,{data}")}
            }));
        }
        Ok(json!({
            "model": req.model_name,
            "temperature": req.temperature,
            "messages": [{"role": "user", "content": content}],
        }))
    }

    fn attempt(&self, body: &serde_json::Value, tries: u32) -> Outcome {
        let sent = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.api_key)
            .json(body)
            .send();
        let resp = match sent {
            Ok(r) => r,
            Err(e) => return Outcome::Retry(SelectorError::Transport(e.to_string()), None),
        };
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(|s| Duration::from_secs(s.min(60)));
        let text = resp.text().unwrap_or_default();
        match status {
            200..=299 => {
                let parsed: Result<serde_json::Value, _> = serde_json::from_str(&text);
                match parsed
                    .ok()
                    .as_ref()
                    .and_then(|v| v.pointer("/choices/0/message/content"))
                    .and_then(|c| c.as_str())
                {
                    Some(content) => Outcome::Done(content.to_string()),
                    None => Outcome::Fatal(SelectorError::Malformed(truncate(&text))),
                }
            }
            401 | 403 => Outcome::Fatal(SelectorError::Auth {
                status,
                body: truncate(&text),
            }),
            429 => Outcome::Retry(SelectorError::RateLimited { attempts: tries + 1 }, retry_after),
            500..=599 => Outcome::Retry(
                SelectorError::Http {
                    status,
                    body: truncate(&text),
                },
                retry_after,
            ),
            _ => Outcome::Fatal(SelectorError::Http {
                status,
                body: truncate(&text),
            }),
        }
    }
}

fn truncate(s: &str) -> String {
    s.chars().take(500).collect()
}

impl Backend for MllmBackend {
    fn kind(&self) -> BackendKind {
        BackendKind::Mllm
    }

    fn model_name(&self) -> String {
        self.config.model_name.clone()
    }

    fn needs_image(&self) -> bool {
        true
    }

    fn complete(&self, req: &SelectorRequest, _ctx: &QueryContext<'_>) -> Result<String, SelectorError> {
        let body = self.body(req)?;
        let _permit = self.gate.acquire();
        let mut tries = 0;
        loop {
            match self.attempt(&body, tries) {
                Outcome::Fatal(err) => return Err(err),
                Outcome::Done(text) => return Ok(text),
                Outcome::Retry(err, wait) => {
                    if tries >= self.config.max_retries {
                        return Err(err);
                    }
                    let backoff = Duration::from_millis(self.config.backoff_ms.saturating_mul(1 << tries.min(16)));
                    let wait = wait.unwrap_or(backoff).max(backoff);
                    log::warn!("request {} failed ({err}); retrying in {wait:?}", &req.request_id[..12]);
                    std::thread::sleep(wait);
                    tries += 1;
                }
            }
        }
    }
}
