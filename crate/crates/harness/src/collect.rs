//! Response collection from a chat-completions-compatible endpoint.
//!
//! Completed responses are appended to the output file as soon as they
//! arrive, so an interrupted run can be resumed: ids already present in the
//! output are never requested again.

use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use lexinstruct_core::Instruction;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::records::{append_jsonl, ResponseRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// Base URL; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    #[serde(default)]
    pub temperature: f64,
    pub top_p: Option<f64>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: Option<String>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff")]
    pub backoff_ms: u64,
}

fn default_max_tokens() -> u32 {
    4096
}
fn default_concurrency() -> usize {
    4
}
fn default_timeout() -> u64 {
    300
}
fn default_attempts() -> u32 {
    3
}
fn default_backoff() -> u64 {
    1000
}

impl EndpointConfig {
    pub fn from_toml(src: &str) -> Result<EndpointConfig> {
        let cfg: EndpointConfig =
            toml::from_str(src).map_err(|e| HarnessError::Config(format!("endpoint config: {e}")))?;
        if cfg.concurrency == 0 || cfg.max_attempts == 0 {
            return Err(HarnessError::Config("concurrency and max_attempts must be positive".into()));
        }
        Ok(cfg)
    }

    fn api_key(&self) -> Result<Option<String>> {
        match &self.api_key_env {
            None => Ok(None),
            Some(var) => std::env::var(var)
                .map(Some)
                .map_err(|_| HarnessError::Config(format!("environment variable {var} is not set"))),
        }
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }
}

/// A request that still failed after all retries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectFailure {
    pub id: String,
    pub error: String,
    pub attempts: u32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollectSummary {
    /// Ids already present in the output before this run.
    pub skipped: usize,
    pub succeeded: usize,
    pub failed: Vec<CollectFailure>,
}

/// Sidecar file collecting failures of the latest run.
pub fn errors_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".errors.jsonl");
    PathBuf::from(name)
}

/// Reads completed ids from an existing output file. A final line cut short
/// by an interrupted write is dropped from the file.
fn completed_ids(path: &Path) -> Result<HashSet<String>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashSet::new()),
        Err(e) => return Err(HarnessError::io(path, e)),
    };
    let mut ids = HashSet::new();
    let mut good_len = 0;
    for (i, line) in text.split_inclusive('\n').enumerate() {
        if line.trim().is_empty() {
            good_len += line.len();
            continue;
        }
        match serde_json::from_str::<ResponseRecord>(line) {
            Ok(r) => {
                ids.insert(r.id);
                good_len += line.len();
            }
            Err(_) if !line.ends_with('\n') => break,
            Err(e) => return Err(HarnessError::malformed(path, i + 1, e)),
        }
    }
    if good_len < text.len() {
        let f = OpenOptions::new().write(true).open(path).map_err(|e| HarnessError::io(path, e))?;
        f.set_len(good_len as u64).map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(ids)
}

enum Attempt {
    Done(String),
    Transient(String),
    Permanent(String),
}

fn request_once(agent: &ureq::Agent, cfg: &EndpointConfig, key: Option<&str>, prompt: &str) -> Attempt {
    let mut body = json!({
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_tokens,
    });
    if let Some(p) = cfg.top_p {
        body["top_p"] = json!(p);
    }
    let mut req = agent.post(&cfg.url()).header("Content-Type", "application/json");
    if let Some(k) = key {
        req = req.header("Authorization", &format!("Bearer {k}"));
    }
    let mut resp = match req.send_json(&body) {
        Ok(r) => r,
        Err(e) => {
            return match e {
                ureq::Error::Io(_)
                | ureq::Error::Timeout(_)
                | ureq::Error::ConnectionFailed
                | ureq::Error::HostNotFound
                | ureq::Error::BodyStalled => Attempt::Transient(e.to_string()),
                other => Attempt::Permanent(other.to_string()),
            }
        }
    };
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap_or_default();
    if status == 429 || status >= 500 {
        return Attempt::Transient(format!("HTTP {status}: {}", snippet(&text)));
    }
    if status >= 400 {
        return Attempt::Permanent(format!("HTTP {status}: {}", snippet(&text)));
    }
    let parsed: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return Attempt::Permanent(format!("invalid JSON response: {e}")),
    };
    match parsed["choices"][0]["message"]["content"].as_str() {
        Some(c) => Attempt::Done(c.to_string()),
        None => Attempt::Permanent(format!("response has no message content: {}", snippet(&text))),
    }
}

fn snippet(s: &str) -> String {
    s.chars().take(200).collect()
}

/// Requests with retries on connection errors, 429 and 5xx, backing off
/// exponentially between attempts.
fn request(
    agent: &ureq::Agent,
    cfg: &EndpointConfig,
    key: Option<&str>,
    instr: &Instruction,
) -> std::result::Result<ResponseRecord, CollectFailure> {
    let start = Instant::now();
    let mut last = String::new();
    for attempt in 1..=cfg.max_attempts {
        match request_once(agent, cfg, key, &instr.prompt) {
            Attempt::Done(response) => {
                return Ok(ResponseRecord {
                    id: instr.id.clone(),
                    response,
                    latency_ms: Some(start.elapsed().as_millis() as u64),
                })
            }
            Attempt::Permanent(e) => return Err(CollectFailure { id: instr.id.clone(), error: e, attempts: attempt }),
            Attempt::Transient(e) => {
                last = e;
                if attempt < cfg.max_attempts {
                    thread::sleep(Duration::from_millis(cfg.backoff_ms << (attempt - 1)));
                }
            }
        }
    }
    Err(CollectFailure { id: instr.id.clone(), error: last, attempts: cfg.max_attempts })
}

/// Collects a response for every instruction not yet in `out`.
pub fn collect(instructions: &[Instruction], cfg: &EndpointConfig, out: &Path) -> Result<CollectSummary> {
    let key = cfg.api_key()?;
    let done = completed_ids(out)?;
    let pending: Vec<&Instruction> = instructions.iter().filter(|i| !done.contains(&i.id)).collect();
    let mut journal =
        OpenOptions::new().create(true).append(true).open(out).map_err(|e| HarnessError::io(out, e))?;
    let err_path = errors_path(out);
    let mut errors = fs::File::create(&err_path).map_err(|e| HarnessError::io(&err_path, e))?;

    let agent: ureq::Agent = ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(cfg.timeout_secs)))
        .build()
        .into();
    let next = AtomicUsize::new(0);
    let mut summary = CollectSummary { skipped: instructions.len() - pending.len(), ..Default::default() };
    let (tx, rx) = mpsc::channel();
    thread::scope(|s| -> Result<()> {
        for _ in 0..cfg.concurrency.min(pending.len()) {
            let tx = tx.clone();
            let (agent, next, pending, key) = (&agent, &next, &pending, key.as_deref());
            s.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(instr) = pending.get(i) else { break };
                if tx.send(request(agent, cfg, key, instr)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for result in rx {
            match result {
                Ok(rec) => {
                    append_jsonl(&mut journal, &rec).map_err(|e| HarnessError::io(out, e))?;
                    summary.succeeded += 1;
                }
                Err(f) => {
                    append_jsonl(&mut errors, &f).map_err(|e| HarnessError::io(&err_path, e))?;
                    summary.failed.push(f);
                }
            }
        }
        Ok(())
    })?;
    summary.failed.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(summary)
}
