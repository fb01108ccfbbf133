use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;

use lexinstruct_core::{parse_rule, Instruction, Language};
use lexinstruct_harness::collect::{collect, errors_path, CollectFailure, EndpointConfig};
use lexinstruct_harness::records::{read_jsonl, ResponseRecord};
use serde_json::Value;

/// Minimal chat-completions stub. Prompts containing "DENY" get a 400,
/// "FLAKY" gets one 503 before succeeding, "DOWN" always gets a 503.
struct Stub {
    url: String,
    log: Arc<Mutex<Vec<String>>>,
}

fn handle(mut stream: TcpStream, log: &Mutex<Vec<String>>, seen: &Mutex<HashMap<String, usize>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut len = 0;
    let mut auth = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap() == 0 {
            return;
        }
        let l = line.trim_end().to_ascii_lowercase();
        if l.is_empty() {
            break;
        }
        if let Some(v) = l.strip_prefix("content-length:") {
            len = v.trim().parse().unwrap();
        }
        if let Some(v) = line.trim_end().strip_prefix("authorization: ").or(line.trim_end().strip_prefix("Authorization: ")) {
            auth = v.to_string();
        }
    }
    let mut body = vec![0; len];
    reader.read_exact(&mut body).unwrap();
    let req: Value = serde_json::from_slice(&body).unwrap();
    let prompt = req["messages"][0]["content"].as_str().unwrap().to_string();
    log.lock().unwrap().push(prompt.clone());
    let attempt = {
        let mut s = seen.lock().unwrap();
        let n = s.entry(prompt.clone()).or_default();
        *n += 1;
        *n
    };
    let (status, payload) = if auth != "Bearer sekrit" {
        (401, "{\"error\":\"unauthorized\"}".to_string())
    } else if prompt.contains("DENY") {
        (400, "{\"error\":\"bad request\"}".to_string())
    } else if prompt.contains("DOWN") || (prompt.contains("FLAKY") && attempt == 1) {
        (503, "{\"error\":\"busy\"}".to_string())
    } else {
        let content = format!("echo: {prompt}");
        (200, serde_json::json!({"choices": [{"message": {"role": "assistant", "content": content}}]}).to_string())
    };
    let reply = format!(
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}",
        payload.len()
    );
    stream.write_all(reply.as_bytes()).unwrap();
}

fn stub() -> Stub {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1", listener.local_addr().unwrap());
    let log = Arc::new(Mutex::new(Vec::new()));
    let seen = Arc::new(Mutex::new(HashMap::new()));
    let l = log.clone();
    thread::spawn(move || {
        for stream in listener.incoming() {
            let (l, seen) = (l.clone(), seen.clone());
            thread::spawn(move || handle(stream.unwrap(), &l, &seen));
        }
    });
    Stub { url, log }
}

fn config(url: &str) -> EndpointConfig {
    std::env::set_var("LEXEVAL_TEST_KEY", "sekrit");
    EndpointConfig::from_toml(&format!(
        "base_url = \"{url}\"\nmodel = \"m\"\napi_key_env = \"LEXEVAL_TEST_KEY\"\nbackoff_ms = 1\nconcurrency = 2\n"
    ))
    .unwrap()
}

fn instr(id: &str, prompt: &str) -> Instruction {
    Instruction::new(id, Language::En, prompt, vec![parse_rule("word# > 1").unwrap()])
}

fn responses(path: &std::path::Path) -> Vec<ResponseRecord> {
    let mut r: Vec<ResponseRecord> = read_jsonl(path).unwrap().into_iter().map(|(_, r)| r).collect();
    r.sort_by(|a, b| a.id.cmp(&b.id));
    r
}

#[test]
fn all_succeed_with_ids_preserved() {
    let s = stub();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let instrs = [instr("a", "one"), instr("b", "two"), instr("c", "FLAKY three")];
    let summary = collect(&instrs, &config(&s.url), &out).unwrap();
    assert_eq!((summary.succeeded, summary.failed.len()), (3, 0));
    let got = responses(&out);
    assert_eq!(got.iter().map(|r| r.id.as_str()).collect::<Vec<_>>(), ["a", "b", "c"]);
    assert_eq!(got[1].response, "echo: two");
    assert!(got.iter().all(|r| r.latency_ms.is_some()));
    // the flaky prompt was retried once
    assert_eq!(s.log.lock().unwrap().iter().filter(|p| p.contains("FLAKY")).count(), 2);
}

#[test]
fn partial_failure_then_resume() {
    let s = stub();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    let cfg = config(&s.url);
    let instrs = [instr("a", "one"), instr("b", "DENY two"), instr("c", "DOWN three")];
    let summary = collect(&instrs, &cfg, &out).unwrap();
    assert_eq!(summary.succeeded, 1);
    let failed: Vec<(&str, u32)> = summary.failed.iter().map(|f| (f.id.as_str(), f.attempts)).collect();
    // permanent errors are not retried, transient ones are tried three times
    assert_eq!(failed, [("b", 1), ("c", 3)]);
    let errors: Vec<CollectFailure> = read_jsonl(&errors_path(&out)).unwrap().into_iter().map(|(_, f)| f).collect();
    assert_eq!(errors.len(), 2);

    // a rerun only requests the missing ids
    s.log.lock().unwrap().clear();
    let fixed = [instr("a", "one"), instr("b", "two"), instr("c", "three")];
    let summary = collect(&fixed, &cfg, &out).unwrap();
    assert_eq!((summary.skipped, summary.succeeded, summary.failed.len()), (1, 2, 0));
    let mut requested = s.log.lock().unwrap().clone();
    requested.sort();
    assert_eq!(requested, ["three", "two"]);
    assert_eq!(responses(&out).len(), 3);
    assert!(read_jsonl::<CollectFailure>(&errors_path(&out)).unwrap().is_empty());
}

#[test]
fn truncated_journal_line_is_discarded() {
    let s = stub();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.jsonl");
    std::fs::write(&out, "{\"id\":\"a\",\"response\":\"x\"}\n{\"id\":\"b\",\"resp").unwrap();
    let summary = collect(&[instr("a", "one"), instr("b", "two")], &config(&s.url), &out).unwrap();
    assert_eq!((summary.skipped, summary.succeeded), (1, 1));
    assert_eq!(responses(&out).len(), 2);
}

#[test]
fn missing_credential_is_a_config_error() {
    let cfg = EndpointConfig::from_toml(
        "base_url = \"http://127.0.0.1:9\"\nmodel = \"m\"\napi_key_env = \"LEXEVAL_SURELY_UNSET\"\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let err = collect(&[instr("a", "x")], &cfg, &dir.path().join("r.jsonl")).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(!dir.path().join("r.jsonl").exists());
}
