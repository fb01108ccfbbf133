//! Line-delimited JSON instruction and response files.

use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::Path;

use lexinstruct_core::Instruction;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResponseRecord {
    pub id: String,
    pub response: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
}

/// Parses every non-blank line of `path`, returning records with their
/// 1-based line numbers.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_jsonl(path, &text)
}

pub fn parse_jsonl<T: DeserializeOwned>(path: &Path, text: &str) -> Result<Vec<(usize, T)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map(|r| (i + 1, r)).map_err(|e| HarnessError::malformed(path, i + 1, e))
        })
        .collect()
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r).expect("records serialize");
        out.push(b'\n');
    }
    fs::write(path, out).map_err(|e| HarnessError::io(path, e))
}

/// Appends one record and flushes it to disk.
pub fn append_jsonl<T: Serialize>(file: &mut fs::File, record: &T) -> std::io::Result<()> {
    let mut line = serde_json::to_vec(record).expect("records serialize");
    line.push(b'\n');
    file.write_all(&line)?;
    file.flush()
}

/// Loads and checks an instruction file: every record must be internally
/// consistent and ids must be unique.
pub fn load_instructions(path: &Path) -> Result<Vec<Instruction>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, instr) in read_jsonl::<Instruction>(path)? {
        instr.check().map_err(|e| HarnessError::malformed(path, line, e))?;
        if !seen.insert(instr.id.clone()) {
            return Err(HarnessError::DuplicateId { path: path.into(), line, id: instr.id });
        }
        out.push(instr);
    }
    Ok(out)
}

/// Loads a response file whose ids must be unique and known.
pub fn load_responses(path: &Path, instructions: &[Instruction]) -> Result<Vec<ResponseRecord>> {
    let known: HashSet<&str> = instructions.iter().map(|i| i.id.as_str()).collect();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, rec) in read_jsonl::<ResponseRecord>(path)? {
        if !known.contains(rec.id.as_str()) {
            return Err(HarnessError::UnknownId { path: path.into(), line, id: rec.id });
        }
        if !seen.insert(rec.id.clone()) {
            return Err(HarnessError::DuplicateId { path: path.into(), line, id: rec.id });
        }
        out.push(rec);
    }
    Ok(out)
}
