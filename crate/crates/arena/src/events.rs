//! Append-only JSONL event log.
//!
//! Each line is one JSON object: `{"v":1,"type":<variant>, ...fields}`.
//! A line without a trailing newline is a torn write and is dropped on open.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sheetarena_rating::VoteRecord;

use crate::ArenaError;

pub const EVENT_LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ArenaEvent {
    PromptSubmitted {
        prompt_id: String,
        text: String,
        category: String,
        timestamp: DateTime<Utc>,
    },
    GenerationStored {
        workbook_id: String,
        prompt_id: String,
        model_id: String,
        /// Raw model output, possibly malformed.
        document: String,
        valid: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        error: Option<String>,
    },
    BattleCreated {
        battle_id: String,
        prompt_id: String,
        workbook_a: String,
        workbook_b: String,
    },
    VoteCast {
        #[serde(flatten)]
        vote: VoteRecord,
        /// SHA-256 of the voter token.
        voter: String,
    },
}

#[derive(Serialize, Deserialize)]
struct LogLine {
    v: u32,
    #[serde(flatten)]
    event: ArenaEvent,
}

pub fn hash_token(token: &str) -> String {
    hex::encode(Sha256::digest(token.as_bytes()))
}

pub fn encode(event: &ArenaEvent) -> String {
    let line = LogLine {
        v: EVENT_LOG_VERSION,
        event: event.clone(),
    };
    serde_json::to_string(&line).expect("events serialize")
}

pub fn decode(line: &str, number: usize) -> Result<ArenaEvent, ArenaError> {
    let value: serde_json::Value = serde_json::from_str(line).map_err(|e| ArenaError::CorruptLog {
        line: number,
        message: e.to_string(),
    })?;
    match value.get("v").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(EVENT_LOG_VERSION) => {}
        other => {
            return Err(ArenaError::CorruptLog {
                line: number,
                message: format!("unsupported log version {other:?}"),
            })
        }
    }
    let parsed: LogLine = serde_json::from_value(value).map_err(|e| ArenaError::CorruptLog {
        line: number,
        message: e.to_string(),
    })?;
    Ok(parsed.event)
}

pub struct EventLog {
    file: File,
    path: PathBuf,
}

impl EventLog {
    /// Open or create the log and return its events in order.
    pub fn open(path: &Path) -> Result<(Self, Vec<ArenaEvent>), ArenaError> {
        let mut file = OpenOptions::new().read(true).append(true).create(true).open(path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let complete = match text.rfind('\n') {
            Some(i) => i + 1,
            None => 0,
        };
        if complete < text.len() {
            tracing::warn!(path = %path.display(), bytes = text.len() - complete, "dropping torn final log line");
            file.set_len(complete as u64)?;
            file.seek(SeekFrom::End(0))?;
        }
        let events = text[..complete]
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| decode(l, i + 1))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((
            Self {
                file,
                path: path.to_path_buf(),
            },
            events,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Write the events as one batch and flush them to disk.
    pub fn append(&mut self, events: &[ArenaEvent]) -> Result<(), ArenaError> {
        let mut buf = String::new();
        for e in events {
            buf.push_str(&encode(e));
            buf.push('\n');
        }
        self.file.write_all(buf.as_bytes())?;
        self.file.sync_data()?;
        Ok(())
    }
}
