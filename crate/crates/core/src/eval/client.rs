//! Solver backends.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::validator::AnswerSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("solver unavailable: {0}")]
    Unavailable(String),
    #[error("no recorded response for riddle {0}")]
    FixtureMiss(String),
    #[error("recorded prompt for riddle {0} differs from the current prompt")]
    PromptMismatch(String),
    #[error("invalid fixture: {0}")]
    InvalidFixture(String),
}

/// Something that answers a prompt.
///
/// `riddle_id` is passed alongside the prompt so scripted and recorded
/// backends can key their responses; a live model only sees the prompt.
pub trait SolverClient: Send + Sync {
    fn complete(&self, riddle_id: &str, prompt: &str) -> Result<String, SolverError>;
}

/// One prompt/response exchange. A list of these, one JSON object per line,
/// is both the audit transcript of a run and the recorded-fixture format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptRecord {
    pub riddle_id: String,
    pub prompt: String,
    pub response: String,
}

pub fn transcript_to_jsonl(records: &[TranscriptRecord]) -> String {
    records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
}

/// Scripted responses keyed by riddle id; unknown ids get an empty response.
#[derive(Debug, Clone, Default)]
pub struct MockClient {
    responses: BTreeMap<String, String>,
}

impl MockClient {
    pub fn new(responses: BTreeMap<String, String>) -> Self {
        Self { responses }
    }

    /// Always answers with nothing.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Answers every riddle with its full answer set, one per line.
    pub fn echo_answers<'a>(sets: impl IntoIterator<Item = &'a AnswerSet>) -> Self {
        Self::new(
            sets.into_iter()
                .map(|s| {
                    let lines: Vec<&str> = s.answers.iter().map(|c| c.as_str()).collect();
                    (s.riddle_id.clone(), lines.join("\n"))
                })
                .collect(),
        )
    }

    /// Answers every riddle with only its intended concept.
    pub fn intended_only<'a>(sets: impl IntoIterator<Item = &'a AnswerSet>) -> Self {
        Self::new(sets.into_iter().map(|s| (s.riddle_id.clone(), s.intended.to_string())).collect())
    }
}

impl SolverClient for MockClient {
    fn complete(&self, riddle_id: &str, _prompt: &str) -> Result<String, SolverError> {
        Ok(self.responses.get(riddle_id).cloned().unwrap_or_default())
    }
}

/// Replays a recorded session. The recorded prompt must match the prompt
/// being asked, so a fixture cannot silently drift from its riddles.
#[derive(Debug, Clone)]
pub struct RecordedClient {
    records: BTreeMap<String, TranscriptRecord>,
}

impl RecordedClient {
    pub fn from_records(records: impl IntoIterator<Item = TranscriptRecord>) -> Result<Self, SolverError> {
        let mut map = BTreeMap::new();
        for r in records {
            let id = r.riddle_id.clone();
            if map.insert(id.clone(), r).is_some() {
                return Err(SolverError::InvalidFixture(format!("duplicate riddle_id {id}")));
            }
        }
        Ok(Self { records: map })
    }

    pub fn from_jsonl(text: &str) -> Result<Self, SolverError> {
        let records = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
            .map(|(i, l)| {
                serde_json::from_str::<TranscriptRecord>(l)
                    .map_err(|e| SolverError::InvalidFixture(format!("line {}: {e}", i + 1)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_records(records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl SolverClient for RecordedClient {
    fn complete(&self, riddle_id: &str, prompt: &str) -> Result<String, SolverError> {
        let record = self.records.get(riddle_id).ok_or_else(|| SolverError::FixtureMiss(riddle_id.to_string()))?;
        if record.prompt != prompt {
            return Err(SolverError::PromptMismatch(riddle_id.to_string()));
        }
        Ok(record.response.clone())
    }
}

#[cfg(feature = "live")]
pub use live::{LiveClient, KEY_VAR, URL_VAR};

#[cfg(feature = "live")]
mod live {
    use std::time::Duration;

    use super::{SolverClient, SolverError};

    pub const URL_VAR: &str = "SOLVER_API_URL";
    pub const KEY_VAR: &str = "SOLVER_API_KEY";

    /// HTTP backend. Sends `{"prompt": ...}` as JSON with an optional bearer
    /// token and accepts either `{"response": "..."}` or a chat-completions
    /// style `choices[0].message.content` body. Transient failures
    /// (connection errors, timeouts, 5xx) are retried once.
    pub struct LiveClient {
        url: String,
        key: Option<String>,
        http: reqwest::blocking::Client,
    }

    impl LiveClient {
        pub fn new(url: impl Into<String>, key: Option<String>, timeout: Duration) -> Result<Self, SolverError> {
            let http = reqwest::blocking::Client::builder()
                .timeout(timeout)
                .build()
                .map_err(|e| SolverError::Unavailable(e.to_string()))?;
            Ok(Self { url: url.into(), key, http })
        }

        pub fn from_env() -> Result<Self, SolverError> {
            let url = std::env::var(URL_VAR).map_err(|_| SolverError::Unavailable(format!("{URL_VAR} is not set")))?;
            Self::new(url, std::env::var(KEY_VAR).ok(), Duration::from_secs(30))
        }

        fn attempt(&self, prompt: &str) -> Result<String, (bool, SolverError)> {
            let mut req = self.http.post(&self.url).json(&serde_json::json!({ "prompt": prompt }));
            if let Some(key) = &self.key {
                req = req.bearer_auth(key);
            }
            let resp = req.send().map_err(|e| (true, SolverError::Unavailable(e.to_string())))?;
            let status = resp.status();
            if !status.is_success() {
                return Err((status.is_server_error(), SolverError::Unavailable(format!("HTTP {status}"))));
            }
            let body: serde_json::Value =
                resp.json().map_err(|e| (false, SolverError::Unavailable(format!("bad response body: {e}"))))?;
            extract_text(&body).ok_or_else(|| (false, SolverError::Unavailable("response has no text field".into())))
        }
    }

    fn extract_text(body: &serde_json::Value) -> Option<String> {
        body.get("response")
            .or_else(|| body.pointer("/choices/0/message/content"))
            .or_else(|| body.get("text"))
            .and_then(|v| v.as_str())
            .map(str::to_string)
    }

    impl SolverClient for LiveClient {
        fn complete(&self, _riddle_id: &str, prompt: &str) -> Result<String, SolverError> {
            match self.attempt(prompt) {
                Ok(text) => Ok(text),
                Err((true, _)) => self.attempt(prompt).map_err(|(_, e)| e),
                Err((false, e)) => Err(e),
            }
        }
    }
}
