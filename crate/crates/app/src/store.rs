//! Directory-backed riddle store: `records/<id>.json` plus `index.json`.
//!
//! Each record file wraps the record with a SHA-256 digest of its canonical
//! JSON, so hand edits and truncation are detected on load. Records remember
//! the digest of the knowledge base their answer set was computed against;
//! when the store is opened with a different KB every such record is stale
//! until [`RiddleStore::refresh`] recomputes it.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use riddler::generator::Riddle;
use riddler::knowledge::{ConceptId, KnowledgeBase};
use riddler::validator::{answer_set, AnswerSet, ValidatorError};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store I/O on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("record {id} is corrupt: {reason}")]
    CorruptRecord { id: String, reason: String },
    #[error("no riddle with id {0}")]
    NotFound(String),
    #[error("invalid riddle id {0:?}")]
    InvalidId(String),
    #[error(transparent)]
    Validator(#[from] ValidatorError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoredRecord {
    pub riddle: Riddle,
    pub answers: BTreeSet<ConceptId>,
    /// Seconds since the Unix epoch.
    pub created_at: u64,
    pub kb_digest: String,
}

impl StoredRecord {
    pub fn answer_set(&self) -> AnswerSet {
        AnswerSet {
            riddle_id: self.riddle.id.clone(),
            answers: self.answers.clone(),
            intended: self.riddle.intended.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordFile {
    digest: String,
    record: StoredRecord,
}

#[derive(Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Index {
    riddles: BTreeSet<String>,
}

fn digest_of(record: &StoredRecord) -> String {
    let bytes = serde_json::to_vec(record).expect("record serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Riddle ids become file names, so only a conservative alphabet is allowed.
fn check_id(id: &str) -> Result<(), StoreError> {
    let ok = !id.is_empty() && id.len() <= 64 && id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
    if ok {
        Ok(())
    } else {
        Err(StoreError::InvalidId(id.to_string()))
    }
}

/// Writes through a temporary file so readers never see half a record.
fn write_atomic(path: &Path, contents: &str) -> Result<(), StoreError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[derive(Debug)]
pub struct RiddleStore {
    root: PathBuf,
    kb_digest: String,
    ids: BTreeSet<String>,
}

impl RiddleStore {
    /// Opens (creating if needed) the store at `root` for a KB with the
    /// given digest.
    pub fn open(root: impl Into<PathBuf>, kb_digest: &str) -> Result<Self, StoreError> {
        let root = root.into();
        let records = root.join("records");
        fs::create_dir_all(&records).map_err(io_err(&records))?;
        let index_path = root.join("index.json");
        let ids = match fs::read_to_string(&index_path) {
            Ok(text) => {
                serde_json::from_str::<Index>(&text)
                    .map_err(|e| StoreError::CorruptRecord { id: "index".into(), reason: e.to_string() })?
                    .riddles
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => BTreeSet::new(),
            Err(e) => return Err(io_err(&index_path)(e)),
        };
        Ok(Self { root, kb_digest: kb_digest.to_string(), ids })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn kb_digest(&self) -> &str {
        &self.kb_digest
    }

    fn record_path(&self, id: &str) -> PathBuf {
        self.root.join("records").join(format!("{id}.json"))
    }

    fn write_index(&self) -> Result<(), StoreError> {
        let index = Index { riddles: self.ids.clone() };
        write_atomic(
            &self.root.join("index.json"),
            &(serde_json::to_string_pretty(&index).expect("index serializes") + "\n"),
        )
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.ids.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.ids.contains(id)
    }

    /// Writes `record` and adds it to the index. Saving an id again
    /// replaces the previous record.
    pub fn save(&mut self, record: &StoredRecord) -> Result<(), StoreError> {
        check_id(&record.riddle.id)?;
        let file = RecordFile { digest: digest_of(record), record: record.clone() };
        let text = serde_json::to_string_pretty(&file).expect("record serializes") + "\n";
        write_atomic(&self.record_path(&record.riddle.id), &text)?;
        if self.ids.insert(record.riddle.id.clone()) {
            self.write_index()?;
        }
        Ok(())
    }

    /// Computes the answer set against `kb`, stamps the record and saves it.
    pub fn insert(&mut self, kb: &KnowledgeBase, riddle: Riddle) -> Result<StoredRecord, StoreError> {
        let answers = answer_set(kb, &riddle)?.answers;
        let created_at = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let record = StoredRecord { riddle, answers, created_at, kb_digest: self.kb_digest.clone() };
        self.save(&record)?;
        Ok(record)
    }

    pub fn load(&self, id: &str) -> Result<StoredRecord, StoreError> {
        check_id(id)?;
        if !self.ids.contains(id) {
            return Err(StoreError::NotFound(id.to_string()));
        }
        let path = self.record_path(id);
        let text = fs::read_to_string(&path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => {
                StoreError::CorruptRecord { id: id.into(), reason: "record file is missing".into() }
            }
            _ => io_err(&path)(e),
        })?;
        let corrupt = |reason: String| StoreError::CorruptRecord { id: id.to_string(), reason };
        let file: RecordFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        if digest_of(&file.record) != file.digest {
            return Err(corrupt("digest mismatch".into()));
        }
        if file.record.riddle.id != id {
            return Err(corrupt(format!("file holds riddle {}", file.record.riddle.id)));
        }
        Ok(file.record)
    }

    /// All records in id order.
    pub fn load_all(&self) -> Result<Vec<StoredRecord>, StoreError> {
        self.ids.iter().map(|id| self.load(id)).collect()
    }

    /// Whether `record` was computed against a different KB than this store's.
    pub fn is_stale(&self, record: &StoredRecord) -> bool {
        record.kb_digest != self.kb_digest
    }

    pub fn stale_ids(&self) -> Result<Vec<String>, StoreError> {
        Ok(self.load_all()?.into_iter().filter(|r| self.is_stale(r)).map(|r| r.riddle.id).collect())
    }

    /// Recomputes the answer set of every stale record against `kb` (which
    /// must be the KB this store was opened for). Returns the ids whose
    /// answer sets changed.
    pub fn refresh(&mut self, kb: &KnowledgeBase) -> Result<BTreeMap<String, (usize, usize)>, StoreError> {
        let mut changed = BTreeMap::new();
        for mut record in self.load_all()? {
            if !self.is_stale(&record) {
                continue;
            }
            let answers = answer_set(kb, &record.riddle)?.answers;
            if answers != record.answers {
                changed.insert(record.riddle.id.clone(), (record.answers.len(), answers.len()));
            }
            record.answers = answers;
            record.kb_digest = self.kb_digest.clone();
            self.save(&record)?;
        }
        Ok(changed)
    }
}
