use std::collections::HashMap;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("io error on transcript: {0}")]
    Io(#[from] std::io::Error),
    #[error("transcript line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transcript line {line}: duplicate fingerprint {fingerprint}")]
    DuplicateFingerprint { line: usize, fingerprint: String },
}

/// One recorded completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub fingerprint: String,
    /// Informational only; lookup uses the fingerprint.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_id: Option<String>,
    pub response: Value,
}

/// Ordered fingerprint → response pairs with exact-match lookup.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    entries: Vec<TranscriptEntry>,
    index: HashMap<String, usize>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[TranscriptEntry] {
        &self.entries
    }

    pub fn get(&self, fingerprint: &str) -> Option<&TranscriptEntry> {
        self.index.get(fingerprint).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, fingerprint: &str) -> bool {
        self.index.contains_key(fingerprint)
    }

    /// Appends an entry; returns `false` and leaves the transcript unchanged
    /// when the fingerprint is already present.
    pub fn insert(&mut self, entry: TranscriptEntry) -> bool {
        if self.index.contains_key(&entry.fingerprint) {
            return false;
        }
        self.index.insert(entry.fingerprint.clone(), self.entries.len());
        self.entries.push(entry);
        true
    }

    pub fn from_reader<R: BufRead>(input: R) -> Result<Self, TranscriptError> {
        let mut transcript = Transcript::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry =
                serde_json::from_str(&line).map_err(|e| TranscriptError::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            let fingerprint = entry.fingerprint.clone();
            if !transcript.insert(entry) {
                return Err(TranscriptError::DuplicateFingerprint {
                    line: idx + 1,
                    fingerprint,
                });
            }
        }
        Ok(transcript)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TranscriptError> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("transcript entries serialize") + "\n")
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TranscriptError> {
        std::fs::write(path, self.to_jsonl())?;
        Ok(())
    }
}
