//! Provider-agnostic structured completions with record/replay.
//!
//! Every agent talks to the model through [`Gateway::complete_structured`].
//! In replay mode responses come from a [`Transcript`] keyed by
//! [`fingerprint`], so pipeline runs are a pure function of their inputs and
//! the transcript. Record mode behaves like replay for fingerprints already
//! present and like live mode (appending the result) for new ones.

mod openai;
mod provider;
pub mod schema;
mod transcript;

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use openai::{OpenAiCompatibleProvider, DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT};
pub use provider::{CompletionProvider, FnProvider, ProviderError, ScriptedProvider};
pub use schema::{OutputSchema, SchemaRegistry};
pub use transcript::{Transcript, TranscriptEntry, TranscriptError};

pub const DEFAULT_MODEL: &str = "gpt-4o-mini-2024-07-18";
pub const GENERATION_TEMPERATURE: f64 = 0.7;
pub const CRITIC_TEMPERATURE: f64 = 0.0;
pub const DEFAULT_MAX_ATTEMPTS: u32 = 3;

const REPAIR_INSTRUCTION: &str = "Return only valid structured output: a single JSON object \
matching the requested schema, with no commentary and no code fences.";

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt_id: String,
    pub rendered_prompt: String,
    pub schema_id: String,
    pub model: String,
    pub temperature: f64,
    pub max_attempts: u32,
}

impl CompletionRequest {
    pub fn new(
        prompt_id: impl Into<String>,
        rendered_prompt: impl Into<String>,
        schema_id: impl Into<String>,
    ) -> Self {
        Self {
            prompt_id: prompt_id.into(),
            rendered_prompt: rendered_prompt.into(),
            schema_id: schema_id.into(),
            model: DEFAULT_MODEL.to_string(),
            temperature: GENERATION_TEMPERATURE,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn with_temperature(mut self, temperature: f64) -> Self {
        self.temperature = temperature;
        self
    }

    pub fn with_max_attempts(mut self, max_attempts: u32) -> Self {
        self.max_attempts = max_attempts;
        self
    }
}

/// Stable request hash used as the transcript key.
///
/// SHA-256, hex encoded, over `prompt_id`, `schema_id`, `model` and
/// `rendered_prompt`, each written as `<byte length>:<bytes>\n`.
/// Temperature and `max_attempts` are excluded.
pub fn fingerprint(req: &CompletionRequest) -> String {
    let mut hasher = Sha256::new();
    for part in [&req.prompt_id, &req.schema_id, &req.model, &req.rendered_prompt] {
        hasher.update(part.len().to_string().as_bytes());
        hasher.update(b":");
        hasher.update(part.as_bytes());
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("provider unreachable after {attempts} attempts: {message}")]
    ProviderUnreachable { attempts: u32, message: String },
    #[error("provider rejected request: {0}")]
    ProviderRejected(String),
    #[error("`{prompt_id}` output violated schema after {attempts} attempts: {reason}")]
    SchemaViolation {
        prompt_id: String,
        attempts: u32,
        reason: String,
        last_raw: String,
    },
    #[error("replay miss for `{prompt_id}` (fingerprint {fingerprint})")]
    ReplayMiss { prompt_id: String, fingerprint: String },
    #[error("unknown output schema `{0}`")]
    UnknownSchema(String),
    #[error("invalid completion request: {0}")]
    InvalidRequest(String),
    #[error("no provider configured for live calls")]
    NoProvider,
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Live,
    Record,
    Replay,
}

/// Backoff for transport errors. Schema violations are handled separately by
/// re-prompting, up to the request's `max_attempts`.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub transport_attempts: u32,
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            transport_attempts: 3,
            base_delay: Duration::from_millis(500),
        }
    }
}

/// A successful structured completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Completion {
    pub payload: Value,
    /// Model calls spent, counting repair re-prompts. Zero when replayed.
    pub attempts: u32,
    pub replayed: bool,
}

struct TranscriptState {
    transcript: Transcript,
    sink: Option<File>,
}

#[derive(Default)]
struct CallLog {
    by_prompt: BTreeMap<String, usize>,
    by_fingerprint: BTreeMap<String, usize>,
}

pub struct Gateway {
    mode: Mode,
    provider: Option<Arc<dyn CompletionProvider>>,
    state: Mutex<TranscriptState>,
    schemas: SchemaRegistry,
    retry: RetryPolicy,
    calls: Mutex<CallLog>,
}

impl Gateway {
    fn build(mode: Mode, provider: Option<Arc<dyn CompletionProvider>>, transcript: Transcript) -> Self {
        Self {
            mode,
            provider,
            state: Mutex::new(TranscriptState { transcript, sink: None }),
            schemas: SchemaRegistry::standard(),
            retry: RetryPolicy::default(),
            calls: Mutex::new(CallLog::default()),
        }
    }

    pub fn replay(transcript: Transcript) -> Self {
        Self::build(Mode::Replay, None, transcript)
    }

    pub fn live(provider: Arc<dyn CompletionProvider>) -> Self {
        Self::build(Mode::Live, Some(provider), Transcript::new())
    }

    /// Record mode over an in-memory transcript seeded with `existing`.
    pub fn record(provider: Arc<dyn CompletionProvider>, existing: Transcript) -> Self {
        Self::build(Mode::Record, Some(provider), existing)
    }

    /// Record mode backed by a file: existing entries are loaded and new ones
    /// appended to it as they arrive.
    pub fn record_to_file(
        provider: Arc<dyn CompletionProvider>,
        path: impl AsRef<Path>,
    ) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let existing = if path.exists() {
            Transcript::load(path)?
        } else {
            Transcript::new()
        };
        let sink = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(TranscriptError::from)?;
        let gateway = Self::record(provider, existing);
        gateway.state.lock().unwrap().sink = Some(sink);
        Ok(gateway)
    }

    pub fn with_retry_policy(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_schemas(mut self, schemas: SchemaRegistry) -> Self {
        self.schemas = schemas;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Calls served so far, per prompt id (replayed or live).
    pub fn call_counts(&self) -> BTreeMap<String, usize> {
        self.calls.lock().unwrap().by_prompt.clone()
    }

    pub fn calls_for(&self, prompt_id: &str) -> usize {
        self.calls.lock().unwrap().by_prompt.get(prompt_id).copied().unwrap_or(0)
    }

    /// Calls served so far, per request fingerprint.
    pub fn fingerprint_hits(&self) -> BTreeMap<String, usize> {
        self.calls.lock().unwrap().by_fingerprint.clone()
    }

    pub fn total_calls(&self) -> usize {
        self.calls.lock().unwrap().by_prompt.values().sum()
    }

    pub fn transcript(&self) -> Transcript {
        self.state.lock().unwrap().transcript.clone()
    }

    pub fn complete_structured(&self, req: &CompletionRequest) -> Result<Completion, GatewayError> {
        self.complete_validated(req, &|_| Ok(()))
    }

    /// Like [`complete_structured`](Self::complete_structured), with an extra
    /// semantic check. A payload failing `validate` is treated exactly like a
    /// schema violation, so in live mode it triggers a repair re-prompt.
    pub fn complete_validated(
        &self,
        req: &CompletionRequest,
        validate: &dyn Fn(&Value) -> Result<(), String>,
    ) -> Result<Completion, GatewayError> {
        if req.rendered_prompt.trim().is_empty() {
            return Err(GatewayError::InvalidRequest("rendered_prompt is empty".into()));
        }
        if req.max_attempts < 1 {
            return Err(GatewayError::InvalidRequest("max_attempts must be at least 1".into()));
        }
        let schema = self
            .schemas
            .get(&req.schema_id)
            .cloned()
            .ok_or_else(|| GatewayError::UnknownSchema(req.schema_id.clone()))?;
        let check = |payload: &Value| schema.check(payload).and_then(|_| validate(payload));

        let fp = fingerprint(req);
        self.log_call(&req.prompt_id, &fp);

        if matches!(self.mode, Mode::Replay | Mode::Record) {
            let stored = self.state.lock().unwrap().transcript.get(&fp).map(|e| e.response.clone());
            match stored {
                Some(payload) => {
                    return match check(&payload) {
                        Ok(()) => Ok(Completion { payload, attempts: 0, replayed: true }),
                        Err(reason) => Err(GatewayError::SchemaViolation {
                            prompt_id: req.prompt_id.clone(),
                            attempts: 0,
                            reason,
                            last_raw: payload.to_string(),
                        }),
                    };
                }
                None if self.mode == Mode::Replay => {
                    return Err(GatewayError::ReplayMiss {
                        prompt_id: req.prompt_id.clone(),
                        fingerprint: fp,
                    })
                }
                None => {}
            }
        }

        let completion = self.call_live(req, &check)?;
        if self.mode == Mode::Record {
            return self.append(req, fp, completion);
        }
        Ok(completion)
    }

    fn log_call(&self, prompt_id: &str, fp: &str) {
        let mut calls = self.calls.lock().unwrap();
        *calls.by_prompt.entry(prompt_id.to_string()).or_default() += 1;
        *calls.by_fingerprint.entry(fp.to_string()).or_default() += 1;
    }

    fn append(&self, req: &CompletionRequest, fp: String, completion: Completion) -> Result<Completion, GatewayError> {
        let mut state = self.state.lock().unwrap();
        // a concurrent identical request may have recorded first; keep that one
        if let Some(existing) = state.transcript.get(&fp) {
            return Ok(Completion {
                payload: existing.response.clone(),
                attempts: completion.attempts,
                replayed: false,
            });
        }
        let entry = TranscriptEntry {
            fingerprint: fp,
            prompt_id: Some(req.prompt_id.clone()),
            response: completion.payload.clone(),
        };
        if let Some(sink) = state.sink.as_mut() {
            let line = serde_json::to_string(&entry).expect("transcript entries serialize");
            writeln!(sink, "{line}").and_then(|_| sink.flush()).map_err(TranscriptError::from)?;
        }
        state.transcript.insert(entry);
        Ok(completion)
    }

    fn call_live(
        &self,
        req: &CompletionRequest,
        check: &dyn Fn(&Value) -> Result<(), String>,
    ) -> Result<Completion, GatewayError> {
        let provider = self.provider.as_ref().ok_or(GatewayError::NoProvider)?;
        let mut prompt = req.rendered_prompt.clone();
        let mut last: Option<(String, String)> = None;
        for attempt in 1..=req.max_attempts {
            let raw = self.call_with_backoff(provider.as_ref(), req, &prompt)?;
            match parse_payload(&raw).and_then(|v| check(&v).map(|_| v)) {
                Ok(payload) => {
                    return Ok(Completion { payload, attempts: attempt, replayed: false });
                }
                Err(reason) => {
                    log::debug!("{}: attempt {attempt} unusable: {reason}", req.prompt_id);
                    prompt = format!(
                        "{}\n\nYour previous reply could not be used ({reason}). {REPAIR_INSTRUCTION}",
                        req.rendered_prompt
                    );
                    last = Some((raw, reason));
                }
            }
        }
        let (last_raw, reason) = last.expect("max_attempts >= 1");
        Err(GatewayError::SchemaViolation {
            prompt_id: req.prompt_id.clone(),
            attempts: req.max_attempts,
            reason,
            last_raw,
        })
    }

    fn call_with_backoff(
        &self,
        provider: &dyn CompletionProvider,
        req: &CompletionRequest,
        prompt: &str,
    ) -> Result<String, GatewayError> {
        let tries = self.retry.transport_attempts.max(1);
        let mut delay = self.retry.base_delay;
        let mut last = String::new();
        for attempt in 1..=tries {
            match provider.complete(req, prompt) {
                Ok(raw) => return Ok(raw),
                Err(ProviderError::Rejected(msg)) => return Err(GatewayError::ProviderRejected(msg)),
                Err(ProviderError::Transport(msg)) => {
                    log::warn!("{} via {}: {msg} (try {attempt}/{tries})", req.prompt_id, provider.name());
                    last = msg;
                    if attempt < tries {
                        std::thread::sleep(delay);
                        delay *= 2;
                    }
                }
            }
        }
        Err(GatewayError::ProviderUnreachable { attempts: tries, message: last })
    }
}

/// Extracts a JSON object from raw model text, tolerating a surrounding
/// markdown code fence.
pub fn parse_payload(raw: &str) -> Result<Value, String> {
    let mut text = raw.trim();
    if let Some(rest) = text.strip_prefix("```") {
        let rest = rest.strip_prefix("json").unwrap_or(rest);
        text = rest.trim_end().strip_suffix("```").unwrap_or(rest).trim();
    }
    let value: Value = serde_json::from_str(text).map_err(|e| format!("not valid JSON: {e}"))?;
    if !value.is_object() {
        return Err("payload is not a JSON object".into());
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn req(prompt: &str) -> CompletionRequest {
        CompletionRequest::new("generate.v1", prompt, schema::MCQ_V1)
    }

    const VALID: &str = r#"{"stem": "What is AI?", "key": "A tool", "distractors": ["A fish", "A rock", "A song"]}"#;

    fn fast(g: Gateway) -> Gateway {
        g.with_retry_policy(RetryPolicy { transport_attempts: 3, base_delay: Duration::from_millis(1) })
    }

    #[test]
    fn fingerprint_contract() {
        let a = req("hello");
        assert_eq!(fingerprint(&a), fingerprint(&a.clone()));
        assert_eq!(fingerprint(&a), fingerprint(&a.clone().with_temperature(0.0)));
        assert_ne!(fingerprint(&a), fingerprint(&req("hellp")));
        assert_ne!(fingerprint(&a), fingerprint(&a.clone().with_model("other")));
        // field boundaries are unambiguous
        let mut b = a.clone();
        b.prompt_id = "generate.v".into();
        b.schema_id = format!("1{}", a.schema_id);
        assert_ne!(fingerprint(&a), fingerprint(&b));
        assert_eq!(fingerprint(&a).len(), 64);
    }

    #[test]
    fn one_character_edits_never_collide() {
        let base = "Write one question about how machine learning models use training data.";
        let mut seen = std::collections::HashSet::new();
        seen.insert(fingerprint(&req(base)));
        for (i, _) in base.char_indices() {
            for replacement in ['x', ' ', 'Q'] {
                let mut edited: Vec<char> = base.chars().collect();
                if edited[i] == replacement {
                    continue;
                }
                edited[i] = replacement;
                let edited: String = edited.into_iter().collect();
                assert!(seen.insert(fingerprint(&req(&edited))), "collision at {i}");
            }
        }
    }

    #[test]
    fn replay_hit_and_miss() {
        let r = req("p");
        let mut t = Transcript::new();
        t.insert(TranscriptEntry {
            fingerprint: fingerprint(&r),
            prompt_id: None,
            response: serde_json::from_str(VALID).unwrap(),
        });
        let g = Gateway::replay(t);
        let c = g.complete_structured(&r).unwrap();
        assert!(c.replayed);
        assert_eq!(c.attempts, 0);
        assert_eq!(c.payload["key"], json!("A tool"));

        match g.complete_structured(&req("q")) {
            Err(GatewayError::ReplayMiss { prompt_id, .. }) => assert_eq!(prompt_id, "generate.v1"),
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(g.calls_for("generate.v1"), 2);
    }

    #[test]
    fn live_repairs_malformed_output() {
        let provider = Arc::new(ScriptedProvider::new(["Sure! here is your question", VALID]));
        let g = Gateway::live(provider.clone());
        let c = g.complete_structured(&req("p")).unwrap();
        assert_eq!(c.attempts, 2);
        let prompts = provider.prompts();
        assert_eq!(prompts[0], "p");
        assert!(prompts[1].to_lowercase().contains("return only valid structured output"));
    }

    #[test]
    fn live_gives_up_after_max_attempts() {
        let provider = Arc::new(ScriptedProvider::new(["{}", "[]", "nope"]));
        let g = Gateway::live(provider.clone());
        match g.complete_structured(&req("p").with_max_attempts(3)) {
            Err(GatewayError::SchemaViolation { attempts, last_raw, .. }) => {
                assert_eq!(attempts, 3);
                assert_eq!(last_raw, "nope");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(provider.call_count(), 3);
    }

    #[test]
    fn semantic_validator_triggers_repair() {
        let provider = Arc::new(ScriptedProvider::new([VALID, VALID]));
        let g = Gateway::live(provider.clone());
        let seen = Mutex::new(0);
        let validate = |_: &Value| {
            let mut n = seen.lock().unwrap();
            *n += 1;
            if *n == 1 { Err("duplicate options".to_string()) } else { Ok(()) }
        };
        let c = g.complete_validated(&req("p"), &validate).unwrap();
        assert_eq!(c.attempts, 2);
    }

    #[test]
    fn transport_errors_back_off_then_fail() {
        let provider = Arc::new(ScriptedProvider::with_results([
            Err(ProviderError::Transport("reset".into())),
            Ok(VALID.to_string()),
        ]));
        let g = fast(Gateway::live(provider.clone()));
        assert_eq!(g.complete_structured(&req("p")).unwrap().attempts, 1);

        let down = Arc::new(ScriptedProvider::with_results(
            (0..5).map(|_| Err(ProviderError::Transport("down".into()))),
        ));
        let g = fast(Gateway::live(down.clone()));
        assert!(matches!(
            g.complete_structured(&req("p")),
            Err(GatewayError::ProviderUnreachable { attempts: 3, .. })
        ));
        assert_eq!(down.call_count(), 3);

        let rejected = Arc::new(ScriptedProvider::with_results([Err(ProviderError::Rejected("401".into()))]));
        let g = fast(Gateway::live(rejected));
        assert!(matches!(g.complete_structured(&req("p")), Err(GatewayError::ProviderRejected(_))));
    }

    #[test]
    fn record_appends_then_serves_from_transcript() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.jsonl");
        let provider = Arc::new(ScriptedProvider::new([VALID]));
        let g = Gateway::record_to_file(provider.clone(), &path).unwrap();
        g.complete_structured(&req("p")).unwrap();
        let again = g.complete_structured(&req("p")).unwrap();
        assert!(again.replayed);
        assert_eq!(provider.call_count(), 1);

        let loaded = Transcript::load(&path).unwrap();
        assert_eq!(loaded.len(), 1);
        let replay = Gateway::replay(loaded);
        assert_eq!(replay.complete_structured(&req("p")).unwrap().payload, again.payload);
    }

    #[test]
    fn request_preconditions() {
        let g = Gateway::replay(Transcript::new());
        assert!(matches!(g.complete_structured(&req("  ")), Err(GatewayError::InvalidRequest(_))));
        assert!(matches!(
            g.complete_structured(&req("p").with_max_attempts(0)),
            Err(GatewayError::InvalidRequest(_))
        ));
        let mut odd = req("p");
        odd.schema_id = "nope".into();
        assert!(matches!(g.complete_structured(&odd), Err(GatewayError::UnknownSchema(_))));
    }

    #[test]
    fn code_fences_are_tolerated() {
        let v = parse_payload("```json\n{\"a\": 1}\n```").unwrap();
        assert_eq!(v, json!({"a": 1}));
        assert!(parse_payload("[1]").is_err());
    }

    #[test]
    fn concurrent_replay_is_safe() {
        let mut t = Transcript::new();
        let requests: Vec<CompletionRequest> = (0..16).map(|i| req(&format!("p{i}"))).collect();
        for r in &requests {
            t.insert(TranscriptEntry {
                fingerprint: fingerprint(r),
                prompt_id: None,
                response: serde_json::from_str(VALID).unwrap(),
            });
        }
        let g = Gateway::replay(t);
        std::thread::scope(|s| {
            for r in &requests {
                let g = &g;
                s.spawn(move || g.complete_structured(r).unwrap());
            }
        });
        assert_eq!(g.total_calls(), 16);
    }
}
