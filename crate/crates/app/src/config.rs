//! Run configuration: built-in defaults, then an optional TOML file, then
//! command-line overrides.
//!
//! ```toml
//! model = "gpt-4o-mini-2024-07-18"
//! mode = "replay"
//! transcript = "fixtures/replay/transcript.jsonl"
//! max_revisions = 3
//! ```
//!
//! The API key is read from the environment variable named by `api_key_env`.
//! A config file that tries to carry a credential is rejected.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use mcq_core::gateway::{
    Gateway, GatewayError, OpenAiCompatibleProvider, ProviderError, Transcript, TranscriptError,
    DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT, DEFAULT_MODEL,
};
use mcq_core::iwf::DEFAULT_MAX_FLAWS;
use mcq_core::mcq::DEFAULT_OPTION_COUNT;
use mcq_core::supervisor::{SupervisorConfig, DEFAULT_MAX_REVISIONS, DEFAULT_SEED, DEFAULT_WORKERS};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_PORT: u16 = 8080;

/// Keys that look like credentials. None of them may appear in a config file.
const CREDENTIAL_KEYS: [&str; 5] = ["api_key", "apikey", "token", "secret", "password"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("config {path} contains `{key}`: credentials are only read from the environment (set {env_var})")]
    CredentialInFile { path: PathBuf, key: String, env_var: String },
    #[error("unknown mode `{0}` (expected live, record or replay)")]
    UnknownMode(String),
    #[error("{0} mode needs a transcript path (--transcript, --replay or --record)")]
    TranscriptRequired(RunMode),
    #[error("transcript {0} does not exist")]
    TranscriptMissing(PathBuf),
    #[error("{field} must be at least {min}, got {value}")]
    TooSmall { field: &'static str, min: usize, value: usize },
    #[error("cannot load transcript: {0}")]
    Transcript(#[from] TranscriptError),
    #[error("cannot open transcript for recording: {0}")]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Provider(#[from] ProviderError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// Call the provider; nothing is written.
    Live,
    /// Serve known requests from the transcript, call the provider for the
    /// rest and append them.
    Record,
    /// Serve only from the transcript; a miss is an error.
    #[default]
    Replay,
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunMode::Live => "live",
            RunMode::Record => "record",
            RunMode::Replay => "replay",
        })
    }
}

impl FromStr for RunMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "live" => Ok(RunMode::Live),
            "record" => Ok(RunMode::Record),
            "replay" => Ok(RunMode::Replay),
            _ => Err(ConfigError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub model: String,
    pub mode: RunMode,
    pub transcript: Option<PathBuf>,
    pub max_revisions: u32,
    pub max_flaws: usize,
    pub option_count: usize,
    pub workers: usize,
    pub seed: u64,
    pub port: u16,
    /// Chat-completions URL of an OpenAI-compatible server.
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    /// Ask the model for language reviews and flaw probes inside the loop.
    pub llm_critics: bool,
}

impl Default for AppConfig {
    fn default() -> Self {
        Self {
            model: DEFAULT_MODEL.to_string(),
            mode: RunMode::default(),
            transcript: None,
            max_revisions: DEFAULT_MAX_REVISIONS,
            max_flaws: DEFAULT_MAX_FLAWS,
            option_count: DEFAULT_OPTION_COUNT,
            workers: DEFAULT_WORKERS,
            seed: DEFAULT_SEED,
            port: DEFAULT_PORT,
            endpoint: DEFAULT_ENDPOINT.to_string(),
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            llm_critics: false,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<String>,
    pub mode: Option<RunMode>,
    pub transcript: Option<PathBuf>,
    pub max_revisions: Option<u32>,
    pub max_flaws: Option<usize>,
    pub option_count: Option<usize>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub port: Option<u16>,
    pub endpoint: Option<String>,
    pub llm_critics: Option<bool>,
}

impl AppConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        let defaults = AppConfig::default();
        let env_var = table
            .get("api_key_env")
            .and_then(|v| v.as_str())
            .unwrap_or(&defaults.api_key_env)
            .to_string();
        if let Some(key) = table.keys().find(|k| is_credential_key(k)) {
            return Err(ConfigError::CredentialInFile { path: path.to_path_buf(), key: key.clone(), env_var });
        }
        let config: AppConfig = table.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.message().to_string(),
        })?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::from_toml(&text, path)
    }

    /// Defaults, or the file when one is given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self, ConfigError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.model {
            self.model = v.clone();
        }
        if let Some(v) = o.mode {
            self.mode = v;
        }
        if let Some(v) = &o.transcript {
            self.transcript = Some(v.clone());
        }
        if let Some(v) = o.max_revisions {
            self.max_revisions = v;
        }
        if let Some(v) = o.max_flaws {
            self.max_flaws = v;
        }
        if let Some(v) = o.option_count {
            self.option_count = v;
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.port {
            self.port = v;
        }
        if let Some(v) = &o.endpoint {
            self.endpoint = v.clone();
        }
        if let Some(v) = o.llm_critics {
            self.llm_critics = v;
        }
    }

    /// Checks everything that can be checked before any work starts,
    /// including that a replay transcript exists.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.option_count < 3 {
            return Err(ConfigError::TooSmall { field: "option_count", min: 3, value: self.option_count });
        }
        if self.workers < 1 {
            return Err(ConfigError::TooSmall { field: "workers", min: 1, value: self.workers });
        }
        match (self.mode, &self.transcript) {
            (RunMode::Live, _) => Ok(()),
            (mode, None) => Err(ConfigError::TranscriptRequired(mode)),
            (RunMode::Replay, Some(path)) if !path.is_file() => Err(ConfigError::TranscriptMissing(path.clone())),
            _ => Ok(()),
        }
    }

    pub fn supervisor_config(&self) -> SupervisorConfig {
        let mut config = SupervisorConfig {
            max_revisions: self.max_revisions,
            max_flaws: self.max_flaws,
            seed: self.seed,
            workers: self.workers,
            critic_model: self.model.clone(),
            llm_language_review: self.llm_critics,
            llm_iwf_probe: self.llm_critics,
            ..SupervisorConfig::default()
        };
        config.generator.model = self.model.clone();
        config
    }

    /// Validates, then opens the gateway for the configured mode. Live and
    /// record modes need the API key in the environment.
    pub fn build_gateway(&self) -> Result<Gateway, ConfigError> {
        self.validate()?;
        let provider = || -> Result<Arc<OpenAiCompatibleProvider>, ConfigError> {
            Ok(Arc::new(OpenAiCompatibleProvider::from_env(self.endpoint.clone(), &self.api_key_env)?))
        };
        match (self.mode, &self.transcript) {
            (RunMode::Replay, Some(path)) => Ok(Gateway::replay(Transcript::load(path)?)),
            (RunMode::Record, Some(path)) => Ok(Gateway::record_to_file(provider()?, path)?),
            (RunMode::Live, _) => Ok(Gateway::live(provider()?)),
            (mode, None) => Err(ConfigError::TranscriptRequired(mode)),
        }
    }
}

fn is_credential_key(key: &str) -> bool {
    let k = key.to_ascii_lowercase();
    k != "api_key_env" && CREDENTIAL_KEYS.iter().any(|c| k.contains(c))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<AppConfig, ConfigError> {
        AppConfig::from_toml(text, Path::new("mcqgen.toml"))
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c, AppConfig::default());
        assert_eq!(c.model, "gpt-4o-mini-2024-07-18");
        assert_eq!((c.max_revisions, c.max_flaws, c.option_count, c.seed), (3, 1, 4, 42));
    }

    #[test]
    fn file_then_flags() {
        let mut c = parse("mode = \"live\"\nseed = 7\nworkers = 2\n").unwrap();
        assert_eq!((c.mode, c.seed, c.workers), (RunMode::Live, 7, 2));
        c.apply(&Overrides { seed: Some(9), ..Overrides::default() });
        assert_eq!((c.seed, c.workers), (9, 2));
    }

    #[test]
    fn credentials_in_file_are_rejected() {
        for text in ["api_key = \"sk-123\"", "openai_api_key = \"x\"", "Token = \"x\""] {
            let err = parse(text).unwrap_err();
            assert!(matches!(err, ConfigError::CredentialInFile { .. }), "{text}: {err}");
            assert!(err.to_string().contains("OPENAI_API_KEY"));
        }
        assert_eq!(parse("api_key_env = \"MY_KEY\"").unwrap().api_key_env, "MY_KEY");
    }

    #[test]
    fn unknown_keys_are_errors() {
        let err = parse("max_revision = 2").unwrap_err();
        assert!(err.to_string().contains("max_revision"), "{err}");
    }

    #[test]
    fn replay_needs_an_existing_transcript() {
        let c = AppConfig::default();
        assert!(matches!(c.validate(), Err(ConfigError::TranscriptRequired(RunMode::Replay))));
        let c = AppConfig { transcript: Some("/nonexistent/t.jsonl".into()), ..AppConfig::default() };
        assert!(matches!(c.build_gateway(), Err(ConfigError::TranscriptMissing(_))));
        let c = AppConfig { mode: RunMode::Record, ..AppConfig::default() };
        assert!(matches!(c.validate(), Err(ConfigError::TranscriptRequired(RunMode::Record))));
    }

    #[test]
    fn option_count_floor() {
        let c = AppConfig { option_count: 2, mode: RunMode::Live, ..AppConfig::default() };
        assert!(matches!(c.validate(), Err(ConfigError::TooSmall { field: "option_count", .. })));
    }

    #[test]
    fn supervisor_config_carries_model_and_budget() {
        let c = AppConfig { model: "m".into(), max_revisions: 5, llm_critics: true, ..AppConfig::default() };
        let s = c.supervisor_config();
        assert_eq!((s.generator.model.as_str(), s.critic_model.as_str(), s.max_revisions), ("m", "m", 5));
        assert!(s.llm_language_review && s.llm_iwf_probe);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("Record".parse::<RunMode>().unwrap(), RunMode::Record);
        assert!("offline".parse::<RunMode>().is_err());
    }
}
