//! OpenAI-compatible chat-completions backend.

use std::time::Duration;

use serde_json::{json, Value};

use super::provider::{CompletionProvider, ProviderError};
use super::CompletionRequest;

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_API_KEY_ENV: &str = "OPENAI_API_KEY";

const SYSTEM_MESSAGE: &str =
    "You are a careful assessment author. Reply with a single JSON object and nothing else.";

pub struct OpenAiCompatibleProvider {
    endpoint: String,
    api_key: String,
    agent: ureq::Agent,
}

impl OpenAiCompatibleProvider {
    pub fn new(endpoint: impl Into<String>, api_key: impl Into<String>) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            api_key: api_key.into(),
            agent,
        }
    }

    /// Reads the API key from `env_var`. Credentials never come from files.
    pub fn from_env(endpoint: impl Into<String>, env_var: &str) -> Result<Self, ProviderError> {
        let key = std::env::var(env_var)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| ProviderError::Rejected(format!("environment variable {env_var} is not set")))?;
        Ok(Self::new(endpoint, key))
    }

    fn body(request: &CompletionRequest, prompt: &str) -> Value {
        json!({
            "model": request.model,
            "temperature": request.temperature,
            "response_format": {"type": "json_object"},
            "messages": [
                {"role": "system", "content": SYSTEM_MESSAGE},
                {"role": "user", "content": prompt},
            ],
        })
    }
}

impl CompletionProvider for OpenAiCompatibleProvider {
    fn name(&self) -> &str {
        "openai-compatible"
    }

    fn complete(&self, request: &CompletionRequest, prompt: &str) -> Result<String, ProviderError> {
        let response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(Self::body(request, prompt));
        let mut response = match response {
            Ok(r) => r,
            Err(ureq::Error::StatusCode(code)) if code == 429 || code >= 500 => {
                return Err(ProviderError::Transport(format!("HTTP {code}")))
            }
            Err(ureq::Error::StatusCode(code)) => {
                return Err(ProviderError::Rejected(format!("HTTP {code}")))
            }
            Err(e) => return Err(ProviderError::Transport(e.to_string())),
        };
        let body: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Transport(format!("unreadable response body: {e}")))?;
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ProviderError::Rejected("response has no choices[0].message.content".into()))
    }
}
