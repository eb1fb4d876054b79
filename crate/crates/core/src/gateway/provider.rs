use std::collections::VecDeque;
use std::sync::Mutex;

use thiserror::Error;

use super::CompletionRequest;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProviderError {
    /// Network failure, timeout, rate limit or server error; retried with backoff.
    #[error("transport error: {0}")]
    Transport(String),
    /// The provider refused the request; not retried.
    #[error("request rejected: {0}")]
    Rejected(String),
}

/// A backend that turns a prompt into raw model text.
///
/// `prompt` is the text actually sent, which differs from
/// `request.rendered_prompt` when a repair instruction has been appended.
pub trait CompletionProvider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &CompletionRequest, prompt: &str) -> Result<String, ProviderError>;
}

/// Returns queued responses in order, recording every prompt it receives.
#[derive(Default)]
pub struct ScriptedProvider {
    responses: Mutex<VecDeque<Result<String, ProviderError>>>,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedProvider {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_results(responses.into_iter().map(|s| Ok(s.into())))
    }

    pub fn with_results(responses: impl IntoIterator<Item = Result<String, ProviderError>>) -> Self {
        Self {
            responses: Mutex::new(responses.into_iter().collect()),
            prompts: Mutex::new(Vec::new()),
        }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.prompts.lock().unwrap().len()
    }
}

impl CompletionProvider for ScriptedProvider {
    fn name(&self) -> &str {
        "scripted"
    }

    fn complete(&self, _request: &CompletionRequest, prompt: &str) -> Result<String, ProviderError> {
        self.prompts.lock().unwrap().push(prompt.to_string());
        self.responses
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Err(ProviderError::Transport("script exhausted".into())))
    }
}

/// Adapts a closure into a provider; handy for deterministic fakes that
/// answer based on the prompt.
pub struct FnProvider<F>(pub F);

impl<F> CompletionProvider for FnProvider<F>
where
    F: Fn(&CompletionRequest, &str) -> Result<String, ProviderError> + Send + Sync,
{
    fn name(&self) -> &str {
        "fn"
    }

    fn complete(&self, request: &CompletionRequest, prompt: &str) -> Result<String, ProviderError> {
        (self.0)(request, prompt)
    }
}
