//! Completion backends: an OpenAI-compatible chat-completions client.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

/// One prompt call. `cue`, `repetition` and `attempt` identify the call for
/// backends that need them (the synthetic agent seeds from them).
#[derive(Debug, Clone)]
pub struct CompletionRequest<'a> {
    pub model: &'a str,
    pub system_prompt: Option<&'a str>,
    pub prompt: &'a str,
    pub temperature: f64,
    pub max_tokens: u32,
    pub cue: &'a str,
    pub repetition: u32,
    pub attempt: u32,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    /// Worth retrying: timeouts, rate limits, server errors.
    #[error("transient: {0}")]
    Transient(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    /// Aborts the run: bad request, unknown model, and similar.
    #[error("{0}")]
    Fatal(String),
}

pub trait CompletionBackend: Send + Sync {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError>;

    /// Identity folded into the run's config hash.
    fn fingerprint(&self) -> String;
}

/// Client for `POST {base}/chat/completions`.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    url: String,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(endpoint: &str, api_key: Option<String>, timeout: Duration) -> Result<Self, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| BackendError::Fatal(format!("cannot build HTTP client: {e}")))?;
        Ok(Self { client, url: chat_completions_url(endpoint), api_key })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

/// Appends `/chat/completions` unless the endpoint already names it.
pub fn chat_completions_url(endpoint: &str) -> String {
    let trimmed = endpoint.trim_end_matches('/');
    if trimmed.ends_with("/chat/completions") {
        trimmed.to_string()
    } else {
        format!("{trimmed}/chat/completions")
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, request: &CompletionRequest<'_>) -> Result<String, BackendError> {
        let mut messages = Vec::new();
        if let Some(system) = request.system_prompt {
            messages.push(json!({ "role": "system", "content": system }));
        }
        messages.push(json!({ "role": "user", "content": request.prompt }));
        let body = json!({
            "model": request.model,
            "messages": messages,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        });

        let mut builder = self.client.post(&self.url).json(&body);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| BackendError::Transient(e.to_string()))?;
        let status = response.status();
        if status.is_success() {
            let parsed: ChatResponse =
                response.json().map_err(|e| BackendError::Transient(format!("malformed response body: {e}")))?;
            return parsed
                .choices
                .into_iter()
                .next()
                .and_then(|c| c.message.content)
                .ok_or_else(|| BackendError::Transient("response has no message content".into()));
        }
        let text = response.text().unwrap_or_default();
        let detail = format!("HTTP {}: {}", status.as_u16(), text.chars().take(200).collect::<String>());
        match status.as_u16() {
            401 | 403 => Err(BackendError::Auth(detail)),
            408 | 409 | 425 | 429 => Err(BackendError::Transient(detail)),
            s if s >= 500 => Err(BackendError::Transient(detail)),
            _ => Err(BackendError::Fatal(detail)),
        }
    }

    fn fingerprint(&self) -> String {
        format!("http:{}", self.url)
    }
}

/// Spaces request starts at least `interval` apart across all workers.
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Instant>,
}

impl RateLimiter {
    pub fn per_second(rps: f64) -> Self {
        Self { interval: Duration::from_secs_f64(1.0 / rps), next: Mutex::new(Instant::now()) }
    }

    pub fn acquire(&self) {
        let wait = {
            let mut next = self.next.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let start = (*next).max(now);
            *next = start + self.interval;
            start - now
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn url_building() {
        assert_eq!(chat_completions_url("http://h:8000/v1"), "http://h:8000/v1/chat/completions");
        assert_eq!(chat_completions_url("http://h/v1/"), "http://h/v1/chat/completions");
        assert_eq!(chat_completions_url("http://h/v1/chat/completions"), "http://h/v1/chat/completions");
    }

    #[test]
    fn rate_limiter_spaces_calls() {
        let limiter = RateLimiter::per_second(200.0);
        let start = Instant::now();
        for _ in 0..5 {
            limiter.acquire();
        }
        assert!(start.elapsed() >= Duration::from_millis(19));
    }
}
