//! HTTP providers speaking the common chat-completions and embeddings wire
//! shapes.

use std::time::{Duration, Instant};

use serde::Deserialize;
use serde_json::json;
use voyager_core::embedding::{EmbedError, Embedder, EmbeddingVector};
use voyager_core::llm::{
    backoff_delay_ms, ChatProvider, ChatRequest, ChatResponse, GatewayError, TokenUsage,
};

use crate::config::LlmConfig;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub base_ms: u64,
    pub max_ms: u64,
}

impl RetryPolicy {
    pub fn from_config(c: &LlmConfig) -> Self {
        RetryPolicy {
            max_attempts: c.max_attempts.max(1),
            base_ms: c.backoff_base_ms,
            max_ms: c.backoff_max_ms,
        }
    }
}

/// One failed attempt: the status (if any) and whether trying again may help.
#[derive(Debug)]
struct AttemptError {
    status: Option<u16>,
    message: String,
    transient: bool,
}

fn classify(e: ureq::Error) -> AttemptError {
    match e {
        ureq::Error::StatusCode(code) => AttemptError {
            status: Some(code),
            message: format!("HTTP {code}"),
            transient: code == 408 || code == 429 || code >= 500,
        },
        e @ (ureq::Error::Io(_)
        | ureq::Error::Timeout(_)
        | ureq::Error::HostNotFound
        | ureq::Error::ConnectionFailed) => AttemptError {
            status: None,
            message: e.to_string(),
            transient: true,
        },
        e => AttemptError {
            status: None,
            message: e.to_string(),
            transient: false,
        },
    }
}

/// Calls `attempt` until it succeeds, fails permanently or the policy runs
/// out, sleeping the backoff schedule in between.
fn with_retries<T>(
    policy: &RetryPolicy,
    sleep: &dyn Fn(u64),
    mut attempt: impl FnMut() -> Result<T, AttemptError>,
) -> Result<T, GatewayError> {
    let mut last: Option<AttemptError> = None;
    for n in 1..=policy.max_attempts {
        match attempt() {
            Ok(v) => return Ok(v),
            Err(e) if !e.transient => {
                return Err(GatewayError::Provider {
                    status: e.status,
                    message: e.message,
                })
            }
            Err(e) => {
                log::warn!("attempt {n}/{} failed: {}", policy.max_attempts, e.message);
                last = Some(e);
                if n < policy.max_attempts {
                    sleep(backoff_delay_ms(n, policy.base_ms, policy.max_ms));
                }
            }
        }
    }
    let last = last.expect("at least one attempt");
    Err(GatewayError::Exhausted {
        attempts: policy.max_attempts,
        last_status: last.status,
        message: last.message,
    })
}

fn default_sleep(ms: u64) {
    std::thread::sleep(Duration::from_millis(ms));
}

fn agent(timeout_secs: u64) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(timeout_secs.max(1))))
        .build()
        .into()
}

#[derive(Deserialize)]
struct ChatWire {
    choices: Vec<ChoiceWire>,
    #[serde(default)]
    usage: Option<UsageWire>,
}

#[derive(Deserialize)]
struct ChoiceWire {
    message: MessageWire,
}

#[derive(Deserialize)]
struct MessageWire {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct UsageWire {
    prompt_tokens: u64,
    completion_tokens: u64,
}

pub struct LiveChatProvider {
    agent: ureq::Agent,
    base_url: String,
    token: Option<String>,
    policy: RetryPolicy,
    sleep: Box<dyn Fn(u64) + Send>,
}

impl LiveChatProvider {
    /// Reads the token from the configured environment variable; a missing
    /// token is allowed for local endpoints.
    pub fn from_config(c: &LlmConfig) -> Self {
        LiveChatProvider {
            agent: agent(c.timeout_secs),
            base_url: c.base_url.trim_end_matches('/').to_string(),
            token: std::env::var(&c.api_key_env).ok().filter(|t| !t.is_empty()),
            policy: RetryPolicy::from_config(c),
            sleep: Box::new(default_sleep),
        }
    }

    /// Replaces the sleep between retries (tests record delays instead).
    pub fn with_sleep(mut self, sleep: impl Fn(u64) + Send + 'static) -> Self {
        self.sleep = Box::new(sleep);
        self
    }

    fn post(&self, body: &serde_json::Value) -> Result<ChatWire, AttemptError> {
        let mut req = self.agent.post(format!("{}/chat/completions", self.base_url));
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = req.send_json(body).map_err(classify)?;
        resp.body_mut().read_json::<ChatWire>().map_err(|e| AttemptError {
            status: None,
            message: format!("malformed response: {e}"),
            transient: false,
        })
    }
}

impl ChatProvider for LiveChatProvider {
    fn id(&self) -> &str {
        "live"
    }

    fn complete(&mut self, model: &str, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let body = json!({
            "model": model,
            "temperature": req.temperature,
            "messages": [
                {"role": "system", "content": req.system_prompt},
                {"role": "user", "content": req.user_prompt},
            ],
        });
        let started = Instant::now();
        let wire = with_retries(&self.policy, &*self.sleep, || self.post(&body))?;
        let text = wire
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .ok_or_else(|| GatewayError::Provider {
                status: None,
                message: "response has no message content".into(),
            })?;
        let usage = match wire.usage {
            Some(u) => TokenUsage {
                prompt_tokens: u.prompt_tokens,
                completion_tokens: u.completion_tokens,
            },
            None => TokenUsage::estimate(req, &text),
        };
        Ok(ChatResponse {
            text,
            usage,
            provider_id: "live".into(),
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}

#[derive(Deserialize)]
struct EmbedWire {
    data: Vec<EmbedDatum>,
}

#[derive(Deserialize)]
struct EmbedDatum {
    embedding: Vec<f64>,
}

pub struct LiveEmbedder {
    agent: ureq::Agent,
    base_url: String,
    token: Option<String>,
    model: String,
    dimension: usize,
    id: String,
    policy: RetryPolicy,
}

impl LiveEmbedder {
    pub fn new(c: &LlmConfig, model: &str, dimension: usize) -> Self {
        LiveEmbedder {
            agent: agent(c.timeout_secs),
            base_url: c.base_url.trim_end_matches('/').to_string(),
            token: std::env::var(&c.api_key_env).ok().filter(|t| !t.is_empty()),
            model: model.to_string(),
            dimension,
            id: format!("live:{model}"),
            policy: RetryPolicy::from_config(c),
        }
    }
}

impl Embedder for LiveEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let body = json!({"model": self.model, "input": text});
        let wire = with_retries(&self.policy, &default_sleep, || {
            let mut req = self.agent.post(format!("{}/embeddings", self.base_url));
            if let Some(t) = &self.token {
                req = req.header("Authorization", format!("Bearer {t}"));
            }
            let mut resp = req.send_json(&body).map_err(classify)?;
            resp.body_mut().read_json::<EmbedWire>().map_err(|e| AttemptError {
                status: None,
                message: format!("malformed response: {e}"),
                transient: false,
            })
        })
        .map_err(|e| EmbedError::Provider(e.to_string()))?;
        let v = wire
            .data
            .into_iter()
            .next()
            .ok_or_else(|| EmbedError::Provider("response has no embedding".into()))?
            .embedding;
        if v.len() != self.dimension {
            return Err(EmbedError::Provider(format!(
                "expected {} dimensions, got {}",
                self.dimension,
                v.len()
            )));
        }
        EmbeddingVector::normalized(v)
    }
}
