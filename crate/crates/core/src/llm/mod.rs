//! Chat-completion gateway: provider abstraction, temperature policy,
//! per-role accounting and exchange recording.

mod cassette;

use alloc::boxed::Box;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

pub use cassette::{Cassette, CassetteEntry, CassetteError, ReplayProvider};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleTag {
    Curriculum,
    Codegen,
    Verifier,
    QaAsk,
    QaAnswer,
    Describe,
    Decompose,
}

impl RoleTag {
    pub const ALL: [RoleTag; 7] = [
        RoleTag::Curriculum,
        RoleTag::Codegen,
        RoleTag::Verifier,
        RoleTag::QaAsk,
        RoleTag::QaAnswer,
        RoleTag::Describe,
        RoleTag::Decompose,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RoleTag::Curriculum => "curriculum",
            RoleTag::Codegen => "codegen",
            RoleTag::Verifier => "verifier",
            RoleTag::QaAsk => "qa_ask",
            RoleTag::QaAnswer => "qa_answer",
            RoleTag::Describe => "describe",
            RoleTag::Decompose => "decompose",
        }
    }

    pub fn parse(s: &str) -> Option<RoleTag> {
        RoleTag::ALL.iter().copied().find(|r| r.name() == s)
    }

    /// Task proposal samples at 0.1 for diversity; every other role is greedy.
    pub fn policy_temperature(self) -> f64 {
        match self {
            RoleTag::Curriculum => 0.1,
            _ => 0.0,
        }
    }
}

impl fmt::Display for RoleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub role_tag: RoleTag,
    pub system_prompt: String,
    pub user_prompt: String,
    pub temperature: f64,
}

impl ChatRequest {
    /// A request at the role's policy temperature.
    pub fn new(role_tag: RoleTag, system_prompt: impl Into<String>, user_prompt: impl Into<String>) -> Self {
        ChatRequest {
            role_tag,
            system_prompt: system_prompt.into(),
            user_prompt: user_prompt.into(),
            temperature: role_tag.policy_temperature(),
        }
    }

    /// Stable digest of role, prompts and temperature; used to match cassettes.
    pub fn digest(&self) -> String {
        let mut buf = Vec::new();
        for part in [
            self.role_tag.name(),
            &self.system_prompt,
            &self.user_prompt,
            &format!("{:?}", self.temperature),
        ] {
            buf.extend_from_slice(&(part.len() as u64).to_le_bytes());
            buf.extend_from_slice(part.as_bytes());
        }
        crate::sha256_hex(&buf)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl TokenUsage {
    /// Whitespace word counts, for providers that report no usage.
    pub fn estimate(req: &ChatRequest, completion: &str) -> Self {
        TokenUsage {
            prompt_tokens: (req.system_prompt.split_whitespace().count()
                + req.user_prompt.split_whitespace().count()) as u64,
            completion_tokens: completion.split_whitespace().count() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub text: String,
    pub usage: TokenUsage,
    pub provider_id: String,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GatewayError {
    #[error("temperature {temperature} violates the policy for role {role} (expected {expected})")]
    TemperaturePolicy {
        role: RoleTag,
        temperature: f64,
        expected: f64,
    },
    #[error("provider error{}: {message}", status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Provider { status: Option<u16>, message: String },
    #[error("provider failed after {attempts} attempts{}: {message}", last_status.map(|s| format!(" (last status {s})")).unwrap_or_default())]
    Exhausted {
        attempts: u32,
        last_status: Option<u16>,
        message: String,
    },
    #[error("replay miss: expected digest {}, request digest {actual}", expected.as_deref().unwrap_or("<end of cassette>"))]
    ReplayMiss {
        expected: Option<String>,
        actual: String,
    },
    #[error("no scripted response for role {0}")]
    NoScriptedResponse(RoleTag),
    #[error("interrupted: {0}")]
    Interrupted(String),
}

pub trait ChatProvider {
    fn id(&self) -> &str;
    fn complete(&mut self, model: &str, req: &ChatRequest) -> Result<ChatResponse, GatewayError>;
}

impl<P: ChatProvider + ?Sized> ChatProvider for Box<P> {
    fn id(&self) -> &str {
        (**self).id()
    }
    fn complete(&mut self, model: &str, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        (**self).complete(model, req)
    }
}

/// Which model serves each role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelMap {
    pub curriculum: String,
    pub codegen: String,
    pub verifier: String,
    pub qa: String,
    pub describe: String,
    pub decompose: String,
}

impl Default for ModelMap {
    fn default() -> Self {
        let big = "gpt-4-0314".to_string();
        let small = "gpt-3.5-turbo-0301".to_string();
        ModelMap {
            curriculum: big.clone(),
            codegen: big.clone(),
            verifier: big.clone(),
            qa: small.clone(),
            describe: small,
            decompose: big,
        }
    }
}

impl ModelMap {
    pub fn model_for(&self, role: RoleTag) -> &str {
        match role {
            RoleTag::Curriculum => &self.curriculum,
            RoleTag::Codegen => &self.codegen,
            RoleTag::Verifier => &self.verifier,
            RoleTag::QaAsk | RoleTag::QaAnswer => &self.qa,
            RoleTag::Describe => &self.describe,
            RoleTag::Decompose => &self.decompose,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleUsage {
    pub calls: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Per-role cumulative usage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsageReport {
    pub roles: BTreeMap<RoleTag, RoleUsage>,
}

impl UsageReport {
    pub fn role(&self, role: RoleTag) -> RoleUsage {
        self.roles.get(&role).copied().unwrap_or_default()
    }

    pub fn total_calls(&self) -> u64 {
        self.roles.values().map(|u| u.calls).sum()
    }
}

pub struct Gateway {
    provider: Box<dyn ChatProvider>,
    models: ModelMap,
    /// Per-role temperatures replacing the policy (ablations only).
    temperature_overrides: BTreeMap<RoleTag, f64>,
    usage: UsageReport,
    transcript: Vec<CassetteEntry>,
    requests: Vec<ChatRequest>,
}

impl Gateway {
    pub fn new(provider: Box<dyn ChatProvider>) -> Self {
        Gateway {
            provider,
            models: ModelMap::default(),
            temperature_overrides: BTreeMap::new(),
            usage: UsageReport::default(),
            transcript: Vec::new(),
            requests: Vec::new(),
        }
    }

    pub fn with_models(mut self, models: ModelMap) -> Self {
        self.models = models;
        self
    }

    pub fn override_temperature(&mut self, role: RoleTag, temperature: f64) {
        self.temperature_overrides.insert(role, temperature);
    }

    pub fn models(&self) -> &ModelMap {
        &self.models
    }

    pub fn models_mut(&mut self) -> &mut ModelMap {
        &mut self.models
    }

    pub fn expected_temperature(&self, role: RoleTag) -> f64 {
        self.temperature_overrides
            .get(&role)
            .copied()
            .unwrap_or(role.policy_temperature())
    }

    /// Builds a request at the temperature this gateway expects for `role`.
    pub fn request(&self, role: RoleTag, system: impl Into<String>, user: impl Into<String>) -> ChatRequest {
        let mut req = ChatRequest::new(role, system, user);
        req.temperature = self.expected_temperature(role);
        req
    }

    pub fn chat(&mut self, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let expected = self.expected_temperature(req.role_tag);
        if req.temperature != expected {
            return Err(GatewayError::TemperaturePolicy {
                role: req.role_tag,
                temperature: req.temperature,
                expected,
            });
        }
        let model = self.models.model_for(req.role_tag).to_string();
        let resp = self.provider.complete(&model, req)?;
        let entry = self.usage.roles.entry(req.role_tag).or_default();
        entry.calls += 1;
        entry.prompt_tokens += resp.usage.prompt_tokens;
        entry.completion_tokens += resp.usage.completion_tokens;
        self.transcript.push(CassetteEntry {
            digest: req.digest(),
            role_tag: req.role_tag,
            temperature: req.temperature,
            text: resp.text.clone(),
            usage: resp.usage,
        });
        self.requests.push(req.clone());
        Ok(resp)
    }

    pub fn account(&self) -> &UsageReport {
        &self.usage
    }

    /// Every exchange so far, in dispatch order.
    pub fn transcript(&self) -> &[CassetteEntry] {
        &self.transcript
    }

    /// Every answered request, parallel to [`Gateway::transcript`].
    pub fn requests(&self) -> &[ChatRequest] {
        &self.requests
    }

    pub fn cassette(&self) -> Cassette {
        Cassette {
            entries: self.transcript.clone(),
        }
    }
}

/// Delay before retry `attempt` (1-based): `base * 2^(attempt-1)`, capped.
pub fn backoff_delay_ms(attempt: u32, base_ms: u64, max_ms: u64) -> u64 {
    let shift = attempt.saturating_sub(1).min(32);
    base_ms.saturating_mul(1u64 << shift).min(max_ms)
}

/// Canned responses queued per role.
#[derive(Debug, Clone, Default)]
pub struct ScriptedProvider {
    queues: BTreeMap<RoleTag, VecDeque<String>>,
    fallback: BTreeMap<RoleTag, String>,
}

impl ScriptedProvider {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, role: RoleTag, text: impl Into<String>) -> &mut Self {
        self.queues.entry(role).or_default().push_back(text.into());
        self
    }

    /// Response used whenever the role's queue is empty.
    pub fn always(&mut self, role: RoleTag, text: impl Into<String>) -> &mut Self {
        self.fallback.insert(role, text.into());
        self
    }
}

impl ChatProvider for ScriptedProvider {
    fn id(&self) -> &str {
        "scripted"
    }

    fn complete(&mut self, _model: &str, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let text = self
            .queues
            .get_mut(&req.role_tag)
            .and_then(|q| q.pop_front())
            .or_else(|| self.fallback.get(&req.role_tag).cloned())
            .ok_or(GatewayError::NoScriptedResponse(req.role_tag))?;
        Ok(ChatResponse {
            usage: TokenUsage::estimate(req, &text),
            text,
            provider_id: "scripted".into(),
            latency_ms: 0,
        })
    }
}

/// Adapts a closure into a provider.
pub struct FnProvider<F> {
    id: String,
    f: F,
}

impl<F> FnProvider<F>
where
    F: FnMut(&ChatRequest) -> Result<String, GatewayError>,
{
    pub fn new(id: &str, f: F) -> Self {
        FnProvider { id: id.to_string(), f }
    }
}

impl<F> ChatProvider for FnProvider<F>
where
    F: FnMut(&ChatRequest) -> Result<String, GatewayError>,
{
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&mut self, _model: &str, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let text = (self.f)(req)?;
        Ok(ChatResponse {
            usage: TokenUsage::estimate(req, &text),
            text,
            provider_id: self.id.clone(),
            latency_ms: 0,
        })
    }
}
