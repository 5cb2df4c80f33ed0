use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ChatProvider, ChatRequest, ChatResponse, GatewayError, RoleTag, TokenUsage};

/// One recorded exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CassetteEntry {
    pub digest: String,
    pub role_tag: RoleTag,
    pub temperature: f64,
    pub text: String,
    pub usage: TokenUsage,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("cassette line {line}: {message}")]
pub struct CassetteError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Cassette {
    pub entries: Vec<CassetteEntry>,
}

impl Cassette {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("cassette entries serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Cassette, CassetteError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let entry = serde_json::from_str(line).map_err(|e| CassetteError {
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push(entry);
        }
        Ok(Cassette { entries })
    }
}

/// Answers requests from a recorded cassette.
///
/// Strict mode requires requests to arrive in recorded order; relaxed mode
/// accepts any recorded digest, preferring entries not yet used.
#[derive(Debug, Clone)]
pub struct ReplayProvider {
    entries: Vec<CassetteEntry>,
    used: Vec<bool>,
    cursor: usize,
    strict: bool,
}

impl ReplayProvider {
    pub fn new(cassette: Cassette, strict: bool) -> Self {
        let n = cassette.entries.len();
        ReplayProvider {
            entries: cassette.entries,
            used: alloc::vec![false; n],
            cursor: 0,
            strict,
        }
    }

    pub fn remaining(&self) -> usize {
        self.used.iter().filter(|u| !**u).count()
    }
}

impl ChatProvider for ReplayProvider {
    fn id(&self) -> &str {
        "replay"
    }

    fn complete(&mut self, _model: &str, req: &ChatRequest) -> Result<ChatResponse, GatewayError> {
        let digest = req.digest();
        let idx = if self.strict {
            match self.entries.get(self.cursor) {
                Some(e) if e.digest == digest => self.cursor,
                other => {
                    return Err(GatewayError::ReplayMiss {
                        expected: other.map(|e| e.digest.clone()),
                        actual: digest,
                    })
                }
            }
        } else {
            let unused = (0..self.entries.len())
                .find(|&i| !self.used[i] && self.entries[i].digest == digest);
            let any = || self.entries.iter().position(|e| e.digest == digest);
            match unused.or_else(any) {
                Some(i) => i,
                None => {
                    return Err(GatewayError::ReplayMiss {
                        expected: self.entries.get(self.cursor).map(|e| e.digest.clone()),
                        actual: digest,
                    })
                }
            }
        };
        self.used[idx] = true;
        self.cursor = idx + 1;
        let e = &self.entries[idx];
        Ok(ChatResponse {
            text: e.text.clone(),
            usage: e.usage,
            provider_id: format!("replay:{}", e.role_tag),
            latency_ms: 0,
        })
    }
}
