//! Self-verification: a critic call that judges task success from the
//! post-execution state.

use alloc::format;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::llm::{Gateway, GatewayError, RoleTag};
use crate::prompts::{self, StateLine};
use crate::world::AgentState;

pub use crate::task::rule_check;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub success: bool,
    /// Empty exactly when `success`.
    pub critique: String,
    pub raw_reasoning: String,
}

pub const UNPARSEABLE_CRITIQUE: &str = "verifier unparseable";
const MISSING_CRITIQUE: &str = "The task is not complete yet.";
const FORMAT_REMINDER: &str = "\n\nYour previous response had no `Success: true` or `Success: false` line. Respond again using exactly the RESPONSE FORMAT.";

/// State lines the critic sees: everything except recently seen blocks and
/// nearby entities.
pub const VERIFIER_LINES: [StateLine; 9] = [
    StateLine::Biome,
    StateLine::Time,
    StateLine::NearbyBlocks,
    StateLine::Health,
    StateLine::Hunger,
    StateLine::Position,
    StateLine::Equipment,
    StateLine::Inventory,
    StateLine::Chests,
];

pub fn verifier_user_prompt(state: &AgentState, task: &str, context: &str) -> String {
    let context = if context.trim().is_empty() { "None" } else { context.trim() };
    format!(
        "{}\nTask: {task}\n\nContext: {context}\n",
        prompts::render_state(state, &VERIFIER_LINES)
    )
}

fn find_ci(haystack: &str, needle: &str) -> Option<usize> {
    haystack.to_ascii_lowercase().find(&needle.to_ascii_lowercase())
}

/// Parses `Reasoning:` / `Success:` / `Critique:` out of a verdict.
pub fn parse_verdict(text: &str) -> Option<VerificationResult> {
    let at = find_ci(text, "success:")?;
    let after = &text[at + "success:".len()..];
    let word: String = after
        .trim_start()
        .chars()
        .take_while(|c| c.is_ascii_alphabetic())
        .collect();
    let success = match word.to_ascii_lowercase().as_str() {
        "true" | "yes" => true,
        "false" | "no" => false,
        _ => return None,
    };
    let reasoning = text[..at].trim();
    let reasoning = match find_ci(reasoning, "reasoning:") {
        Some(r) => reasoning[r + "reasoning:".len()..].trim(),
        None => reasoning,
    };
    let critique = match find_ci(after, "critique:") {
        Some(c) => after[c + "critique:".len()..].trim().to_string(),
        None => String::new(),
    };
    let critique = if success {
        String::new()
    } else if critique.is_empty() {
        MISSING_CRITIQUE.to_string()
    } else {
        critique
    };
    Some(VerificationResult {
        success,
        critique,
        raw_reasoning: reasoning.to_string(),
    })
}

/// Asks the critic; one reprompt on a malformed verdict, then failure with
/// a fixed critique. The flag reports that fallback.
pub fn self_verify(
    state: &AgentState,
    task: &str,
    context: &str,
    gateway: &mut Gateway,
) -> Result<(VerificationResult, bool), GatewayError> {
    let user = verifier_user_prompt(state, task, context);
    let req = gateway.request(RoleTag::Verifier, prompts::VERIFIER, user.clone());
    let first = gateway.chat(&req)?.text;
    if let Some(v) = parse_verdict(&first) {
        return Ok((v, false));
    }
    let retry = gateway.request(
        RoleTag::Verifier,
        prompts::VERIFIER,
        format!("{user}{FORMAT_REMINDER}"),
    );
    let second = gateway.chat(&retry)?.text;
    Ok(match parse_verdict(&second) {
        Some(v) => (v, false),
        None => (
            VerificationResult {
                success: false,
                critique: UNPARSEABLE_CRITIQUE.into(),
                raw_reasoning: second,
            },
            true,
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_formats() {
        let v = parse_verdict("Reasoning: all good\nSuccess: true\nCritique:").unwrap();
        assert!(v.success && v.critique.is_empty());
        assert_eq!(v.raw_reasoning, "all good");
        let v = parse_verdict("Success: false. Critique: you need a furnace first").unwrap();
        assert!(!v.success);
        assert_eq!(v.critique, "you need a furnace first");
        let v = parse_verdict("Success: False").unwrap();
        assert!(!v.success && !v.critique.is_empty());
        assert!(parse_verdict("looks fine to me").is_none());
        assert!(parse_verdict("Success: maybe").is_none());
    }
}
