//! Tasks and their machine-checkable goals.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::registry::Registry;
use crate::world::AgentState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Proposer {
    Auto,
    Manual,
    Random,
    Human,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: u64,
    pub description: String,
    pub proposer: Proposer,
    pub attempts: u32,
}

impl Task {
    pub fn new(id: u64, description: impl Into<String>, proposer: Proposer) -> Self {
        Task {
            id,
            description: description.into(),
            proposer,
            attempts: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verb {
    Mine,
    Craft,
    Smelt,
    Obtain,
}

/// "Mine 3 wood log" as a verb, a count and the item key whose inventory
/// count measures success (an item name or `#tag`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskGoal {
    pub verb: Verb,
    pub count: u32,
    pub item: String,
}

fn normalize(phrase: &str) -> String {
    phrase
        .trim()
        .trim_end_matches('.')
        .to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
}

/// Resolves a noun phrase ("wood log", "iron ingots", "cobblestone") to an
/// item name or tag known to the registry.
pub fn resolve_item(registry: &Registry, phrase: &str) -> Option<String> {
    let norm = normalize(phrase);
    let items = registry.all_items();
    let mut candidates = alloc::vec![norm.clone()];
    if let Some(s) = norm.strip_suffix("es") {
        candidates.push(s.to_string());
    }
    if let Some(s) = norm.strip_suffix('s') {
        candidates.push(s.to_string());
    }
    for c in &candidates {
        if matches!(c.as_str(), "wood_log" | "wood" | "log" | "wooden_log") {
            return Some("#logs".into());
        }
        if c == "plank" || c == "wooden_plank" {
            return Some("#planks".into());
        }
        if items.contains(c) || registry.blocks.contains_key(c) {
            return Some(c.clone());
        }
    }
    None
}

impl TaskGoal {
    /// Parses "Mine/Craft/Smelt/Obtain N <item>". Returns `None` for anything
    /// that is not inventory-checkable.
    pub fn parse(registry: &Registry, description: &str) -> Option<TaskGoal> {
        let mut words = description.split_whitespace();
        let verb = match words.next()?.to_lowercase().as_str() {
            "mine" | "collect" | "chop" | "dig" => Verb::Mine,
            "craft" | "make" => Verb::Craft,
            "smelt" | "cook" => Verb::Smelt,
            "obtain" | "get" | "acquire" => Verb::Obtain,
            _ => return None,
        };
        let rest: Vec<&str> = words.collect();
        let (count, phrase) = match rest.first()?.parse::<u32>() {
            Ok(n) => (n, rest[1..].join(" ")),
            Err(_) if matches!(rest[0], "a" | "an" | "one") => (1, rest[1..].join(" ")),
            Err(_) => (1, rest.join(" ")),
        };
        if count == 0 || phrase.is_empty() {
            return None;
        }
        let key = resolve_item(registry, &phrase)?;
        let item = match verb {
            // mining a block yields its drop, e.g. iron_ore -> raw_iron
            Verb::Mine if !key.starts_with('#') => registry
                .blocks
                .get(&key)
                .and_then(|b| b.drop.clone())
                .unwrap_or(key),
            // smelting an input yields its output, e.g. raw iron -> iron_ingot
            Verb::Smelt => match registry.smelt_for(&key) {
                Some(s) => s.output.clone(),
                None => {
                    let via_drop = registry
                        .blocks
                        .get(&key)
                        .and_then(|b| b.drop.as_deref())
                        .and_then(|d| registry.smelt_for(d));
                    match via_drop {
                        Some(s) => s.output.clone(),
                        None => key,
                    }
                }
            },
            _ => key,
        };
        Some(TaskGoal { verb, count, item })
    }

    /// Inventory count of the goal item (summing tag members).
    pub fn held(&self, registry: &Registry, state: &AgentState) -> u32 {
        registry
            .expand(&self.item)
            .iter()
            .map(|i| state.count(i))
            .sum()
    }
}

/// Ground-truth success from the inventory delta; `None` when the task is not
/// rule-checkable.
pub fn rule_check(
    registry: &Registry,
    before: &AgentState,
    after: &AgentState,
    description: &str,
) -> Option<bool> {
    let goal = TaskGoal::parse(registry, description)?;
    let b = goal.held(registry, before);
    let a = goal.held(registry, after);
    Some(a >= b + goal.count)
}
