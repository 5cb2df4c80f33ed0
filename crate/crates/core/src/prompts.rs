//! Versioned prompt templates and the textual rendering of agent state.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::world::{AgentState, ChestContents};

pub const TEMPLATE_VERSION: &str = "v1";

pub const CURRICULUM: &str = include_str!("../prompts/curriculum.v1.txt");
pub const QA_ASK: &str = include_str!("../prompts/curriculum_qa_ask.v1.txt");
pub const QA_ANSWER: &str = include_str!("../prompts/curriculum_qa_answer.v1.txt");
pub const CODEGEN: &str = include_str!("../prompts/codegen.v1.txt");
pub const DESCRIBE: &str = include_str!("../prompts/describe.v1.txt");
pub const VERIFIER: &str = include_str!("../prompts/verifier.v1.txt");
pub const DECOMPOSE: &str = include_str!("../prompts/decompose.v1.txt");

/// Replaces each `{{key}}` in `template`.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = template.to_string();
    for (key, value) in vars {
        out = out.replace(&format!("{{{{{key}}}}}"), value);
    }
    out
}

/// One line of the rendered agent state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StateLine {
    Biome,
    Time,
    NearbyBlocks,
    RecentlySeenBlocks,
    NearbyEntities,
    Health,
    Hunger,
    Position,
    Equipment,
    Inventory,
    Chests,
}

impl StateLine {
    /// Every line in prompt order.
    pub const ALL: [StateLine; 11] = [
        StateLine::Biome,
        StateLine::Time,
        StateLine::NearbyBlocks,
        StateLine::RecentlySeenBlocks,
        StateLine::NearbyEntities,
        StateLine::Health,
        StateLine::Hunger,
        StateLine::Position,
        StateLine::Equipment,
        StateLine::Inventory,
        StateLine::Chests,
    ];

    pub fn label(self) -> &'static str {
        match self {
            StateLine::Biome => "Biome",
            StateLine::Time => "Time",
            StateLine::NearbyBlocks => "Nearby blocks",
            StateLine::RecentlySeenBlocks => "Other blocks that are recently seen",
            StateLine::NearbyEntities => "Nearby entities",
            StateLine::Health => "Health",
            StateLine::Hunger => "Hunger",
            StateLine::Position => "Position",
            StateLine::Equipment => "Equipment",
            StateLine::Inventory => "Inventory",
            StateLine::Chests => "Chests",
        }
    }
}

fn list<'a>(items: impl IntoIterator<Item = &'a String>) -> String {
    let v: Vec<&str> = items.into_iter().map(String::as_str).collect();
    if v.is_empty() {
        "None".into()
    } else {
        v.join(", ")
    }
}

fn dict<'a, V: core::fmt::Display + 'a>(entries: impl IntoIterator<Item = (&'a str, V)>) -> String {
    let parts: Vec<String> = entries
        .into_iter()
        .map(|(k, v)| format!("'{k}': {v}"))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

/// Renders the inventory line, keeping only items accepted by `keep`.
pub fn inventory_line(state: &AgentState, keep: &dyn Fn(&str) -> bool) -> String {
    let items: Vec<(&str, u32)> = state
        .inventory
        .iter()
        .filter(|(k, _)| keep(k))
        .map(|(k, v)| (k.as_str(), *v))
        .collect();
    if items.is_empty() {
        format!("Inventory ({}/36): Empty", items.len())
    } else {
        format!("Inventory ({}/36): {}", items.len(), dict(items))
    }
}

/// Renders one state line.
pub fn state_line(state: &AgentState, line: StateLine) -> String {
    let label = line.label();
    match line {
        StateLine::Biome => format!("{label}: {}", state.biome),
        StateLine::Time => format!("{label}: {}", state.time_of_day.name()),
        StateLine::NearbyBlocks => format!("{label}: {}", list(&state.nearby_blocks)),
        StateLine::RecentlySeenBlocks => format!("{label}: {}", list(&state.recently_seen_blocks)),
        StateLine::NearbyEntities => format!("{label}: {}", list(&state.nearby_entities)),
        StateLine::Health => format!("{label}: {}.0/20", state.health),
        StateLine::Hunger => format!("{label}: {}.0/20", state.hunger),
        StateLine::Position => format!(
            "{label}: x={}, y={}, z={}",
            state.position.x, state.position.y, state.position.z
        ),
        StateLine::Equipment => {
            if state.equipment.is_empty() {
                format!("{label}: None")
            } else {
                let entries = state
                    .equipment
                    .iter()
                    .map(|(slot, item)| (slot.name(), format!("'{item}'")));
                format!("{label}: {}", dict(entries))
            }
        }
        StateLine::Inventory => inventory_line(state, &|_| true),
        StateLine::Chests => {
            if state.known_chests.is_empty() {
                return format!("{label}: None");
            }
            let parts: Vec<String> = state
                .known_chests
                .iter()
                .map(|c| match &c.contents {
                    ChestContents::Unknown => format!("{}: Unknown items inside", c.position),
                    ChestContents::Known(items) if items.is_empty() => {
                        format!("{}: Empty", c.position)
                    }
                    ChestContents::Known(items) => format!(
                        "{}: {}",
                        c.position,
                        dict(items.iter().map(|(k, v)| (k.as_str(), *v)))
                    ),
                })
                .collect();
            format!("{label}: {}", parts.join("; "))
        }
    }
}

/// Renders the chosen lines, one per line, in prompt order.
pub fn render_state(state: &AgentState, lines: &[StateLine]) -> String {
    let mut out = String::new();
    for line in StateLine::ALL {
        if lines.contains(&line) {
            out.push_str(&state_line(state, line));
            out.push('\n');
        }
    }
    out
}

/// Parses an inventory line produced by [`inventory_line`] back into counts.
pub fn parse_inventory_line(line: &str) -> Option<Vec<(String, u32)>> {
    let rest = line.strip_prefix("Inventory (")?;
    let (_, body) = rest.split_once("): ")?;
    let body = body.trim();
    if body == "Empty" {
        return Some(Vec::new());
    }
    let body = body.strip_prefix('{')?.strip_suffix('}')?;
    let mut out = Vec::new();
    for part in body.split(", ") {
        let (k, v) = part.split_once(": ")?;
        out.push((k.trim_matches('\'').to_string(), v.trim().parse().ok()?));
    }
    Some(out)
}
