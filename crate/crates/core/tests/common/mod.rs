//! Fixtures and oracles shared by several test targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use voyager_core::curriculum::{Curriculum, CurriculumConfig, QaPair};
use voyager_core::registry::Slot;
use voyager_core::task::{Proposer, Task};
use voyager_core::world::{AgentState, BlockPos, ChestContents, KnownChest, TimeOfDay};

/// A hand-built state touching every prompt line.
pub fn sample_state() -> AgentState {
    let inv = [
        ("cobblestone", 5),
        ("diamond", 1),
        ("dirt", 3),
        ("iron_ingot", 1),
        ("oak_log", 2),
        ("stone_pickaxe", 1),
    ];
    AgentState {
        inventory: inv.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        equipment: [(Slot::Hand, "stone_pickaxe".to_string())].into_iter().collect(),
        nearby_blocks: set(&["grass_block", "oak_log", "stone"]),
        recently_seen_blocks: set(&["coal_ore", "iron_ore"]),
        nearby_entities: set(&["cow", "sheep"]),
        known_chests: vec![KnownChest {
            position: BlockPos { x: 12, y: 63, z: 4 },
            contents: ChestContents::Known(BTreeMap::from([("iron_ingot".to_string(), 2)])),
        }],
        biome: "forest".into(),
        time_of_day: TimeOfDay::Noon,
        health: 18,
        hunger: 14,
        position: BlockPos { x: 10, y: 64, z: -3 },
    }
}

fn set(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

pub fn sample_context() -> Vec<QaPair> {
    vec![QaPair {
        question: "What are the blocks that I can find in the forest in Minecraft?".into(),
        concept: "forest".into(),
        answer: "Oak logs, birch logs and grass blocks.".into(),
    }]
}

/// Unlock thresholds written out independently of the implementation, with
/// the exact text each line should have for [`sample_state`].
pub const WARMUP_LINES: [(u32, &str); 10] = [
    (10, "Biome: forest"),
    (15, "Time: noon"),
    (0, "Nearby blocks: grass_block, oak_log, stone"),
    (10, "Other blocks that are recently seen: coal_ore, iron_ore"),
    (5, "Nearby entities: cow, sheep"),
    (15, "Health: 18.0/20"),
    (15, "Hunger: 14.0/20"),
    (0, "Position: x=10, y=64, z=-3"),
    (0, "Equipment: {'hand': 'stone_pickaxe'}"),
    (10, "Chests: (12, 63, 4): {'iron_ingot': 2}"),
];

pub const CORE_INVENTORY: &str = "Inventory (3/36): {'dirt': 3, 'oak_log': 2, 'stone_pickaxe': 1}";
pub const FULL_INVENTORY: &str = "Inventory (6/36): {'cobblestone': 5, 'diamond': 1, 'dirt': 3, 'iron_ingot': 1, 'oak_log': 2, 'stone_pickaxe': 1}";

/// The curriculum prompt the warm-up table calls for after `n` completions.
pub fn expected_prompt(n: u32) -> String {
    let mut out = String::new();
    if n >= 15 {
        for (i, p) in sample_context().iter().enumerate() {
            out += &format!("Question {}: {}\nAnswer: {}\n", i + 1, p.question, p.answer);
        }
    }
    let mut lines: Vec<&str> = WARMUP_LINES.iter().filter(|(t, _)| *t <= n).map(|(_, l)| *l).collect();
    // inventory sits after equipment, chests come last
    let chests = lines.iter().position(|l| l.starts_with("Chests"));
    let chest_line = chests.map(|i| lines.remove(i));
    lines.push(if n >= 7 { FULL_INVENTORY } else { CORE_INVENTORY });
    lines.extend(chest_line);
    for l in lines {
        out += l;
        out += "\n";
    }
    let done: Vec<String> = (0..n).map(|i| format!("Mine {} dirt", i + 1)).collect();
    out += &format!(
        "Completed tasks so far: {}\nFailed tasks that are too hard: Mine 1 ancient debris\n",
        if done.is_empty() { "None".to_string() } else { done.join(", ") }
    );
    out
}

pub fn curriculum_with_completed(n: u32) -> Curriculum {
    let mut c = Curriculum::new(CurriculumConfig::default());
    for i in 0..n {
        c.record_outcome(&Task::new(i as u64 + 1, format!("Mine {} dirt", i + 1), Proposer::Auto), true);
    }
    c.record_outcome(&Task::new(999, "Mine 1 ancient debris", Proposer::Auto), false);
    c
}

/// Ok when the rendered prompt matches the oracle exactly.
pub fn check_warmup(n: u32) -> Result<(), String> {
    let c = curriculum_with_completed(n);
    let got = c.curriculum_prompt(&sample_state(), &sample_context());
    let want = expected_prompt(n);
    if got == want {
        Ok(())
    } else {
        Err(format!("n={n}\n--- got\n{got}--- want\n{want}"))
    }
}
