//! Item, block, recipe and mob tables.
//!
//! The bundled tables live in `data/registry.txt`; see the header of that file
//! for the record format. Everything here is immutable once parsed.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

const BUNDLED: &str = include_str!("../data/registry.txt");

/// Tool material tiers, ordered by mining capability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    None,
    Wooden,
    Golden,
    Stone,
    Iron,
    Diamond,
    Unbreakable,
}

impl Tier {
    /// Mining capability rank; golden tools mine like wooden ones.
    pub fn rank(self) -> u8 {
        match self {
            Tier::None => 0,
            Tier::Wooden | Tier::Golden => 1,
            Tier::Stone => 2,
            Tier::Iron => 3,
            Tier::Diamond => 4,
            Tier::Unbreakable => u8::MAX,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tier::None => "none",
            Tier::Wooden => "wooden",
            Tier::Golden => "golden",
            Tier::Stone => "stone",
            Tier::Iron => "iron",
            Tier::Diamond => "diamond",
            Tier::Unbreakable => "unbreakable",
        }
    }

    fn parse(s: &str) -> Option<Tier> {
        Some(match s {
            "none" => Tier::None,
            "wooden" => Tier::Wooden,
            "golden" => Tier::Golden,
            "stone" => Tier::Stone,
            "iron" => Tier::Iron,
            "diamond" => Tier::Diamond,
            "unbreakable" => Tier::Unbreakable,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Station {
    None,
    CraftingTable,
    Furnace,
}

impl Station {
    pub fn block_name(self) -> Option<&'static str> {
        match self {
            Station::None => None,
            Station::CraftingTable => Some("crafting_table"),
            Station::Furnace => Some("furnace"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolKind {
    Pickaxe,
    Axe,
    Shovel,
    Hoe,
    Sword,
}

impl ToolKind {
    fn parse(s: &str) -> Option<ToolKind> {
        Some(match s {
            "pickaxe" => ToolKind::Pickaxe,
            "axe" => ToolKind::Axe,
            "shovel" => ToolKind::Shovel,
            "hoe" => ToolKind::Hoe,
            "sword" => ToolKind::Sword,
            _ => return None,
        })
    }
}

/// The six equipment slots an agent can fill.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "hand")]
    Hand,
    #[serde(rename = "head")]
    Head,
    #[serde(rename = "torso")]
    Torso,
    #[serde(rename = "legs")]
    Legs,
    #[serde(rename = "feet")]
    Feet,
    #[serde(rename = "off-hand")]
    OffHand,
}

impl Slot {
    pub const ALL: [Slot; 6] = [
        Slot::Hand,
        Slot::Head,
        Slot::Torso,
        Slot::Legs,
        Slot::Feet,
        Slot::OffHand,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Slot::Hand => "hand",
            Slot::Head => "head",
            Slot::Torso => "torso",
            Slot::Legs => "legs",
            Slot::Feet => "feet",
            Slot::OffHand => "off-hand",
        }
    }

    pub fn parse(s: &str) -> Option<Slot> {
        Slot::ALL.iter().copied().find(|slot| slot.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDef {
    pub name: String,
    pub tier: Tier,
    pub drop: Option<String>,
    pub drop_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ingredient {
    /// Item name, or `#tag`.
    pub key: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Recipe {
    pub output: String,
    pub count: u32,
    pub station: Station,
    pub inputs: Vec<Ingredient>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmeltRecipe {
    pub output: String,
    /// Item name, or `#tag`.
    pub input: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolDef {
    pub item: String,
    pub kind: ToolKind,
    pub tier: Tier,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MobDef {
    pub name: String,
    pub hp: u32,
    pub damage: u32,
    pub drops: Vec<(String, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("registry line {line}: {message}")]
pub struct RegistryError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    pub blocks: BTreeMap<String, BlockDef>,
    pub tags: BTreeMap<String, Vec<String>>,
    pub recipes: BTreeMap<String, Recipe>,
    /// Keyed by input (item or `#tag`).
    pub smelts: BTreeMap<String, SmeltRecipe>,
    /// Fuel key (item or `#tag`) and items smelted per unit, in file order.
    pub fuels: Vec<(String, u32)>,
    pub tools: BTreeMap<String, ToolDef>,
    pub armor: BTreeMap<String, Slot>,
    pub mobs: BTreeMap<String, MobDef>,
    pub foods: BTreeMap<String, u32>,
}

impl Registry {
    /// The tables shipped with the crate.
    pub fn bundled() -> Registry {
        Registry::parse(BUNDLED).expect("bundled registry parses")
    }

    pub fn parse(text: &str) -> Result<Registry, RegistryError> {
        let mut reg = Registry::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let tokens: Vec<&str> = raw.split_whitespace().collect();
            if tokens.is_empty() || tokens[0].starts_with('#') {
                continue;
            }
            let err = |message: String| RegistryError { line, message };
            let num = |s: &str| -> Result<u32, RegistryError> {
                s.parse::<u32>()
                    .map_err(|_| err(format!("expected a non-negative integer, got `{s}`")))
            };
            match tokens[0] {
                "block" => {
                    if tokens.len() != 5 {
                        return Err(err("block needs: name tier drop drop_count".into()));
                    }
                    let tier = Tier::parse(tokens[2])
                        .ok_or_else(|| err(format!("unknown tier `{}`", tokens[2])))?;
                    let drop = (tokens[3] != "none").then(|| tokens[3].to_string());
                    reg.blocks.insert(
                        tokens[1].to_string(),
                        BlockDef {
                            name: tokens[1].to_string(),
                            tier,
                            drop,
                            drop_count: num(tokens[4])?,
                        },
                    );
                }
                "tag" => {
                    if tokens.len() < 3 {
                        return Err(err("tag needs at least one member".into()));
                    }
                    reg.tags.insert(
                        tokens[1].to_string(),
                        tokens[2..].iter().map(|s| s.to_string()).collect(),
                    );
                }
                "recipe" => {
                    let colon = tokens
                        .iter()
                        .position(|t| *t == ":")
                        .ok_or_else(|| err("recipe is missing `:`".into()))?;
                    if colon != 4 {
                        return Err(err("recipe needs: output count station : inputs".into()));
                    }
                    let station = match tokens[3] {
                        "none" => Station::None,
                        "crafting_table" => Station::CraftingTable,
                        "furnace" => Station::Furnace,
                        other => return Err(err(format!("unknown station `{other}`"))),
                    };
                    let rest = &tokens[5..];
                    if rest.is_empty() || !rest.len().is_multiple_of(2) {
                        return Err(err("recipe inputs must be <ingredient> <n> pairs".into()));
                    }
                    let mut inputs = Vec::new();
                    for pair in rest.chunks(2) {
                        inputs.push(Ingredient {
                            key: pair[0].to_string(),
                            count: num(pair[1])?,
                        });
                    }
                    reg.recipes.insert(
                        tokens[1].to_string(),
                        Recipe {
                            output: tokens[1].to_string(),
                            count: num(tokens[2])?,
                            station,
                            inputs,
                        },
                    );
                }
                "smelt" => {
                    if tokens.len() != 3 {
                        return Err(err("smelt needs: output input".into()));
                    }
                    reg.smelts.insert(
                        tokens[2].to_string(),
                        SmeltRecipe {
                            output: tokens[1].to_string(),
                            input: tokens[2].to_string(),
                        },
                    );
                }
                "fuel" => {
                    if tokens.len() != 3 {
                        return Err(err("fuel needs: item value".into()));
                    }
                    reg.fuels.push((tokens[1].to_string(), num(tokens[2])?));
                }
                "tool" => {
                    if tokens.len() != 4 {
                        return Err(err("tool needs: item kind tier".into()));
                    }
                    let kind = ToolKind::parse(tokens[2])
                        .ok_or_else(|| err(format!("unknown tool kind `{}`", tokens[2])))?;
                    let tier = Tier::parse(tokens[3])
                        .ok_or_else(|| err(format!("unknown tier `{}`", tokens[3])))?;
                    reg.tools.insert(
                        tokens[1].to_string(),
                        ToolDef {
                            item: tokens[1].to_string(),
                            kind,
                            tier,
                        },
                    );
                }
                "armor" => {
                    if tokens.len() != 3 {
                        return Err(err("armor needs: item slot".into()));
                    }
                    let slot = Slot::parse(tokens[2])
                        .ok_or_else(|| err(format!("unknown slot `{}`", tokens[2])))?;
                    reg.armor.insert(tokens[1].to_string(), slot);
                }
                "mob" => {
                    if tokens.len() != 5 {
                        return Err(err("mob needs: name hp damage drops".into()));
                    }
                    let mut drops = Vec::new();
                    for part in tokens[4].split(',') {
                        let (item, n) = part
                            .split_once(':')
                            .ok_or_else(|| err(format!("bad drop `{part}`")))?;
                        drops.push((item.to_string(), num(n)?));
                    }
                    reg.mobs.insert(
                        tokens[1].to_string(),
                        MobDef {
                            name: tokens[1].to_string(),
                            hp: num(tokens[2])?,
                            damage: num(tokens[3])?,
                            drops,
                        },
                    );
                }
                "food" => {
                    if tokens.len() != 3 {
                        return Err(err("food needs: item hunger".into()));
                    }
                    reg.foods.insert(tokens[1].to_string(), num(tokens[2])?);
                }
                other => return Err(err(format!("unknown record kind `{other}`"))),
            }
        }
        Ok(reg)
    }

    /// True when `key` (an item or `#tag`) accepts `item`.
    pub fn matches(&self, key: &str, item: &str) -> bool {
        match key.strip_prefix('#') {
            Some(tag) => self
                .tags
                .get(tag)
                .is_some_and(|members| members.iter().any(|m| m == item)),
            None => key == item,
        }
    }

    /// Concrete items accepted by `key`.
    pub fn expand(&self, key: &str) -> Vec<String> {
        match key.strip_prefix('#') {
            Some(tag) => self.tags.get(tag).cloned().unwrap_or_default(),
            None => alloc::vec![key.to_string()],
        }
    }

    pub fn recipe(&self, item: &str) -> Option<&Recipe> {
        self.recipes.get(item)
    }

    pub fn smelt_for(&self, input: &str) -> Option<&SmeltRecipe> {
        self.smelts.get(input).or_else(|| {
            self.smelts
                .values()
                .find(|s| s.input.starts_with('#') && self.matches(&s.input, input))
        })
    }

    pub fn fuel_value(&self, item: &str) -> Option<u32> {
        self.fuels
            .iter()
            .find(|(key, _)| self.matches(key, item))
            .map(|(_, v)| *v)
    }

    /// Human-readable fuel classes, in table order.
    pub fn fuel_classes(&self) -> Vec<String> {
        self.fuels
            .iter()
            .map(|(key, _)| display_name(key.trim_start_matches('#')))
            .collect()
    }

    /// Mining tier a block needs; `None` when the block is unknown.
    pub fn required_tier(&self, block: &str) -> Option<Tier> {
        self.blocks.get(block).map(|b| b.tier)
    }

    pub fn is_placeable(&self, item: &str) -> bool {
        self.blocks.get(item).is_some_and(|b| b.name == item)
    }

    /// Melee damage per exchange for the given held item.
    pub fn weapon_damage(&self, held: Option<&str>) -> u32 {
        let Some(tool) = held.and_then(|h| self.tools.get(h)) else {
            return 1;
        };
        let base = match tool.tier {
            Tier::Wooden | Tier::Golden => 4,
            Tier::Stone => 5,
            Tier::Iron => 6,
            Tier::Diamond => 7,
            Tier::None | Tier::Unbreakable => 1,
        };
        if tool.kind == ToolKind::Sword {
            base
        } else {
            (base - 2).max(2)
        }
    }

    /// Every item name mentioned anywhere in the tables.
    pub fn all_items(&self) -> BTreeSet<String> {
        let mut items = BTreeSet::new();
        let add_key = |items: &mut BTreeSet<String>, key: &str| {
            for item in self.expand(key) {
                items.insert(item);
            }
        };
        for block in self.blocks.values() {
            if let Some(drop) = &block.drop {
                items.insert(drop.clone());
            }
        }
        for members in self.tags.values() {
            items.extend(members.iter().cloned());
        }
        for recipe in self.recipes.values() {
            items.insert(recipe.output.clone());
            for input in &recipe.inputs {
                add_key(&mut items, &input.key);
            }
        }
        for smelt in self.smelts.values() {
            items.insert(smelt.output.clone());
            add_key(&mut items, &smelt.input);
        }
        for (key, _) in &self.fuels {
            add_key(&mut items, key);
        }
        items.extend(self.tools.keys().cloned());
        items.extend(self.armor.keys().cloned());
        for mob in self.mobs.values() {
            items.extend(mob.drops.iter().map(|(i, _)| i.clone()));
        }
        items.extend(self.foods.keys().cloned());
        items
    }

    /// Block whose drop is `item`, preferring a block of the same name.
    pub fn block_dropping(&self, item: &str) -> Option<&BlockDef> {
        self.blocks.get(item).filter(|b| b.drop.as_deref() == Some(item)).or_else(|| {
            self.blocks
                .values()
                .find(|b| b.drop.as_deref() == Some(item) && b.tier != Tier::Unbreakable)
        })
    }
}

/// `iron_chestplate` → `iron chestplate`.
pub fn display_name(item: &str) -> String {
    item.trim_start_matches('#').replace('_', " ")
}

/// `iron_chestplate` → `an iron chestplate`.
pub fn with_article(item: &str) -> String {
    let name = display_name(item);
    let article = match name.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    };
    format!("{article} {name}")
}

const UNCOUNTABLE: &[&str] = &[
    "coal",
    "charcoal",
    "redstone",
    "string",
    "leather",
    "gunpowder",
    "bone meal",
    "sand",
    "gravel",
    "dirt",
    "cobblestone",
    "cobbled deepslate",
    "lapis lazuli",
    "glass",
];

/// Display name, pluralized when `n != 1`.
pub fn quantity_name(item: &str, n: u32) -> String {
    let name = display_name(item);
    if n == 1
        || name.ends_with('s')
        || name.starts_with("raw ")
        || name.ends_with("wool")
        || UNCOUNTABLE.contains(&name.as_str())
    {
        return name;
    }
    if name.ends_with('x') || name.ends_with("sh") || name.ends_with("ch") {
        format!("{name}es")
    } else {
        format!("{name}s")
    }
}

/// One missing ingredient in a craft or smelt attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortfall {
    pub ingredient: String,
    pub missing: u32,
}

/// `I cannot make <item> because I need: <n> more <ingredient>[, ...]`.
pub fn shortfall_message(item: &str, shortfalls: &[Shortfall]) -> String {
    let needs: Vec<String> = shortfalls
        .iter()
        .map(|s| format!("{} more {}", s.missing, quantity_name(&s.ingredient, s.missing)))
        .collect();
    format!(
        "I cannot make {} because I need: {}",
        with_article(item),
        needs.join(", ")
    )
}

/// A shortfall message parsed back into its parts (display text, not ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedShortfall {
    pub item: String,
    pub needs: Vec<(u32, String)>,
}

pub fn parse_shortfall_message(msg: &str) -> Option<ParsedShortfall> {
    let rest = msg.strip_prefix("I cannot make ")?;
    let (item, needs) = rest.split_once(" because I need: ")?;
    let item = item
        .strip_prefix("an ")
        .or_else(|| item.strip_prefix("a "))?
        .to_string();
    let mut parsed = Vec::new();
    for part in needs.split(", ") {
        let (n, tail) = part.split_once(' ')?;
        let n: u32 = n.parse().ok()?;
        let ingredient = tail.strip_prefix("more ")?;
        parsed.push((n, ingredient.to_string()));
    }
    Some(ParsedShortfall { item, needs: parsed })
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
