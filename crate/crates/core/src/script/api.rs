use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::ast::Function;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamType {
    Int,
    Str,
    /// A condition re-evaluated lazily by the callee.
    Predicate,
}

impl ParamType {
    fn name(self) -> &'static str {
        match self {
            ParamType::Int => "int",
            ParamType::Str => "string",
            ParamType::Predicate => "condition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Default {
    Int(i64),
    Str(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: ParamType,
    pub default: Option<Default>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallableKind {
    Primitive,
    Query,
    Skill,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub name: String,
    pub params: Vec<Param>,
    pub kind: CallableKind,
    pub doc: String,
}

impl Signature {
    pub fn min_arity(&self) -> usize {
        self.params.iter().filter(|p| p.default.is_none()).count()
    }

    pub fn max_arity(&self) -> usize {
        self.params.len()
    }

    /// `mineBlock(name: string, count: int = 1)`
    pub fn render(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| match &p.default {
                None => format!("{}: {}", p.name, p.ty.name()),
                Some(Default::Int(n)) => format!("{}: {} = {n}", p.name, p.ty.name()),
                Some(Default::Str(s)) => format!("{}: {} = \"{s}\"", p.name, p.ty.name()),
            })
            .collect();
        format!("{}({})", self.name, params.join(", "))
    }
}

fn param(name: &str, ty: ParamType, default: Option<Default>) -> Param {
    Param {
        name: name.to_string(),
        ty,
        default,
    }
}

fn sig(name: &str, kind: CallableKind, params: Vec<Param>, doc: &str) -> Signature {
    Signature {
        name: name.to_string(),
        params,
        kind,
        doc: doc.to_string(),
    }
}

/// Control primitives in canonical order.
pub fn primitive_signatures() -> Vec<Signature> {
    use CallableKind::Primitive as P;
    use ParamType::*;
    alloc::vec![
        sig(
            "exploreUntil",
            P,
            alloc::vec![
                param("direction", Str, None),
                param("maxTime", Int, None),
                param("until", Predicate, None),
            ],
            "Walk in a fixed direction (\"+x\", \"-x\", \"+z\", \"-z\" or a diagonal such as \"+x-z\") one block per tick until the condition holds or maxTime ticks pass.",
        ),
        sig(
            "mineBlock",
            P,
            alloc::vec![param("name", Str, None), param("count", Int, Some(Default::Int(1)))],
            "Mine and collect the given number of blocks within a 32-block distance. Needs a good enough pickaxe in the inventory for ores and stone.",
        ),
        sig(
            "craftItem",
            P,
            alloc::vec![param("name", Str, None), param("count", Int, Some(Default::Int(1)))],
            "Apply the item's recipe count times. Most recipes need a crafting table placed within 32 blocks.",
        ),
        sig(
            "placeItem",
            P,
            alloc::vec![
                param("name", Str, None),
                param("x", Int, None),
                param("y", Int, None),
                param("z", Int, None),
            ],
            "Place a block from the inventory at an empty position within 32 blocks.",
        ),
        sig(
            "smeltItem",
            P,
            alloc::vec![
                param("itemName", Str, None),
                param("fuelName", Str, None),
                param("count", Int, Some(Default::Int(1))),
            ],
            "Smelt items with the given fuel. Needs a furnace placed within 32 blocks.",
        ),
        sig(
            "killMob",
            P,
            alloc::vec![
                param("mobName", Str, None),
                param("timeout", Int, Some(Default::Int(300))),
            ],
            "Attack the nearest mob of that kind and collect its drops.",
        ),
        sig(
            "getItemFromChest",
            P,
            alloc::vec![
                param("x", Int, None),
                param("y", Int, None),
                param("z", Int, None),
                param("item", Str, None),
                param("count", Int, None),
            ],
            "Take items from the chest at the given position.",
        ),
        sig(
            "depositItemIntoChest",
            P,
            alloc::vec![
                param("x", Int, None),
                param("y", Int, None),
                param("z", Int, None),
                param("item", Str, None),
                param("count", Int, None),
            ],
            "Put items from the inventory into the chest at the given position.",
        ),
        sig(
            "goto",
            P,
            alloc::vec![
                param("x", Int, None),
                param("y", Int, None),
                param("z", Int, None),
                param("range", Int, Some(Default::Int(1))),
            ],
            "Walk to within range blocks of a position.",
        ),
        sig(
            "equip",
            P,
            alloc::vec![
                param("item", Str, None),
                param("destination", Str, Some(Default::Str("hand"))),
            ],
            "Hold or wear an item. Destinations: hand, head, torso, legs, feet, off-hand.",
        ),
        sig(
            "consume",
            P,
            alloc::vec![param("item", Str, None)],
            "Eat a food item to restore hunger.",
        ),
    ]
}

/// Side-effect-free queries usable inside expressions.
pub fn query_signatures() -> Vec<Signature> {
    use CallableKind::Query as Q;
    use ParamType::*;
    alloc::vec![
        sig("inventory_count", Q, alloc::vec![param("item", Str, None)], "Number of that item in the inventory."),
        sig("block_nearby", Q, alloc::vec![param("name", Str, None)], "True when that block is within 32 blocks."),
        sig("entity_nearby", Q, alloc::vec![param("name", Str, None)], "True when that mob is within 32 blocks."),
        sig("position_x", Q, Vec::new(), "Current x coordinate."),
        sig("position_y", Q, Vec::new(), "Current y coordinate (the cell the agent stands in)."),
        sig("position_z", Q, Vec::new(), "Current z coordinate."),
        sig(
            "block_at",
            Q,
            alloc::vec![param("x", Int, None), param("y", Int, None), param("z", Int, None)],
            "Name of the block at a position, or \"air\".",
        ),
        sig("health", Q, Vec::new(), "Current health, 0 to 20."),
        sig("hunger", Q, Vec::new(), "Current food level, 0 to 20."),
    ]
}

/// Everything a program may call: primitives, queries and library skills.
#[derive(Debug, Clone)]
pub struct ApiRegistry {
    primitives: Vec<Signature>,
    queries: Vec<Signature>,
    skills: BTreeMap<String, (Signature, Arc<Function>)>,
}

impl ApiRegistry {
    pub fn with_primitives() -> Self {
        ApiRegistry {
            primitives: primitive_signatures(),
            queries: query_signatures(),
            skills: BTreeMap::new(),
        }
    }

    /// Registers a parsed skill, replacing any previous skill of that name.
    pub fn add_skill(&mut self, func: Arc<Function>, description: &str) {
        let signature = Signature {
            name: func.name.clone(),
            params: func
                .params
                .iter()
                .map(|p| param(p, ParamType::Int, None))
                .collect(),
            kind: CallableKind::Skill,
            doc: description.to_string(),
        };
        self.skills.insert(func.name.clone(), (signature, func));
    }

    pub fn lookup(&self, name: &str) -> Option<&Signature> {
        self.primitives
            .iter()
            .chain(self.queries.iter())
            .find(|s| s.name == name)
            .or_else(|| self.skills.get(name).map(|(s, _)| s))
    }

    pub fn skill(&self, name: &str) -> Option<&Arc<Function>> {
        self.skills.get(name).map(|(_, f)| f)
    }

    pub fn skill_names(&self) -> impl Iterator<Item = &String> {
        self.skills.keys()
    }

    pub fn primitives(&self) -> &[Signature] {
        &self.primitives
    }

    /// Signature listing for prompts: primitives, queries, then skills by name.
    pub fn render_api_docs(&self) -> String {
        let mut out = String::from("Control primitives:\n");
        for s in &self.primitives {
            out.push_str(&format!("- {}: {}\n", s.render(), s.doc));
        }
        out.push_str("\nQueries (usable inside expressions):\n");
        for s in &self.queries {
            out.push_str(&format!("- {}: {}\n", s.render(), s.doc));
        }
        if !self.skills.is_empty() {
            out.push_str("\nSkills:\n");
            for (s, _) in self.skills.values() {
                out.push_str(&format!("- {}\n", s.render()));
            }
        }
        out
    }
}
