use std::collections::BTreeSet;

use proptest::prelude::*;
use voyager_core::registry::{parse_shortfall_message, quantity_name, Registry, Tier, ToolKind};
use voyager_core::world::*;

fn world(seed: u64) -> World {
    create_world(WorldConfig::with_seed(seed)).unwrap()
}

#[derive(Debug, Clone)]
enum Op {
    Mine(&'static str, i64),
    Craft(&'static str, i64),
    Explore(&'static str, i64),
    Give(&'static str, u32),
    Smelt(&'static str, &'static str, i64),
}

fn op() -> impl Strategy<Value = Op> {
    let blocks = prop::sample::select(vec!["oak_log", "birch_log", "stone", "dirt", "sand", "coal_ore"]);
    let items = prop::sample::select(vec![
        "oak_planks", "stick", "crafting_table", "wooden_pickaxe", "furnace", "torch",
    ]);
    let dirs = prop::sample::select(vec!["+x", "-x", "+z", "-z", "+x-z"]);
    prop_oneof![
        (blocks, 1..4i64).prop_map(|(b, n)| Op::Mine(b, n)),
        (items.clone(), 1..3i64).prop_map(|(i, n)| Op::Craft(i, n)),
        (dirs, 1..20i64).prop_map(|(d, n)| Op::Explore(d, n)),
        (items, 1..5u32).prop_map(|(i, n)| Op::Give(i, n)),
        (1..3i64).prop_map(|n| Op::Smelt("raw_iron", "coal", n)),
    ]
}

fn apply(w: &mut World, op: &Op) -> Result<OpOutcome, PrimitiveError> {
    match op {
        Op::Mine(b, n) => w.mine_block(b, *n),
        Op::Craft(i, n) => w.craft_item(i, *n),
        Op::Explore(d, n) => w.explore_until(d, *n, |_| false),
        Op::Give(i, n) => {
            w.give(i, *n);
            Ok(OpOutcome::default())
        }
        Op::Smelt(i, f, n) => w.smelt_item(i, f, *n),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn same_calls_same_world(seed in 0u64..1000, ops in prop::collection::vec(op(), 1..10)) {
        let mut a = world(seed);
        let mut b = world(seed);
        for op in &ops {
            prop_assert_eq!(apply(&mut a, op), apply(&mut b, op));
        }
        prop_assert_eq!(a.observe(), b.observe());
        prop_assert_eq!(a.events(), b.events());
        prop_assert_eq!(a.tick(), b.tick());
    }

    /// Crafting moves exactly the recipe's inputs and outputs, or nothing.
    #[test]
    fn crafting_conserves_items(
        recipe_idx in 0usize..1000,
        times in 1i64..4,
        stock in prop::collection::vec(0u32..10, 8),
    ) {
        let reg = Registry::bundled();
        let recipe = reg.recipes.values().nth(recipe_idx % reg.recipes.len()).unwrap().clone();
        let mut w = world(1);
        w.give("crafting_table", 1);
        w.give("furnace", 1);
        let p = w.position();
        // stations right next to the agent, wherever there is room
        for name in ["crafting_table", "furnace"] {
            'place: for dx in -3..=3 {
                for dy in -1..=2 {
                    let c = BlockPos::new(p.x + dx, p.y + dy, p.z + 2);
                    if w.block_at(c) == "air" && w.place_item(name, c).unwrap().success {
                        break 'place;
                    }
                }
            }
        }
        for (input, n) in recipe.inputs.iter().zip(stock.iter()) {
            let item = reg.expand(&input.key)[0].clone();
            w.give(&item, *n);
        }
        let before = w.observe().inventory;
        let out = w.craft_item(&recipe.output, times).unwrap();
        let after = w.observe().inventory;
        if out.success {
            let made = recipe.count * times as u32;
            let gained = after.get(&recipe.output).copied().unwrap_or(0) as i64
                - before.get(&recipe.output).copied().unwrap_or(0) as i64;
            let consumed: i64 = recipe.inputs.iter().map(|i| (i.count * times as u32) as i64).sum();
            let total = |m: &std::collections::BTreeMap<String, u32>| m.values().map(|v| *v as i64).sum::<i64>();
            prop_assert_eq!(gained, made as i64);
            prop_assert_eq!(total(&after) - total(&before), made as i64 - consumed);
        } else {
            prop_assert_eq!(before, after);
        }
    }

    /// Every shortfall message parses back into what is missing.
    #[test]
    fn shortfall_messages_parse_back(
        recipe_idx in 0usize..1000,
        stock in prop::collection::vec(0u32..6, 8),
    ) {
        let reg = Registry::bundled();
        let recipe = reg.recipes.values().nth(recipe_idx % reg.recipes.len()).unwrap().clone();
        let mut w = world(2);
        for (input, n) in recipe.inputs.iter().zip(stock.iter()) {
            w.give(&reg.expand(&input.key)[0], *n);
        }
        let inv = w.observe().inventory;
        let out = w.craft_item(&recipe.output, 1).unwrap();
        let expected: Vec<(u32, String)> = recipe
            .inputs
            .iter()
            .filter_map(|input| {
                let have: u32 = reg.expand(&input.key).iter().map(|i| inv.get(i).copied().unwrap_or(0)).sum();
                (have < input.count).then(|| {
                    let n = input.count - have;
                    (n, quantity_name(&input.key, n))
                })
            })
            .collect();
        if expected.is_empty() {
            prop_assert!(parse_shortfall_message(&out.feedback[0]).is_none());
        } else {
            let parsed = parse_shortfall_message(&out.feedback[0]).expect("parses");
            prop_assert_eq!(parsed.item, recipe.output.replace('_', " "));
            prop_assert!(parsed.needs.iter().all(|(n, _)| *n > 0));
            prop_assert_eq!(parsed.needs, expected);
        }
    }

    #[test]
    fn chest_transfers_conserve(put in 0u32..12, ask in 1i64..15) {
        let mut w = world(1);
        w.give("chest", 1);
        w.give("dirt", put);
        let p = w.position();
        let cell = (1..6)
            .flat_map(|d| (-1..=2).map(move |dy| BlockPos::new(p.x + d, p.y + dy, p.z)))
            .find(|c| w.block_at(*c) == "air")
            .unwrap();
        w.place_item("chest", cell).unwrap();
        if put > 0 {
            w.deposit_item_into_chest(cell, "dirt", put as i64).unwrap();
        }
        let out = w.get_item_from_chest(cell, "dirt", ask).unwrap();
        prop_assert_eq!(out.amount as i64, ask.min(put as i64));
        let held = w.observe().count("dirt");
        let stored = match w.observe().known_chests.iter().find(|c| c.position == cell).unwrap().contents.clone() {
            ChestContents::Known(m) => m.get("dirt").copied().unwrap_or(0),
            ChestContents::Unknown => panic!("placed chests are known"),
        };
        prop_assert_eq!(held + stored, put);
    }
}

/// Items reachable by mining blocks up to `cap`, hunting, crafting and
/// smelting. Chest loot is left out on purpose.
fn closure(reg: &Registry, cap: u8) -> BTreeSet<String> {
    let mut have: BTreeSet<String> = BTreeSet::new();
    loop {
        let before = have.len();
        for b in reg.blocks.values() {
            if b.tier.rank() <= cap {
                have.extend(b.drop.clone());
            }
        }
        for m in reg.mobs.values() {
            have.extend(m.drops.iter().map(|(i, _)| i.clone()));
        }
        for r in reg.recipes.values() {
            if r.inputs.iter().all(|i| reg.expand(&i.key).iter().any(|x| have.contains(x))) {
                have.insert(r.output.clone());
            }
        }
        for s in reg.smelts.values() {
            if reg.expand(&s.input).iter().any(|x| have.contains(x)) {
                have.insert(s.output.clone());
            }
        }
        if have.len() == before {
            return have;
        }
    }
}

#[test]
fn tech_tree_is_monotone_over_the_recipe_graph() {
    let reg = Registry::bundled();
    let best_pickaxe = |items: &BTreeSet<String>| {
        reg.tools
            .values()
            .filter(|t| t.kind == ToolKind::Pickaxe && items.contains(&t.item))
            .map(|t| t.tier.rank())
            .max()
            .unwrap_or(0)
    };
    // with only the tools each stage can make, the next stage is reachable
    // and the one after it is not
    let steps = [
        (Tier::None, "cobblestone", "raw_iron"),
        (Tier::Wooden, "raw_iron", "diamond"),
        (Tier::Stone, "diamond", "__none__"),
    ];
    for (tier, next, beyond) in steps {
        let cap = tier.rank();
        let hand = closure(&reg, cap);
        let reach = best_pickaxe(&hand);
        assert!(reach > cap, "{tier:?} stage cannot make a better pickaxe");
        assert!(!hand.contains(next), "{next} reachable before its tool");
        assert!(closure(&reg, reach).contains(next));
        assert!(!closure(&reg, cap + 1).contains(beyond) || beyond == "__none__");
    }
}

#[test]
fn tool_tiers_gate_mining_in_the_world() {
    let reg = Registry::bundled();
    let cases = [("stone", Tier::Wooden), ("iron_ore", Tier::Stone), ("diamond_ore", Tier::Iron)];
    let pickaxes: Vec<_> = reg
        .tools
        .values()
        .filter(|t| t.kind == ToolKind::Pickaxe)
        .cloned()
        .collect();
    let mut w0 = world(1);
    let p = w0.position();
    w0.teleport(BlockPos::new(p.x, -55, p.z));
    for (block, needed) in cases {
        assert_eq!(reg.required_tier(block), Some(needed));
        for tool in pickaxes.iter().map(Some).chain([None]) {
            let mut w = w0.clone();
            if let Some(t) = tool {
                w.give(&t.item, 1);
                w.equip(&t.item, "hand").unwrap();
            }
            let rank = tool.map_or(0, |t| t.tier.rank());
            let out = w.mine_block(block, 1).unwrap();
            let mined = out.amount > 0;
            if rank < needed.rank() {
                assert!(!mined, "{block} mined with {tool:?}");
            } else if w0.block_nearby(block) {
                assert!(mined, "{block} not mined with {tool:?}: {:?}", out.feedback);
            }
        }
    }
}
