use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use proptest::prelude::*;
use voyager_core::embedding::{Embedder, EmbeddingVector, HashEmbedder};
use voyager_core::library::*;
use voyager_core::llm::{Gateway, ReplayProvider, RoleTag, ScriptedProvider};

fn corpus_source(stem: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/corpus").join(format!("{stem}.skill"));
    fs::read_to_string(path).unwrap()
}

const EIGHT: [(&str, &str); 8] = [
    ("01_mineWoodLog", "Explore until oak logs are nearby, then mine three oak logs."),
    ("02_craftWoodenPlanks", "Craft oak planks from one oak log, mining a log first if none is held."),
    ("03_craftStick", "Craft sticks from oak planks, making planks first when short."),
    ("04_craftCraftingTable", "Craft a crafting table from four oak planks."),
    ("06_craftWoodenPickaxe", "Craft a wooden pickaxe using planks and sticks at a placed crafting table."),
    ("07_mineCobblestone", "Mine eight stone blocks for cobblestone with a wooden pickaxe."),
    ("08_craftStonePickaxe", "Craft a stone pickaxe from three cobblestone and two sticks at a crafting table."),
    ("09_craftFurnace", "Craft a furnace from eight cobblestone at a crafting table."),
];

fn eight_skill_library(emb: &HashEmbedder) -> SkillLibrary {
    let mut lib = SkillLibrary::new(emb);
    for (i, (stem, desc)) in EIGHT.iter().enumerate() {
        lib.add_skill(&corpus_source(stem), desc, emb, i as u64).unwrap();
    }
    lib
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exhaustive cosine over every stored skill, older first on ties.
fn brute_force_top(lib: &SkillLibrary, query: &str, k: usize, emb: &HashEmbedder) -> Vec<String> {
    let q = emb.embed(query).unwrap();
    let qn = dot(q.components(), q.components()).sqrt();
    let mut scored: Vec<(f64, u64, String)> = lib
        .skills()
        .iter()
        .map(|s| {
            let e = s.embedding.components();
            (dot(q.components(), e) / (qn * dot(e, e).sqrt()), s.created_at, s.name.clone())
        })
        .collect();
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    scored.into_iter().take(k).map(|s| s.2).collect()
}

#[test]
fn eight_skill_ranking_matches_brute_force() {
    let emb = HashEmbedder::default();
    let lib = eight_skill_library(&emb);
    let got: Vec<String> = lib
        .retrieve(&RetrievalQuery::new("craft a stone pickaxe", ""), &emb)
        .unwrap()
        .into_iter()
        .map(|(s, _)| s.name.clone())
        .collect();
    assert_eq!(got, brute_force_top(&lib, "craft a stone pickaxe", 5, &emb));
    // frozen from the exhaustive computation above
    assert_eq!(got, FROZEN_STONE_PICKAXE_TOP5);
}

const FROZEN_STONE_PICKAXE_TOP5: [&str; 5] = [
    "craftStonePickaxe",
    "craftWoodenPickaxe",
    "craftFurnace",
    "mineCobblestone",
    "craftCraftingTable",
];

#[test]
fn every_skill_retrieves_itself_first() {
    let emb = HashEmbedder::default();
    let lib = eight_skill_library(&emb);
    for s in lib.skills() {
        let top = lib.retrieve_text(&s.description, 1, &emb).unwrap();
        assert_eq!(top.len(), 1);
        assert_eq!(top[0].0.name, s.name);
        assert_eq!(top[0].1, 1.0);
    }
}

#[test]
fn empty_library_retrieves_nothing() {
    let emb = HashEmbedder::default();
    let lib = SkillLibrary::new(&emb);
    assert!(lib.retrieve(&RetrievalQuery::new("anything", ""), &emb).unwrap().is_empty());
}

#[test]
fn ties_go_to_the_older_skill() {
    let emb = HashEmbedder::default();
    let mut lib = SkillLibrary::new(&emb);
    lib.add_skill("fn b() { chat(\"b\"); }", "same words", &emb, 7).unwrap();
    lib.add_skill("fn a() { chat(\"a\"); }", "same words", &emb, 3).unwrap();
    let names: Vec<_> = lib
        .retrieve_text("same words", 5, &emb)
        .unwrap()
        .into_iter()
        .map(|(s, _)| s.name.clone())
        .collect();
    assert_eq!(names, ["a", "b"]);
}

#[test]
fn name_collisions_get_version_suffixes() {
    let emb = HashEmbedder::default();
    let mut lib = SkillLibrary::new(&emb);
    let src = "fn smeltFiveRawIron() {\n    smeltItem(\"raw_iron\", \"coal\", 5);\n}\n";
    lib.add_skill(src, "Smelt five raw iron.", &emb, 0).unwrap();
    assert_eq!(lib.len(), 1);
    let second = lib.add_skill(src, "Smelt five raw iron with coal.", &emb, 1).unwrap();
    assert_eq!(second.name, "smeltFiveRawIronV2");
    assert!(second.source.contains("fn smeltFiveRawIronV2()"));
    let third = lib.add_skill(src, "Again.", &emb, 2).unwrap();
    assert_eq!(third.name, "smeltFiveRawIronV3");
    // earlier entries are untouched
    assert_eq!(lib.skills()[0].name, "smeltFiveRawIron");
    assert_eq!(lib.skills()[0].source, src);
    let docs = lib.api_registry().render_api_docs();
    for name in ["smeltFiveRawIron()", "smeltFiveRawIronV2()", "smeltFiveRawIronV3()"] {
        assert!(docs.contains(name), "{name}");
    }
}

#[test]
fn invalid_sources_and_descriptions_are_rejected() {
    let emb = HashEmbedder::default();
    let mut lib = SkillLibrary::new(&emb);
    let err = lib.add_skill("fn f() { craftAcaciaAxe(); }", "x", &emb, 0).unwrap_err();
    assert!(matches!(err, LibraryError::Invalid(ref m) if m.contains("craftAcaciaAxe")), "{err}");
    assert!(matches!(lib.add_skill("fn f() {", "x", &emb, 0), Err(LibraryError::Invalid(_))));
    assert_eq!(
        lib.add_skill("fn f() { }", "  ", &emb, 0).unwrap_err(),
        LibraryError::EmptyDescription
    );
    let other = HashEmbedder::new(64);
    assert!(matches!(
        lib.add_skill("fn f() { }", "x", &other, 0),
        Err(LibraryError::EmbedderMismatch { .. })
    ));
    assert!(lib.is_empty());
}

fn round_trip(lib: &SkillLibrary) -> Result<SkillLibrary, LibraryError> {
    let files: BTreeMap<String, String> = lib.to_files().into_iter().collect();
    SkillLibrary::from_files(&files["manifest"], |name| files.get(name).cloned())
}

#[test]
fn persistence_round_trips() {
    let emb = HashEmbedder::default();
    let mut lib = SkillLibrary::new(&emb);
    for (i, (stem, desc)) in EIGHT.iter().take(3).enumerate() {
        lib.add_skill(&corpus_source(stem), desc, &emb, i as u64 * 10).unwrap();
    }
    let back = round_trip(&lib).unwrap();
    assert_eq!(back.len(), 3);
    assert_eq!(back.embedder_id(), lib.embedder_id());
    for (a, b) in lib.skills().iter().zip(back.skills()) {
        assert_eq!(a.name, b.name);
        assert_eq!(a.description, b.description);
        assert_eq!(a.source, b.source);
        assert_eq!(a.created_at, b.created_at);
        for (x, y) in a.embedding.components().iter().zip(b.embedding.components()) {
            assert!((x - y).abs() <= 1e-9);
        }
    }
    let q = RetrievalQuery::new("make planks", "I need 2 more planks");
    let names = |l: &SkillLibrary| {
        l.retrieve(&q, &emb)
            .unwrap()
            .into_iter()
            .map(|(s, sim)| (s.name.clone(), sim))
            .collect::<Vec<_>>()
    };
    assert_eq!(names(&lib), names(&back));
}

#[test]
fn corrupt_manifests_name_the_bad_entry() {
    let emb = HashEmbedder::default();
    let mut lib = SkillLibrary::new(&emb);
    lib.add_skill(&corpus_source("02_craftWoodenPlanks"), "Craft planks.", &emb, 0).unwrap();
    let files: BTreeMap<String, String> = lib.to_files().into_iter().collect();

    let missing = SkillLibrary::from_files(&files["manifest"], |name| {
        (!name.ends_with(".skill")).then(|| files.get(name).cloned()).flatten()
    })
    .unwrap_err();
    assert!(
        matches!(&missing, LibraryError::Corrupt { entry, reason } if entry == "craftWoodenPlanks" && reason.contains(".skill")),
        "{missing}"
    );

    let truncated = files["manifest"].replace(" ", "\t");
    let err = SkillLibrary::from_files(&truncated, |n| files.get(n).cloned()).unwrap_err();
    assert!(matches!(&err, LibraryError::Corrupt { entry, .. } if entry == "craftWoodenPlanks"), "{err}");

    let err = SkillLibrary::from_files(&files["manifest"], |n| {
        if n.ends_with(".desc.txt") {
            Some("tampered".into())
        } else {
            files.get(n).cloned()
        }
    })
    .unwrap_err();
    assert!(err.to_string().contains("digest"), "{err}");
}

#[test]
fn descriptions_come_from_the_auxiliary_role() {
    let mut scripted = ScriptedProvider::new();
    scripted.always(RoleTag::Describe, "  The function crafts oak planks from a log.  ");
    let mut gw = Gateway::new(Box::new(scripted));
    let src = corpus_source("02_craftWoodenPlanks");
    let text = describe_skill(&src, "craftWoodenPlanks", &mut gw).unwrap();
    assert_eq!(text, "The function crafts oak planks from a log.");
    assert_eq!(gw.requests()[0].role_tag, RoleTag::Describe);
    assert_eq!(gw.requests()[0].temperature, 0.0);
    assert!(gw.requests()[0].user_prompt.contains("fn craftWoodenPlanks()"));
    assert_eq!(gw.account().role(RoleTag::Describe).calls, 1);
    assert_eq!(gw.account().role(RoleTag::Codegen).calls, 0);
    assert_ne!(gw.models().model_for(RoleTag::Describe), gw.models().model_for(RoleTag::Codegen));

    let mut replay = Gateway::new(Box::new(ReplayProvider::new(gw.cassette(), true)));
    assert_eq!(describe_skill(&src, "craftWoodenPlanks", &mut replay).unwrap(), text);
}

#[test]
fn hash_embedder_prefers_paraphrases() {
    let emb = HashEmbedder::default();
    let base = emb.embed("craft stone pickaxe").unwrap();
    let close = emb.embed("craft a stone pickaxe").unwrap();
    let far = emb.embed("catch five fish").unwrap();
    assert!(base.cosine(&close) > base.cosine(&far));
    assert_eq!(emb.embed("a").unwrap(), emb.embed("a").unwrap());
    assert!(emb.embed("").is_err());
}

proptest! {
    #[test]
    fn embeddings_are_unit_length(text in "[a-zA-Z0-9 ]{1,60}") {
        prop_assume!(!text.trim().is_empty());
        let emb = HashEmbedder::default();
        let v = emb.embed(&text).unwrap();
        prop_assert_eq!(v.dimension(), emb.dimension());
        prop_assert!((v.norm() - 1.0).abs() <= 1e-9);
        prop_assert_eq!(v.cosine(&v), 1.0);
    }

    #[test]
    fn cosine_is_symmetric_and_bounded(
        a in prop::collection::vec(-10.0f64..10.0, 6),
        b in prop::collection::vec(-10.0f64..10.0, 6),
    ) {
        prop_assume!(a.iter().any(|x| *x != 0.0) && b.iter().any(|x| *x != 0.0));
        let a = EmbeddingVector::normalized(a).unwrap();
        let b = EmbeddingVector::normalized(b).unwrap();
        let ab = a.cosine(&b);
        prop_assert_eq!(ab, b.cosine(&a));
        prop_assert!((-1.0..=1.0).contains(&ab));
    }

    /// Adding skills never changes the ones already stored, and retrieval
    /// is repeatable.
    #[test]
    fn growth_is_monotone(picks in prop::collection::vec(0usize..8, 1..10), query in "[a-z ]{3,30}") {
        let emb = HashEmbedder::default();
        let mut lib = SkillLibrary::new(&emb);
        let mut before: Vec<(String, String)> = Vec::new();
        for (i, p) in picks.iter().enumerate() {
            let src = format!("fn pick{p}() {{\n    craftItem(\"stick\", {p});\n}}\n");
            lib.add_skill(&src, EIGHT[*p].1, &emb, i as u64).unwrap();
            let now: Vec<_> = lib.skills().iter().map(|s| (s.name.clone(), s.source.clone())).collect();
            prop_assert_eq!(&now[..before.len()], &before[..]);
            before = now;
        }
        prop_assert_eq!(lib.len(), picks.len());
        let a: Vec<_> = lib.retrieve_text(&query, 5, &emb).unwrap().into_iter().map(|(s, x)| (s.name.clone(), x)).collect();
        let b: Vec<_> = lib.retrieve_text(&query, 5, &emb).unwrap().into_iter().map(|(s, x)| (s.name.clone(), x)).collect();
        prop_assert_eq!(a, b);
    }
}
