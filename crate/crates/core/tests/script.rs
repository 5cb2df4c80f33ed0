use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use proptest::prelude::*;
use voyager_core::script::ast::{Call, Expr, Stmt};
use voyager_core::script::*;
use voyager_core::world::*;

fn corpus() -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/corpus");
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "skill"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            (
                p.file_stem().unwrap().to_string_lossy().into_owned(),
                fs::read_to_string(&p).unwrap(),
            )
        })
        .collect()
}

/// Registry holding every corpus skill. Files are numbered so that callees
/// come before their callers.
fn corpus_registry() -> ApiRegistry {
    let mut reg = ApiRegistry::with_primitives();
    for (file, src) in corpus() {
        let f = compile(&src, &reg).unwrap_or_else(|e| panic!("{file}: {e}"));
        reg.add_skill(Arc::new(f), &file);
    }
    reg
}

fn world(seed: u64) -> World {
    create_world(WorldConfig::with_seed(seed)).unwrap()
}

/// An air cell next to the agent with solid ground below it.
fn free_cell(w: &World) -> BlockPos {
    let p = w.position();
    for d in 1..6 {
        for dy in -1..=2 {
            for (dx, dz) in [(d, 0), (-d, 0), (0, d), (0, -d)] {
                let c = BlockPos::new(p.x + dx, p.y + dy, p.z + dz);
                let below = BlockPos::new(c.x, c.y - 1, c.z);
                if w.block_at(c) == "air" && w.block_at(below) != "air" {
                    return c;
                }
            }
        }
    }
    panic!("no free cell near {p:?}");
}

#[test]
fn corpus_has_twenty_programs_that_round_trip() {
    let files = corpus();
    assert_eq!(files.len(), 20);
    for (file, src) in &files {
        let ast = parse(src).unwrap_or_else(|e| panic!("{file}: {e}"));
        let printed = print(&ast);
        let again = parse(&printed).unwrap_or_else(|e| panic!("{file} reprint: {e}\n{printed}"));
        assert_eq!(ast, again, "{file}");
        assert_eq!(print(&again), printed, "{file}: printing is not a fixed point");
        assert!(ast.params.is_empty(), "{file}");
    }
    let reg = corpus_registry();
    assert_eq!(reg.skill_names().count(), 20);
    for name in ["craftWoodenPlanks", "mineTenCobbledDeepslateBelowY0", "smeltFiveRawIronV2"] {
        assert!(reg.skill(name).is_some(), "{name}");
    }
}

#[test]
fn empty_function_parses() {
    let f = parse("fn noop() { }").unwrap();
    assert_eq!(f.name, "noop");
    assert!(f.params.is_empty());
    assert!(f.body.is_empty());
}

#[test]
fn unbalanced_brace_reports_its_line() {
    let src = "fn f() {\n    chat(\"a\");\n    if true {\n        chat(\"b\");\n}\n";
    let err = parse(src).unwrap_err();
    assert_eq!(err.span.line, 6);
    assert!(err.expected.iter().any(|e| e.contains('}')), "{err:?}");

    let src = "fn f() {\n    chat(\"a\");\n    }\n}\n";
    let err = parse(src).unwrap_err();
    assert_eq!(err.span.line, 4);
}

#[test]
fn function_count_is_exactly_one() {
    assert!(parse("").is_err());
    assert!(parse("// nothing here\n").is_err());
    let err = parse("fn a() { }\nfn b() { }").unwrap_err();
    assert_eq!(err.span.line, 2);
}

#[test]
fn other_syntax_errors() {
    for src in [
        "fn f() { let = 3; }",
        "fn f() { repeat n { } }",
        "fn f() { chat(\"x\") }",
        "fn f() { if { } }",
        "fn f() { \"unterminated ); }",
        "fn () { }",
    ] {
        let err = parse(src).unwrap_err();
        assert_eq!(err.span.line, 1, "{src}");
        assert!(err.span.col > 0, "{src}");
    }
}

#[test]
fn unknown_callable_is_a_static_error() {
    let reg = ApiRegistry::with_primitives();
    let f = parse("fn f() {\n    craftAcaciaAxe();\n}").unwrap();
    let errs = analyze(&f, &reg);
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].kind, StaticErrorKind::UnknownCallable);
    assert!(errs[0].message.contains("unknown callable"), "{}", errs[0].message);
    assert!(errs[0].message.contains("craftAcaciaAxe"));
    assert_eq!(errs[0].span.line, 2);

    let e = compile("fn f() {\n    craftAcaciaAxe();\n}", &reg).unwrap_err();
    assert_eq!(e.kind, ErrorKind::Static);
    assert_eq!(e.line, 2);
}

#[test]
fn arity_and_misuse_errors() {
    let reg = ApiRegistry::with_primitives();
    let kinds = |src: &str| {
        analyze(&parse(src).unwrap(), &reg)
            .into_iter()
            .map(|e| e.kind)
            .collect::<Vec<_>>()
    };
    assert_eq!(kinds("fn f() { mineBlock(); }"), [StaticErrorKind::Arity]);
    assert_eq!(kinds("fn f() { mineBlock(\"a\", 1, 2); }"), [StaticErrorKind::Arity]);
    assert_eq!(kinds("fn f() { chat(x); }"), [StaticErrorKind::UnknownVariable]);
    assert_eq!(kinds("fn f(a) { }"), [StaticErrorKind::EntryParams]);
    assert_eq!(kinds("fn f() { repeat 0 { } }"), [StaticErrorKind::RepeatBound]);
    assert!(kinds("fn f() { let n = 1; mineBlock(\"stone\", n); }").is_empty());
}

#[test]
fn call_cycles_are_named() {
    let mut reg = ApiRegistry::with_primitives();
    // B is registered against a placeholder A, then A is replaced by a
    // version that calls B
    let a0 = parse("fn A() { chat(\"a\"); }").unwrap();
    reg.add_skill(Arc::new(a0), "a");
    let b = compile("fn B() { A(); }", &reg).unwrap();
    reg.add_skill(Arc::new(b), "b");
    let a = parse("fn A() { B(); }").unwrap();
    assert_eq!(
        find_cycle(&a, &reg),
        Some(vec!["A".to_string(), "B".into(), "A".into()])
    );
    let errs = analyze(&a, &reg);
    assert_eq!(errs.len(), 1);
    assert_eq!(errs[0].kind, StaticErrorKind::Recursion);
    assert!(errs[0].message.contains("A -> B -> A"), "{}", errs[0].message);

    let direct = parse("fn loopy() { loopy(); }").unwrap();
    assert_eq!(
        find_cycle(&direct, &reg),
        Some(vec!["loopy".to_string(), "loopy".into()])
    );
}

#[test]
fn valid_programs_have_no_static_errors() {
    let reg = corpus_registry();
    for (file, src) in corpus() {
        assert_eq!(analyze(&parse(&src).unwrap(), &reg), [], "{file}");
    }
}

#[test]
fn wooden_pickaxe_program_composes() {
    let reg = ApiRegistry::with_primitives();
    let mut w = world(5);
    w.give("oak_log", 3);
    let table = free_cell(&w);
    let src = format!(
        "fn craftWoodenPickaxe() {{
    craftItem(\"oak_planks\", 3);
    craftItem(\"crafting_table\", 1);
    placeItem(\"crafting_table\", {}, {}, {});
    craftItem(\"stick\", 1);
    craftItem(\"wooden_pickaxe\", 1);
}}",
        table.x, table.y, table.z
    );
    let f = compile(&src, &reg).unwrap();
    let out = execute(&f, &mut w, &reg, &ExecConfig::default());
    assert_eq!(out.error, None, "{:?}", out.feedback);
    assert_eq!(out.steps_used, 5);
    let names: Vec<_> = out.primitive_trace.iter().map(|t| t.primitive.as_str()).collect();
    assert_eq!(
        names,
        ["craftItem", "craftItem", "placeItem", "craftItem", "craftItem"]
    );
    // 3 logs -> 12 planks; table 4, sticks 2, pickaxe 3
    assert_eq!(out.end_state.count("wooden_pickaxe"), 1);
    assert_eq!(out.end_state.count("oak_planks"), 3);
    assert_eq!(out.end_state.count("stick"), 2);
    assert_eq!(out.end_state.count("oak_log"), 0);
    // the placed table is picked back up afterwards
    assert_eq!(out.end_state.count("crafting_table"), 1);
    assert_eq!(w.block_at(table), "air");
}

#[test]
fn unbounded_work_hits_the_budget() {
    let reg = ApiRegistry::with_primitives();
    let f = compile(
        "fn spin() {\n    repeat 1000000000 {\n        craftItem(\"stick\", 1);\n    }\n}",
        &reg,
    )
    .unwrap();
    let mut w = world(1);
    let out = execute(&f, &mut w, &reg, &ExecConfig::default());
    let err = out.error.expect("budget error");
    assert_eq!(err.kind, ErrorKind::BudgetExceeded);
    assert_eq!(out.steps_used, DEFAULT_BUDGET);
    assert_eq!(out.primitive_trace.len(), DEFAULT_BUDGET as usize);
    assert_eq!(err.line, 3);

    let small = ExecConfig {
        budget: 7,
        ..ExecConfig::default()
    };
    let out = execute(&f, &mut world(1), &reg, &small);
    assert_eq!(out.error.unwrap().kind, ErrorKind::BudgetExceeded);
    assert_eq!(out.steps_used, 7);
}

#[test]
fn runtime_errors_carry_location_and_trace() {
    let mut reg = ApiRegistry::with_primitives();
    let inner = compile("fn inner() {\n    mineBlock(\"unobtainium\", 1);\n}", &reg).unwrap();
    reg.add_skill(Arc::new(inner), "bad");
    let outer = compile("fn outer() {\n    chat(\"start\");\n    inner();\n}", &reg).unwrap();
    let out = execute(&outer, &mut world(1), &reg, &ExecConfig::default());
    let err = out.error.unwrap();
    assert_eq!(err.kind, ErrorKind::Runtime);
    assert!(err.message.contains("unobtainium"), "{}", err.message);
    assert_eq!(err.line, 2);
    let frames: Vec<_> = err.trace.iter().map(|f| (f.function.as_str(), f.line)).collect();
    assert_eq!(frames[0].0, "outer");
    assert_eq!(frames.last().unwrap().0, "inner");
    assert_eq!(out.feedback, ["start"]);
    let shown = err.to_string();
    assert!(shown.starts_with("RuntimeError: "), "{shown}");
    assert!(shown.contains("in inner"), "{shown}");
}

#[test]
fn api_docs_are_canonical_and_grow_by_one_signature() {
    let mut reg = ApiRegistry::with_primitives();
    let base = reg.render_api_docs();
    assert_eq!(base, reg.render_api_docs());
    let order: Vec<_> = reg.primitives().iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        order,
        [
            "exploreUntil",
            "mineBlock",
            "craftItem",
            "placeItem",
            "smeltItem",
            "killMob",
            "getItemFromChest",
            "depositItemIntoChest",
            "goto",
            "equip",
            "consume",
        ]
    );
    let mut last = 0;
    for name in &order {
        let at = base.find(&format!("- {name}(")).unwrap_or_else(|| panic!("{name}"));
        assert!(at >= last, "{name} out of order");
        last = at;
    }

    let f = parse("fn craftStick() { craftItem(\"stick\", 1); }").unwrap();
    reg.add_skill(Arc::new(f), "Craft sticks.");
    let grown = reg.render_api_docs();
    assert!(grown.starts_with(&base));
    let extra: Vec<_> = grown[base.len()..].lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(extra, ["Skills:", "- craftStick()"]);
    assert_eq!(grown, reg.render_api_docs());
}

/// Replaces every skill call with the callee's body, renaming its locals so
/// inlined bodies cannot see each other's variables.
fn inline(body: &[Stmt], reg: &ApiRegistry, counter: &mut usize) -> Vec<Stmt> {
    fn rename_expr(e: &Expr, prefix: &str) -> Expr {
        match e {
            Expr::Var(n, s) => Expr::Var(format!("{prefix}{n}"), *s),
            Expr::Unary(op, a) => Expr::Unary(*op, Box::new(rename_expr(a, prefix))),
            Expr::Binary(op, a, b) => Expr::Binary(
                *op,
                Box::new(rename_expr(a, prefix)),
                Box::new(rename_expr(b, prefix)),
            ),
            Expr::Call(c) => Expr::Call(Call {
                name: c.name.clone(),
                args: c.args.iter().map(|a| rename_expr(a, prefix)).collect(),
                span: c.span,
            }),
            other => other.clone(),
        }
    }
    fn rename(body: &[Stmt], prefix: &str) -> Vec<Stmt> {
        body.iter()
            .map(|s| match s {
                Stmt::Let { name, value, span } => Stmt::Let {
                    name: format!("{prefix}{name}"),
                    value: rename_expr(value, prefix),
                    span: *span,
                },
                Stmt::If {
                    branches,
                    otherwise,
                    span,
                } => Stmt::If {
                    branches: branches
                        .iter()
                        .map(|(c, b)| (rename_expr(c, prefix), rename(b, prefix)))
                        .collect(),
                    otherwise: otherwise.as_ref().map(|b| rename(b, prefix)),
                    span: *span,
                },
                Stmt::Repeat { count, body, span } => Stmt::Repeat {
                    count: *count,
                    body: rename(body, prefix),
                    span: *span,
                },
                Stmt::Chat { args, span } => Stmt::Chat {
                    args: args.iter().map(|a| rename_expr(a, prefix)).collect(),
                    span: *span,
                },
                Stmt::Call(c) => match rename_expr(&Expr::Call(c.clone()), prefix) {
                    Expr::Call(c) => Stmt::Call(c),
                    _ => unreachable!(),
                },
            })
            .collect()
    }
    let mut out = Vec::new();
    for s in body {
        match s {
            Stmt::Call(c) if reg.skill(&c.name).is_some() => {
                *counter += 1;
                let callee = reg.skill(&c.name).unwrap();
                let renamed = rename(&callee.body, &format!("v{counter}_"));
                out.extend(inline(&renamed, reg, counter));
            }
            Stmt::If {
                branches,
                otherwise,
                span,
            } => out.push(Stmt::If {
                branches: branches
                    .iter()
                    .map(|(c, b)| (c.clone(), inline(b, reg, counter)))
                    .collect(),
                otherwise: otherwise.as_ref().map(|b| inline(b, reg, counter)),
                span: *span,
            }),
            Stmt::Repeat { count, body, span } => out.push(Stmt::Repeat {
                count: *count,
                body: inline(body, reg, counter),
                span: *span,
            }),
            other => out.push(other.clone()),
        }
    }
    out
}

fn assert_same_run(calls: &[&str], seed: u64, reg: &ApiRegistry, prep: impl Fn(&mut World)) {
    let body: String = calls.iter().map(|c| format!("    {c}();\n")).collect();
    let composed = compile(&format!("fn composed() {{\n{body}}}"), reg).unwrap();
    let mut flat = composed.clone();
    flat.body = inline(&composed.body, reg, &mut 0);
    assert!(flat.body.iter().all(|s| !matches!(s, Stmt::Call(c) if reg.skill(&c.name).is_some())));
    let flat = compile(&print(&flat), &ApiRegistry::with_primitives()).unwrap();

    let mut a = world(seed);
    let mut b = world(seed);
    prep(&mut a);
    prep(&mut b);
    let x = execute(&composed, &mut a, reg, &ExecConfig::default());
    let y = execute(&flat, &mut b, &ApiRegistry::with_primitives(), &ExecConfig::default());
    assert_eq!(x.end_state, y.end_state, "{calls:?}");
    assert_eq!(x.primitive_trace, y.primitive_trace, "{calls:?}");
    assert_eq!(x.feedback, y.feedback, "{calls:?}");
    assert_eq!(x.steps_used, y.steps_used, "{calls:?}");
    assert_eq!(x.error.map(|e| (e.kind, e.message)), y.error.map(|e| (e.kind, e.message)));
    assert_eq!(a.events(), b.events(), "{calls:?}");
}

#[test]
fn library_calls_match_the_inlined_program() {
    let reg = corpus_registry();
    assert_same_run(&["craftWoodenPlanks", "craftStick"], 3, &reg, |w| w.give("oak_log", 2));
    assert_same_run(&["craftWoodenPlanks", "craftStick"], 3, &reg, |_| {});
}

fn corpus_names() -> Vec<String> {
    corpus_registry().skill_names().cloned().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_corpus_compositions_match_inlining(
        picks in prop::collection::vec(0usize..20, 1..4),
        seed in 0u64..50,
        logs in 0u32..6,
    ) {
        let names = corpus_names();
        let calls: Vec<&str> = picks.iter().map(|i| names[*i].as_str()).collect();
        let reg = corpus_registry();
        assert_same_run(&calls, seed, &reg, |w| w.give("oak_log", logs));
    }

    #[test]
    fn steps_never_exceed_the_static_bound(
        program in program_strategy(),
        seed in 0u64..50,
    ) {
        let reg = corpus_registry();
        let f = compile(&program, &reg).unwrap();
        let bound = static_bound(&f, &reg);
        let mut w = world(seed);
        w.give("oak_log", 4);
        let out = execute(&f, &mut w, &reg, &ExecConfig::default());
        prop_assert!(u64::from(out.steps_used) <= bound, "{} > {bound}\n{program}", out.steps_used);
        prop_assert!(out.steps_used <= DEFAULT_BUDGET);
    }
}

fn stmt_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["oak_planks", "stick", "crafting_table", "torch"])
            .prop_map(|i| format!("craftItem(\"{i}\", 1);")),
        prop::sample::select(vec!["oak_log", "dirt", "stone"])
            .prop_map(|b| format!("mineBlock(\"{b}\", 1);")),
        prop::sample::select(vec!["craftWoodenPlanks", "craftStick", "eatWhenHungry"])
            .prop_map(|s| format!("{s}();")),
        Just("chat(\"hi \" + inventory_count(\"stick\"));".to_string()),
        Just("exploreUntil(\"+x\", 5, block_nearby(\"sand\"));".to_string()),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (1i64..4, prop::collection::vec(inner.clone(), 1..3))
                .prop_map(|(n, b)| format!("repeat {n} {{ {} }}", b.join(" "))),
            (
                prop::sample::select(vec!["oak_planks", "stick", "oak_log"]),
                0i64..5,
                prop::collection::vec(inner.clone(), 1..3),
                prop::collection::vec(inner, 0..2),
            )
                .prop_map(|(item, n, then, otherwise)| format!(
                    "if inventory_count(\"{item}\") > {n} {{ {} }} else {{ {} }}",
                    then.join(" "),
                    otherwise.join(" ")
                )),
        ]
    })
}

fn program_strategy() -> impl Strategy<Value = String> {
    prop::collection::vec(stmt_strategy(), 1..5)
        .prop_map(|body| format!("fn generated() {{ {} }}", body.join(" ")))
}
