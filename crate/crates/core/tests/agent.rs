//! The iterative prompting loop, self-verification and the baseline drivers,
//! driven by scripted models.

use voyager_core::agent::*;
use voyager_core::curriculum::CurriculumMode;
use voyager_core::embedding::{Embedder, HashEmbedder};
use voyager_core::events::RunEvent;
use voyager_core::library::SkillLibrary;
use voyager_core::llm::*;
use voyager_core::script::ErrorKind;
use voyager_core::task::{Proposer, Task};
use voyager_core::verifier::{self, parse_verdict, self_verify, UNPARSEABLE_CRITIQUE};
use voyager_core::world::{create_world, WorldConfig};

const FAIL_VERDICT: &str = "Reasoning: nothing changed\nSuccess: false\nCritique: mine some logs first";
const PASS_VERDICT: &str = "Reasoning: done\nSuccess: true\nCritique:";

fn fenced(src: &str) -> String {
    format!("Plan: try it\nCode:\n```skillscript\n{src}\n```")
}

fn agent(provider: impl ChatProvider + 'static, config: AgentConfig) -> Agent {
    let world = create_world(WorldConfig::with_seed(1)).unwrap();
    let embedder: Box<dyn Embedder> = Box::new(HashEmbedder::default());
    let library = SkillLibrary::new(embedder.as_ref());
    Agent::new(world, Gateway::new(Box::new(provider)), library, embedder, config)
}

fn quiet_config() -> AgentConfig {
    AgentConfig {
        task_context: false,
        ..AgentConfig::default()
    }
}

/// Answers every role; codegen cycles through `programs`.
fn responder(
    programs: Vec<String>,
    verdict: &'static str,
) -> impl FnMut(&ChatRequest) -> Result<String, GatewayError> {
    let mut i = 0;
    move |req| {
        Ok(match req.role_tag {
            RoleTag::Codegen => {
                let p = programs[i % programs.len()].clone();
                i += 1;
                p
            }
            RoleTag::Verifier => verdict.to_string(),
            RoleTag::Describe => "The function gathers wood.".to_string(),
            RoleTag::QaAsk => "Question 1: How to mine wood?\nConcept 1: wood".to_string(),
            RoleTag::QaAnswer => "Answer: punch a tree".to_string(),
            RoleTag::Curriculum => "Reasoning: start\nTask: Mine 1 wood log".to_string(),
            RoleTag::Decompose => "Subgoal 1: Mine 1 wood log".to_string(),
        })
    }
}

fn codegen_prompts(a: &Agent) -> Vec<ChatRequest> {
    a.gateway
        .requests()
        .iter()
        .filter(|r| r.role_tag == RoleTag::Codegen)
        .cloned()
        .collect()
}

fn task(d: &str) -> Task {
    Task::new(0, d, Proposer::Fixed)
}

#[test]
fn failing_episodes_stop_after_four_rounds() {
    let provider = FnProvider::new("fail", responder(vec!["no code at all".into()], FAIL_VERDICT));
    let tasks = vec!["Mine 3 wood log".to_string(), "Craft 1 crafting table".to_string()];
    let config = AgentConfig {
        ablation: AblationConfig {
            curriculum_mode: CurriculumMode::Manual { tasks },
            ..AblationConfig::default()
        },
        max_iterations: 12,
        ..quiet_config()
    };
    let mut a = agent(provider, config);
    a.run_lifelong();
    // the fixed list keeps retrying its first unfinished task
    assert_eq!(a.episodes().len(), 3);
    for ep in a.episodes() {
        assert_eq!(ep.rounds.len(), 4);
        assert_eq!(ep.final_state, EpisodeFinal::Abandoned);
        assert_eq!(ep.committed_skill, None);
        let rounds: Vec<u32> = ep.rounds.iter().map(|r| r.round).collect();
        assert_eq!(rounds, [1, 2, 3, 4]);
    }
    assert_eq!(a.curriculum.progress.failed_descriptions(), ["Mine 3 wood log"]);
    assert!(a.curriculum.progress.completed_descriptions().is_empty());
    assert_eq!(a.iteration(), 12);
    assert_eq!(a.gateway.account().role(RoleTag::Describe).calls, 0);
}

#[test]
fn first_round_prompt_has_no_history() {
    let provider = FnProvider::new("p", responder(vec![fenced("fn noop() { }")], PASS_VERDICT));
    let mut a = agent(provider, quiet_config());
    a.run_episode(task("Mine 1 wood log"));
    let first = &codegen_prompts(&a)[0];
    assert_eq!(first.temperature, 0.0);
    assert!(!first.user_prompt.contains("Code from the last round"));
    assert!(!first.user_prompt.contains("Chat log:"));
    assert!(first.user_prompt.contains("\nTask: Mine 1 wood log\n"));
    assert!(first.user_prompt.contains("Context: None"));
    assert!(first.system_prompt.contains("Control primitives:"));
    assert!(first.system_prompt.contains("No skills have been retrieved"));
}

#[test]
fn feedback_errors_and_critiques_reach_the_next_round() {
    let programs = vec![
        fenced("fn a() { craftItem(\"stick\", 1); }"),
        fenced("fn b() { craftAcaciaAxe(); }"),
        fenced("fn c() { }"),
    ];
    let provider = FnProvider::new("p", responder(programs, FAIL_VERDICT));
    let mut a = agent(provider, quiet_config());
    let ep = a.run_episode(task("Craft 1 stick"));
    assert_eq!(ep.rounds.len(), 4);
    let prompts = codegen_prompts(&a);
    let second = &prompts[1].user_prompt;
    assert!(second.contains("Code from the last round:\nfn a() { craftItem(\"stick\", 1); }"));
    assert!(second.contains("Chat log: I cannot make a stick because I need: 2 more planks"));
    assert!(second.contains("Execution error:\nNo error"));
    assert!(second.contains("Critique: mine some logs first"));
    let third = &prompts[2].user_prompt;
    assert!(third.contains("Execution error:\nStaticError: unknown callable"), "{third}");
    assert!(third.contains("craftAcaciaAxe"));
}

#[test]
fn env_feedback_ablation_drops_the_chat_log() {
    let programs = vec![fenced("fn a() { craftItem(\"stick\", 1); }")];
    let provider = FnProvider::new("p", responder(programs, FAIL_VERDICT));
    let mut config = quiet_config();
    config.ablation.include_env_feedback = false;
    let mut a = agent(provider, config);
    a.run_episode(task("Craft 1 stick"));
    let prompts = codegen_prompts(&a);
    for p in &prompts {
        assert!(!p.user_prompt.contains("Chat log:"));
        assert!(!p.user_prompt.contains("I cannot make"));
    }
    // the errors section stays
    assert!(prompts[1].user_prompt.contains("Execution error:"));
}

#[test]
fn extraction_errors_are_reported() {
    let none = extract_program("I think we should mine.").unwrap_err();
    assert_eq!(none.kind, ErrorKind::Extraction);
    let two = extract_program("```\nfn a() { }\n```\n```\nfn b() { }\n```").unwrap_err();
    assert_eq!(two.kind, ErrorKind::Extraction);
    assert!(two.message.contains("found 2"));
    let open = extract_program("```skillscript\nfn a() { }").unwrap_err();
    assert_eq!(open.kind, ErrorKind::Extraction);
    assert_eq!(
        extract_program("text\n```skillscript\nfn a() { }\n```\nmore").unwrap(),
        "fn a() { }"
    );

    let provider = FnProvider::new("p", responder(vec!["just prose".into()], FAIL_VERDICT));
    let mut a = agent(provider, quiet_config());
    let ep = a.run_episode(task("Mine 1 wood log"));
    assert_eq!(ep.rounds[0].program, None);
    assert_eq!(ep.rounds[0].outcome.steps_used, 0);
    let second = &codegen_prompts(&a)[1].user_prompt;
    assert!(second.contains("Code from the last round:\nNo code"));
    assert!(second.contains("ExtractionError: no code block"));
}

#[test]
fn only_verified_programs_become_skills() {
    let src = "fn gatherWood() { mineBlock(\"oak_log\", 1); }";
    let provider = FnProvider::new("p", responder(vec![fenced(src)], FAIL_VERDICT));
    let mut a = agent(provider, quiet_config());
    a.run_episode(task("Mine 1 wood log"));
    assert!(a.library.is_empty());

    let provider = FnProvider::new("p", responder(vec![fenced(src)], PASS_VERDICT));
    let mut a = agent(provider, quiet_config());
    let ep = a.run_episode(task("Mine 1 wood log"));
    assert_eq!(ep.final_state, EpisodeFinal::Success);
    assert_eq!(ep.rounds.len(), 1);
    assert_eq!(ep.committed_skill.as_deref(), Some("gatherWood"));
    assert_eq!(a.library.len(), 1);
    let skill = a.library.get("gatherWood").unwrap();
    assert_eq!(skill.description, "The function gathers wood.");
    assert_eq!(skill.source.trim(), src);
    assert!(a
        .events()
        .iter()
        .any(|e| matches!(e, RunEvent::SkillCommitted { name, .. } if name == "gatherWood")));
    assert_eq!(a.curriculum.progress.completed_descriptions(), ["Mine 1 wood log"]);

    // without the library nothing is stored
    let provider = FnProvider::new("p", responder(vec![fenced(src)], PASS_VERDICT));
    let mut config = quiet_config();
    config.ablation.use_skill_library = false;
    let mut a = agent(provider, config);
    let ep = a.run_episode(task("Mine 1 wood log"));
    assert_eq!(ep.final_state, EpisodeFinal::Success);
    assert!(a.library.is_empty());
}

#[test]
fn committed_skills_are_retrieved_later() {
    let src = "fn gatherWood() { mineBlock(\"oak_log\", 1); }";
    let provider = FnProvider::new("p", responder(vec![fenced(src)], PASS_VERDICT));
    let mut a = agent(provider, quiet_config());
    a.run_episode(task("Mine 1 wood log"));
    a.run_episode(task("Mine 2 wood log"));
    let second = &codegen_prompts(&a)[1].system_prompt;
    assert!(second.contains("Skills retrieved from the library:"));
    assert!(second.contains("// The function gathers wood.\nfn gatherWood()"));
    assert!(second.contains("- gatherWood()"));
}

#[test]
fn verifier_parses_reprompts_and_falls_back() {
    let v = parse_verdict("Reasoning: you have it\nSuccess: true\nCritique: none needed").unwrap();
    assert!(v.success);
    assert_eq!(v.critique, "");

    let state = create_world(WorldConfig::with_seed(1)).unwrap().observe();
    let mut p = ScriptedProvider::new();
    p.push(RoleTag::Verifier, "I am not sure")
        .push(RoleTag::Verifier, "Success: false\nCritique: craft planks first");
    let mut gw = Gateway::new(Box::new(p));
    let (v, fallback) = self_verify(&state, "Craft 1 stick", "", &mut gw).unwrap();
    assert!(!fallback);
    assert_eq!(v.critique, "craft planks first");
    assert_eq!(gw.account().role(RoleTag::Verifier).calls, 2);

    let mut p = ScriptedProvider::new();
    p.always(RoleTag::Verifier, "who knows");
    let mut gw = Gateway::new(Box::new(p));
    let (v, fallback) = self_verify(&state, "Craft 1 stick", "", &mut gw).unwrap();
    assert!(fallback && !v.success);
    assert_eq!(v.critique, UNPARSEABLE_CRITIQUE);
    assert_eq!(gw.account().role(RoleTag::Verifier).calls, 2);
}

#[test]
fn verifier_sees_state_without_recent_blocks_or_entities() {
    let state = create_world(WorldConfig::with_seed(1)).unwrap().observe();
    let prompt = verifier::verifier_user_prompt(&state, "Craft 1 stick", "");
    assert!(prompt.contains("Inventory"));
    assert!(prompt.contains("Chests"));
    assert!(prompt.contains("Nearby blocks"));
    assert!(!prompt.contains("Other blocks that are recently seen"));
    assert!(!prompt.contains("Nearby entities"));
    assert!(prompt.contains("Task: Craft 1 stick"));
}

#[test]
fn rule_check_compares_inventories() {
    let mut w = create_world(WorldConfig::with_seed(1)).unwrap();
    let before = w.observe();
    w.give("oak_log", 3);
    let after = w.observe();
    let reg = w.registry();
    assert_eq!(verifier::rule_check(reg, &before, &after, "Mine 3 wood log"), Some(true));
    assert_eq!(verifier::rule_check(reg, &before, &after, "Mine 4 wood log"), Some(false));
    assert_eq!(verifier::rule_check(reg, &before, &after, "Befriend a dolphin"), None);
}

fn fixed_config(kind: AgentKind, iterations: u64) -> AgentConfig {
    AgentConfig {
        agent: kind,
        max_iterations: iterations,
        ..quiet_config()
    }
}

#[test]
fn react_runs_cycles_of_one_plus_three() {
    let programs = vec![fenced("fn a() { craftItem(\"stick\", 1); }"), fenced("fn b() { craftAcaciaAxe(); }")];
    let provider = FnProvider::new("p", responder(programs, FAIL_VERDICT));
    let mut a = agent(provider, fixed_config(AgentKind::React, 8));
    a.run();
    assert_eq!(a.episodes().len(), 2);
    for ep in a.episodes() {
        assert_eq!(ep.rounds.len(), 4);
        assert_eq!(ep.task.description, OPEN_ENDED_TASK);
        assert!(ep.rounds.iter().all(|r| r.verdict.is_none()));
    }
    assert_eq!(a.gateway.account().role(RoleTag::Verifier).calls, 0);
    let prompts = codegen_prompts(&a);
    assert_eq!(prompts.len(), 8);
    // the first prompt of each cycle starts fresh
    for i in [0, 4] {
        assert!(!prompts[i].user_prompt.contains("Code from the last round"));
    }
    for i in [1, 2, 3, 5, 6, 7] {
        let p = &prompts[i].user_prompt;
        assert!(p.contains("Chat log:"));
        assert!(!p.contains("Execution error:"));
        assert!(!p.contains("Critique:"));
    }
}

#[test]
fn reflexion_threads_errors_and_critiques() {
    let programs = vec![fenced("fn a() { craftAcaciaAxe(); }")];
    let provider = FnProvider::new("p", responder(programs, FAIL_VERDICT));
    let mut a = agent(provider, fixed_config(AgentKind::Reflexion, 4));
    a.run();
    assert_eq!(a.episodes().len(), 1);
    assert_eq!(a.gateway.account().role(RoleTag::Verifier).calls, 4);
    let prompts = codegen_prompts(&a);
    for p in &prompts[1..] {
        assert!(p.user_prompt.contains("Chat log:"));
        assert!(p.user_prompt.contains("Execution error:\nStaticError: unknown callable"));
        assert!(p.user_prompt.contains("Critique: mine some logs first"));
    }
}

#[test]
fn autogpt_replans_after_three_stalled_subgoals() {
    let provider = FnProvider::new("p", move |req: &ChatRequest| {
        Ok(match req.role_tag {
            RoleTag::Decompose => {
                "Subgoal 1: Look around\nSubgoal 2: Wave\nSubgoal 3: Think\nSubgoal 4: Rest\nSubgoal 5: Sing".to_string()
            }
            // runs cleanly but never yields anything new
            RoleTag::Codegen => fenced("fn idle() { chat(\"thinking\"); }"),
            _ => FAIL_VERDICT.to_string(),
        })
    });
    let mut a = agent(provider, fixed_config(AgentKind::AutoGpt, 9));
    a.run();
    let mut between = Vec::new();
    let mut count = 0;
    for e in a.events() {
        match e {
            RunEvent::Replanned { .. } => {
                between.push(count);
                count = 0;
            }
            RunEvent::TaskProposed { .. } => count += 1,
            _ => {}
        }
    }
    between.push(count);
    // nothing before the first plan, three subgoals per plan after that
    assert_eq!(between, [0, 3, 3, 3]);
    assert_eq!(a.iteration(), 9);
    assert_eq!(a.gateway.account().role(RoleTag::Verifier).calls, 0);
    let p = &codegen_prompts(&a)[0].user_prompt;
    assert!(p.contains("Task: Look around"));
}

#[test]
fn autogpt_progress_resets_the_stall_count() {
    let mut n = 0;
    let provider = FnProvider::new("p", move |req: &ChatRequest| {
        Ok(match req.role_tag {
            RoleTag::Decompose => {
                "Subgoal 1: Get dirt\nSubgoal 2: Wave\nSubgoal 3: Think\nSubgoal 4: Rest\nSubgoal 5: Sing".to_string()
            }
            RoleTag::Codegen => {
                n += 1;
                if n == 1 {
                    fenced("fn dig() { mineBlock(\"dirt\", 1); }")
                } else {
                    fenced("fn idle() { chat(\"thinking\"); }")
                }
            }
            _ => FAIL_VERDICT.to_string(),
        })
    });
    let mut a = agent(provider, fixed_config(AgentKind::AutoGpt, 4));
    a.run();
    assert!(a.items_discovered().contains("dirt"));
    let replans = a
        .events()
        .iter()
        .filter(|e| matches!(e, RunEvent::Replanned { .. }))
        .count();
    // one productive subgoal then three stalls, all under the first plan
    assert_eq!(replans, 1);
    assert_eq!(a.episodes().len(), 4);
}
