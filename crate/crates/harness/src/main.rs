use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use voyager_core::agent::{AgentKind, ZERO_SHOT_MAX_ITERATIONS};
use voyager_core::library::SkillLibrary;
use voyager_core::zero_shot::{run_zero_shot, ZeroShotConfig};
use voyager_harness::config::{EmbedderConfig, LlmMode, RunConfig};
use voyager_harness::runner::{execute, RunOptions};
use voyager_harness::setup::{build_embedder, build_gateway};
use voyager_harness::store::{load_events, load_library, RunDir};

#[derive(Parser)]
#[command(name = "voyager", version, about = "Lifelong-learning agent for a voxel crafting world")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an agent in a fresh world.
    Run {
        /// voyager, react, reflexion or autogpt
        #[arg(long)]
        agent: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_iterations: Option<u64>,
        #[arg(long, value_enum)]
        llm: Option<LlmMode>,
        /// Cassette for replay mode.
        #[arg(long)]
        cassette: Option<PathBuf>,
        /// Start from an existing skill library.
        #[arg(long)]
        library: Option<PathBuf>,
        /// Serve the console API on this port while running.
        #[arg(long)]
        serve: Option<u16>,
        #[arg(long, default_value = "run")]
        run_dir: PathBuf,
    },
    /// Evaluate a stored library.
    Eval {
        #[command(subcommand)]
        command: EvalCommand,
    },
    /// Inspect a stored library.
    Skills {
        #[command(subcommand)]
        command: SkillsCommand,
    },
    /// Print metrics.csv for a finished run.
    Metrics {
        #[arg(long)]
        run: PathBuf,
    },
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Solve one unseen task in a fresh world. The library is never modified.
    ZeroShot {
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long)]
        task: String,
        #[arg(long, default_value_t = ZERO_SHOT_MAX_ITERATIONS)]
        max_iterations: u64,
        #[arg(long, default_value_t = 1_000_003)]
        seed: u64,
        #[arg(long, value_enum, default_value = "scripted")]
        llm: LlmMode,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the evaluation's event log here.
        #[arg(long)]
        events: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SkillsCommand {
    List {
        #[arg(long)]
        library: PathBuf,
    },
    Show {
        #[arg(long)]
        library: PathBuf,
        name: String,
    },
    /// Top-k skills for a free-text query.
    Query {
        #[arg(long)]
        library: PathBuf,
        #[arg(short, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        text: String,
    },
}

fn load_config(path: Option<&PathBuf>) -> anyhow::Result<RunConfig> {
    Ok(match path {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    })
}

/// An embedder compatible with `library`, using the config's kind.
fn embedder_for(library: &SkillLibrary, config: &RunConfig) -> Box<dyn voyager_core::embedding::Embedder> {
    let e = EmbedderConfig {
        dimension: library.dimension(),
        ..config.embedder.clone()
    };
    build_embedder(&e, &config.llm)
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            agent,
            config,
            seed,
            max_iterations,
            llm,
            cassette,
            library,
            serve,
            run_dir,
        } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(a) = agent {
                cfg.agent = AgentKind::parse(&a).with_context(|| format!("unknown agent `{a}`"))?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(m) = max_iterations {
                cfg.max_iterations = m;
            }
            if let Some(l) = llm {
                cfg.llm.mode = l;
            }
            if let Some(c) = cassette {
                cfg.llm.cassette = Some(c.display().to_string());
            }
            let library = library.map(|d| load_library(&d)).transpose()?;
            let serve = serve.map(|port| SocketAddr::from(([127, 0, 0, 1], port)));
            let summary = execute(
                &cfg,
                RunOptions {
                    run_dir: &run_dir,
                    library,
                    serve,
                },
            )?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        Command::Eval {
            command:
                EvalCommand::ZeroShot {
                    library,
                    task,
                    max_iterations,
                    seed,
                    llm,
                    config,
                    events,
                },
        } => {
            let mut cfg = load_config(config.as_ref())?;
            cfg.llm.mode = llm;
            let library = match library {
                Some(d) => load_library(&d)?,
                None => SkillLibrary::new(build_embedder(&cfg.embedder, &cfg.llm).as_ref()),
            };
            let embedder = embedder_for(&library, &cfg);
            let gateway = build_gateway(&cfg.llm)?;
            let mut zs = ZeroShotConfig::new(seed);
            zs.max_iterations = max_iterations;
            let result = run_zero_shot(&library, embedder, gateway, &task, &zs)?;
            if let Some(path) = events {
                std::fs::write(&path, voyager_core::events::to_log(&result.events))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            for s in &result.subgoals {
                println!(
                    "{} {} ({} attempts)",
                    if s.success { "done" } else { "fail" },
                    s.subgoal,
                    s.attempts
                );
            }
            println!("{}: {}", result.task, result.report());
        }
        Command::Skills { command } => match command {
            SkillsCommand::List { library } => {
                let lib = load_library(&library)?;
                for s in lib.skills() {
                    println!("{}\t{}", s.name, s.description.lines().next().unwrap_or(""));
                }
            }
            SkillsCommand::Show { library, name } => {
                let lib = load_library(&library)?;
                let Some(s) = lib.get(&name) else {
                    bail!("no skill named `{name}`");
                };
                println!("// {}\n{}", s.description, s.source);
            }
            SkillsCommand::Query {
                library,
                k,
                config,
                text,
            } => {
                let cfg = load_config(config.as_ref())?;
                let lib = load_library(&library)?;
                let embedder = embedder_for(&lib, &cfg);
                for (s, score) in lib.retrieve_text(&text, k, embedder.as_ref())? {
                    println!("{score:.4}\t{}", s.name);
                }
            }
        },
        Command::Metrics { run } => {
            let dir = RunDir::open(&run);
            let events = load_events(&dir.events_path())?;
            print!("{}", voyager_core::metrics::metrics_csv(&events));
        }
    }
    Ok(())
}
