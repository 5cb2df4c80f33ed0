//! Filesystem persistence: skill libraries, cassettes and run directories.
//!
//! A run directory holds `events.log` (line-delimited JSON, appended as the
//! run goes), `skills/` (the library), `prompts/` (templates and every
//! assembled request), `metrics.csv`, `cassette.jsonl` and `usage.json`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use voyager_core::agent::{Agent, Snapshot, Supervisor};
use voyager_core::events::{parse_log, RunEvent};
use voyager_core::library::{LibraryError, SkillLibrary};
use voyager_core::llm::{Cassette, CassetteError, ChatRequest};
use voyager_core::metrics::metrics_csv;
use voyager_core::prompts;
use voyager_core::verifier::VerificationResult;

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Library { path: PathBuf, source: LibraryError },
    #[error("{path}: {source}")]
    Cassette { path: PathBuf, source: CassetteError },
    #[error("{path} line {line}: {source}")]
    EventLog {
        path: PathBuf,
        line: usize,
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), StoreError> {
    fs::write(path, contents).map_err(io_err(path))
}

fn read_file(path: &Path) -> Result<String, StoreError> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn save_library(dir: &Path, library: &SkillLibrary) -> Result<(), StoreError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    for (name, contents) in library.to_files() {
        write_file(&dir.join(name), &contents)?;
    }
    Ok(())
}

pub fn load_library(dir: &Path) -> Result<SkillLibrary, StoreError> {
    let manifest_path = dir.join("manifest");
    let manifest = read_file(&manifest_path)?;
    SkillLibrary::from_files(&manifest, |name| fs::read_to_string(dir.join(name)).ok()).map_err(
        |source| StoreError::Library {
            path: manifest_path,
            source,
        },
    )
}

pub fn load_cassette(path: &Path) -> Result<Cassette, StoreError> {
    Cassette::from_jsonl(&read_file(path)?).map_err(|source| StoreError::Cassette {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_events(path: &Path) -> Result<Vec<RunEvent>, StoreError> {
    parse_log(&read_file(path)?).map_err(|(line, source)| StoreError::EventLog {
        path: path.to_path_buf(),
        line,
        source,
    })
}

const TEMPLATES: [(&str, &str); 7] = [
    ("curriculum", prompts::CURRICULUM),
    ("curriculum_qa_ask", prompts::QA_ASK),
    ("curriculum_qa_answer", prompts::QA_ANSWER),
    ("codegen", prompts::CODEGEN),
    ("describe", prompts::DESCRIBE),
    ("verifier", prompts::VERIFIER),
    ("decompose", prompts::DECOMPOSE),
];

/// Renders one assembled request the way it was sent.
pub fn format_request(req: &ChatRequest) -> String {
    format!(
        "role: {}\ntemperature: {:?}\ndigest: {}\n--- system ---\n{}\n--- user ---\n{}\n",
        req.role_tag,
        req.temperature,
        req.digest(),
        req.system_prompt,
        req.user_prompt
    )
}

#[derive(Debug, Clone)]
pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    /// Creates the directory tree and writes the prompt templates.
    pub fn create(root: &Path) -> Result<RunDir, StoreError> {
        let dir = RunDir {
            root: root.to_path_buf(),
        };
        for sub in [dir.root.clone(), dir.skills_dir(), dir.prompts_dir()] {
            fs::create_dir_all(&sub).map_err(io_err(&sub))?;
        }
        for (name, text) in TEMPLATES {
            let path = dir
                .prompts_dir()
                .join(format!("{name}.{}.txt", prompts::TEMPLATE_VERSION));
            write_file(&path, text)?;
        }
        Ok(dir)
    }

    pub fn open(root: &Path) -> RunDir {
        RunDir {
            root: root.to_path_buf(),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn events_path(&self) -> PathBuf {
        self.root.join("events.log")
    }

    pub fn skills_dir(&self) -> PathBuf {
        self.root.join("skills")
    }

    pub fn prompts_dir(&self) -> PathBuf {
        self.root.join("prompts")
    }

    pub fn metrics_path(&self) -> PathBuf {
        self.root.join("metrics.csv")
    }

    pub fn cassette_path(&self) -> PathBuf {
        self.root.join("cassette.jsonl")
    }

    pub fn usage_path(&self) -> PathBuf {
        self.root.join("usage.json")
    }

    pub fn event_log(&self) -> Result<EventLog, StoreError> {
        EventLog::create(&self.events_path())
    }

    /// Writes everything derived from a finished run.
    pub fn finish(&self, agent: &Agent) -> Result<(), StoreError> {
        save_library(&self.skills_dir(), &agent.library)?;
        let requests = self.prompts_dir().join("requests");
        fs::create_dir_all(&requests).map_err(io_err(&requests))?;
        for (i, req) in agent.gateway.requests().iter().enumerate() {
            let path = requests.join(format!("{:05}_{}.txt", i + 1, req.role_tag));
            write_file(&path, &format_request(req))?;
        }
        write_file(&self.metrics_path(), &metrics_csv(agent.events()))?;
        write_file(&self.cassette_path(), &agent.gateway.cassette().to_jsonl())?;
        let usage = serde_json::to_string_pretty(agent.gateway.account())
            .expect("usage report serializes");
        write_file(&self.usage_path(), &usage)
    }
}

/// Appends events to `events.log` as they happen, flushing each line.
pub struct EventLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl EventLog {
    pub fn create(path: &Path) -> Result<EventLog, StoreError> {
        let file = File::create(path).map_err(io_err(path))?;
        Ok(EventLog {
            path: path.to_path_buf(),
            out: BufWriter::new(file),
        })
    }

    pub fn append(&mut self, event: &RunEvent) -> Result<(), StoreError> {
        writeln!(self.out, "{}", event.to_line())
            .and_then(|_| self.out.flush())
            .map_err(io_err(&self.path))
    }
}

/// Streams events to a log and forwards everything to an inner supervisor.
pub struct Recording {
    log: EventLog,
    inner: Box<dyn Supervisor + Send>,
}

impl Recording {
    pub fn new(log: EventLog, inner: Box<dyn Supervisor + Send>) -> Self {
        Recording { log, inner }
    }
}

impl Supervisor for Recording {
    fn on_event(&mut self, event: &RunEvent) {
        if let Err(e) = self.log.append(event) {
            log::error!("event log write failed: {e}");
        }
        self.inner.on_event(event);
    }

    fn checkpoint(&mut self, snapshot: &Snapshot) {
        self.inner.checkpoint(snapshot);
    }

    fn human_task(&mut self, snapshot: &Snapshot) -> Option<String> {
        self.inner.human_task(snapshot)
    }

    fn human_critique(&mut self, snapshot: &Snapshot) -> Option<VerificationResult> {
        self.inner.human_critique(snapshot)
    }
}
