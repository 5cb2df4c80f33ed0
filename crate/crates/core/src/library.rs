//! The skill library: verified programs keyed by description embeddings.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::embedding::{EmbedError, Embedder, EmbeddingVector};
use crate::script::{self, ApiRegistry, Function};
use crate::sha256_hex;

pub const DEFAULT_TOP_K: usize = 5;
pub const MANIFEST_HEADER: &str =
    "# name\tdescription_sha256\tembedder\tdimension\tcreated_at\tembedding";

#[derive(Debug, Clone, PartialEq)]
pub struct Skill {
    pub name: String,
    pub description: String,
    pub embedding: EmbeddingVector,
    pub source: String,
    pub created_at: u64,
    function: Arc<Function>,
}

impl Skill {
    pub fn function(&self) -> &Arc<Function> {
        &self.function
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LibraryError {
    #[error("invalid skill source: {0}")]
    Invalid(String),
    #[error("skill description is empty")]
    EmptyDescription,
    #[error("embedder mismatch: library uses {expected}, got {found}")]
    EmbedderMismatch { expected: String, found: String },
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("corrupt library entry `{entry}`: {reason}")]
    Corrupt { entry: String, reason: String },
}

/// Query for skill retrieval; the embedded text joins plan and feedback.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetrievalQuery {
    pub plan_text: String,
    pub env_feedback_text: String,
    pub k: usize,
}

impl RetrievalQuery {
    pub fn new(plan_text: impl Into<String>, env_feedback_text: impl Into<String>) -> Self {
        RetrievalQuery {
            plan_text: plan_text.into(),
            env_feedback_text: env_feedback_text.into(),
            k: DEFAULT_TOP_K,
        }
    }

    pub fn text(&self) -> String {
        [self.plan_text.trim(), self.env_feedback_text.trim()]
            .iter()
            .filter(|s| !s.is_empty())
            .copied()
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkillLibrary {
    embedder_id: String,
    dimension: usize,
    skills: Vec<Skill>,
}

/// Strips a trailing `V<digits>` version suffix.
pub fn base_name(name: &str) -> &str {
    let trimmed = name.trim_end_matches(|c: char| c.is_ascii_digit());
    if trimmed.len() < name.len() {
        if let Some(base) = trimmed.strip_suffix('V') {
            if !base.is_empty() {
                return base;
            }
        }
    }
    name
}

/// Replaces the declared function name in `source` with `new_name`.
fn rename_function(source: &str, old: &str, new_name: &str) -> String {
    let bytes = source.as_bytes();
    let mut search = 0;
    while let Some(found) = source[search..].find("fn") {
        let at = search + found;
        let before_ok = at == 0 || !(bytes[at - 1].is_ascii_alphanumeric() || bytes[at - 1] == b'_');
        let rest = &source[at + 2..];
        let ws = rest.len() - rest.trim_start().len();
        if before_ok && ws > 0 && rest[ws..].starts_with(old) {
            let name_end = at + 2 + ws + old.len();
            let after = source[name_end..].chars().next();
            if !after.is_some_and(|c| c.is_alphanumeric() || c == '_') {
                return format!("{}{}{}", &source[..at + 2 + ws], new_name, &source[name_end..]);
            }
        }
        search = at + 2;
    }
    source.to_string()
}

impl SkillLibrary {
    pub fn new(embedder: &dyn Embedder) -> Self {
        SkillLibrary {
            embedder_id: embedder.id().to_string(),
            dimension: embedder.dimension(),
            skills: Vec::new(),
        }
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }

    pub fn skills(&self) -> &[Skill] {
        &self.skills
    }

    pub fn get(&self, name: &str) -> Option<&Skill> {
        self.skills.iter().find(|s| s.name == name)
    }

    /// Primitives plus every stored skill.
    pub fn api_registry(&self) -> ApiRegistry {
        let mut reg = ApiRegistry::with_primitives();
        for skill in &self.skills {
            reg.add_skill(skill.function.clone(), &skill.description);
        }
        reg
    }

    fn check_embedder(&self, embedder: &dyn Embedder) -> Result<(), LibraryError> {
        if embedder.id() != self.embedder_id || embedder.dimension() != self.dimension {
            return Err(LibraryError::EmbedderMismatch {
                expected: format!("{} ({})", self.embedder_id, self.dimension),
                found: format!("{} ({})", embedder.id(), embedder.dimension()),
            });
        }
        Ok(())
    }

    /// Stores a new skill. A name that is already taken gets the next free
    /// `V2`, `V3`, ... suffix, written back into the stored source.
    pub fn add_skill(
        &mut self,
        source: &str,
        description: &str,
        embedder: &dyn Embedder,
        created_at: u64,
    ) -> Result<&Skill, LibraryError> {
        self.check_embedder(embedder)?;
        if description.trim().is_empty() {
            return Err(LibraryError::EmptyDescription);
        }
        let registry = self.api_registry();
        let func = script::compile(source, &registry)
            .map_err(|e| LibraryError::Invalid(e.to_string()))?;
        let mut source = source.to_string();
        let mut func = func;
        if self.get(&func.name).is_some() {
            let base = base_name(&func.name).to_string();
            let mut version = 2;
            let new_name = loop {
                let candidate = format!("{base}V{version}");
                if self.get(&candidate).is_none() {
                    break candidate;
                }
                version += 1;
            };
            source = rename_function(&source, &func.name, &new_name);
            func = script::parse(&source).map_err(|e| LibraryError::Invalid(e.to_string()))?;
        }
        let embedding = embedder.embed(description)?;
        self.skills.push(Skill {
            name: func.name.clone(),
            description: description.to_string(),
            embedding,
            source,
            created_at,
            function: Arc::new(func),
        });
        Ok(self.skills.last().expect("just pushed"))
    }

    /// Skills by descending cosine similarity to `query_text`; ties go to the
    /// older skill.
    pub fn retrieve_text(
        &self,
        query_text: &str,
        k: usize,
        embedder: &dyn Embedder,
    ) -> Result<Vec<(&Skill, f64)>, LibraryError> {
        if self.skills.is_empty() || k == 0 || query_text.trim().is_empty() {
            return Ok(Vec::new());
        }
        self.check_embedder(embedder)?;
        let q = embedder.embed(query_text)?;
        let mut scored: Vec<(usize, f64)> = self
            .skills
            .iter()
            .enumerate()
            .map(|(i, s)| (i, q.cosine(&s.embedding)))
            .collect();
        scored.sort_by(|a, b| {
            b.1.total_cmp(&a.1)
                .then(self.skills[a.0].created_at.cmp(&self.skills[b.0].created_at))
                .then(a.0.cmp(&b.0))
        });
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(i, sim)| (&self.skills[i], sim))
            .collect())
    }

    pub fn retrieve(
        &self,
        query: &RetrievalQuery,
        embedder: &dyn Embedder,
    ) -> Result<Vec<(&Skill, f64)>, LibraryError> {
        self.retrieve_text(&query.text(), query.k.max(1), embedder)
    }

    /// The on-disk layout as (relative path, contents) pairs.
    pub fn to_files(&self) -> Vec<(String, String)> {
        let mut files = Vec::new();
        let mut manifest = format!(
            "{MANIFEST_HEADER}\n#embedder\t{}\t{}\n",
            self.embedder_id, self.dimension
        );
        for s in &self.skills {
            files.push((format!("{}.skill", s.name), s.source.clone()));
            files.push((format!("{}.desc.txt", s.name), s.description.clone()));
            let floats: Vec<String> = s
                .embedding
                .components()
                .iter()
                .map(|c| format!("{c:?}"))
                .collect();
            manifest.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\n",
                s.name,
                sha256_hex(s.description.as_bytes()),
                self.embedder_id,
                self.dimension,
                s.created_at,
                floats.join(" ")
            ));
        }
        files.push(("manifest".to_string(), manifest));
        files
    }

    /// Rebuilds a library from its files; `read` returns a file's contents.
    pub fn from_files(
        manifest: &str,
        mut read: impl FnMut(&str) -> Option<String>,
    ) -> Result<SkillLibrary, LibraryError> {
        let mut lib: Option<SkillLibrary> = None;
        let mut pending: Vec<(String, String, EmbeddingVector, u64)> = Vec::new();
        for (lineno, line) in manifest.lines().enumerate() {
            if let Some(rest) = line.strip_prefix("#embedder\t") {
                let (id, dim) = rest.split_once('\t').unwrap_or((rest, ""));
                let dimension = dim.trim().parse().map_err(|_| LibraryError::Corrupt {
                    entry: format!("line {}", lineno + 1),
                    reason: format!("bad dimension `{dim}`"),
                })?;
                lib = Some(SkillLibrary::with_embedder_id(id, dimension));
                continue;
            }
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let entry = fields.first().copied().unwrap_or("").to_string();
            let corrupt = |reason: String| LibraryError::Corrupt {
                entry: if entry.is_empty() {
                    format!("line {}", lineno + 1)
                } else {
                    entry.clone()
                },
                reason,
            };
            if fields.len() != 6 {
                return Err(corrupt(format!("expected 6 fields, found {}", fields.len())));
            }
            let dim: usize = fields[3]
                .parse()
                .map_err(|_| corrupt(format!("bad dimension `{}`", fields[3])))?;
            let created_at: u64 = fields[4]
                .parse()
                .map_err(|_| corrupt(format!("bad created_at `{}`", fields[4])))?;
            let floats = fields[5]
                .split_whitespace()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| corrupt("bad embedding value".into()))?;
            if floats.len() != dim {
                return Err(corrupt(format!(
                    "embedding has {} values, dimension says {dim}",
                    floats.len()
                )));
            }
            match &lib {
                None => {
                    lib = Some(SkillLibrary {
                        embedder_id: fields[2].to_string(),
                        dimension: dim,
                        skills: Vec::new(),
                    })
                }
                Some(l) if l.embedder_id != fields[2] || l.dimension != dim => {
                    return Err(corrupt("embedder differs from earlier entries".into()))
                }
                _ => {}
            }
            let source = read(&format!("{entry}.skill"))
                .ok_or_else(|| corrupt(format!("missing file {entry}.skill")))?;
            let description = read(&format!("{entry}.desc.txt"))
                .ok_or_else(|| corrupt(format!("missing file {entry}.desc.txt")))?;
            if sha256_hex(description.as_bytes()) != fields[1] {
                return Err(corrupt("description digest mismatch".into()));
            }
            pending.push((source, description, EmbeddingVector::from_raw(floats), created_at));
        }
        let mut lib = lib.unwrap_or(SkillLibrary {
            embedder_id: String::new(),
            dimension: 0,
            skills: Vec::new(),
        });
        let mut names: BTreeMap<String, ()> = BTreeMap::new();
        for (source, description, embedding, created_at) in pending {
            let registry = lib.api_registry();
            let func = script::compile(&source, &registry).map_err(|e| LibraryError::Corrupt {
                entry: script::parse(&source)
                    .map(|f| f.name)
                    .unwrap_or_else(|_| "?".into()),
                reason: e.to_string(),
            })?;
            if names.insert(func.name.clone(), ()).is_some() {
                return Err(LibraryError::Corrupt {
                    entry: func.name.clone(),
                    reason: "duplicate skill name".into(),
                });
            }
            lib.skills.push(Skill {
                name: func.name.clone(),
                description,
                embedding,
                source,
                created_at,
                function: Arc::new(func),
            });
        }
        Ok(lib)
    }

    /// An empty library bound to a manifest's embedder when the manifest has
    /// no entries yet.
    pub fn with_embedder_id(embedder_id: &str, dimension: usize) -> Self {
        SkillLibrary {
            embedder_id: embedder_id.to_string(),
            dimension,
            skills: Vec::new(),
        }
    }
}

/// A one-paragraph description of a program from the auxiliary model.
pub fn describe_skill(
    source: &str,
    function_name: &str,
    gateway: &mut crate::llm::Gateway,
) -> Result<String, crate::llm::GatewayError> {
    let user = format!("{}\n\nThe main function is `{function_name}`.", source.trim_end());
    let req = gateway.request(crate::llm::RoleTag::Describe, crate::prompts::DESCRIBE, user);
    Ok(gateway.chat(&req)?.text.trim().to_string())
}
