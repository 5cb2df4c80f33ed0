//! Text embeddings and the offline feature-hashing embedder.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EmbedError {
    #[error("cannot embed empty text")]
    Empty,
    #[error("embedding has zero norm")]
    ZeroNorm,
    #[error("embedding provider failed: {0}")]
    Provider(String),
}

/// A unit-length vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    components: Vec<f64>,
}

impl EmbeddingVector {
    /// Normalizes `components` to unit Euclidean length.
    pub fn normalized(mut components: Vec<f64>) -> Result<Self, EmbedError> {
        let norm = libm::sqrt(components.iter().map(|c| c * c).sum::<f64>());
        if norm == 0.0 || !norm.is_finite() {
            return Err(EmbedError::ZeroNorm);
        }
        for c in &mut components {
            *c /= norm;
        }
        Ok(EmbeddingVector { components })
    }

    /// Wraps components that are already unit length (e.g. loaded from disk).
    pub fn from_raw(components: Vec<f64>) -> Self {
        EmbeddingVector { components }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.components.iter().map(|c| c * c).sum::<f64>())
    }

    /// Cosine similarity, clamped to [-1, 1].
    pub fn cosine(&self, other: &EmbeddingVector) -> f64 {
        if self.components == other.components && self.norm() > 0.0 {
            return 1.0;
        }
        let dot: f64 = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a * b)
            .sum();
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            return 0.0;
        }
        (dot / denom).clamp(-1.0, 1.0)
    }
}

pub trait Embedder {
    /// Stable identifier recorded in library manifests.
    fn id(&self) -> &str;
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;
}

/// Signed feature hashing of word unigrams and bigrams.
///
/// Words are lowercased and camelCase identifiers are split, so
/// `craftStonePickaxe` and "craft stone pickaxe" share features.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dimension: usize,
    id: String,
}

pub const HASH_EMBEDDER_DIM: usize = 256;

impl Default for HashEmbedder {
    fn default() -> Self {
        HashEmbedder::new(HASH_EMBEDDER_DIM)
    }
}

impl HashEmbedder {
    pub fn new(dimension: usize) -> Self {
        HashEmbedder {
            dimension: dimension.max(1),
            id: alloc::format!("hash-ngram-{}", dimension.max(1)),
        }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Lowercase words, splitting on non-alphanumerics and camelCase humps.
pub fn words(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut prev_lower = false;
    for c in text.chars() {
        if c.is_alphanumeric() {
            if c.is_uppercase() && prev_lower && !cur.is_empty() {
                out.push(core::mem::take(&mut cur));
            }
            prev_lower = c.is_lowercase() || c.is_ascii_digit();
            cur.extend(c.to_lowercase());
        } else {
            prev_lower = false;
            if !cur.is_empty() {
                out.push(core::mem::take(&mut cur));
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl Embedder for HashEmbedder {
    fn id(&self) -> &str {
        &self.id
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let words = words(text);
        if words.is_empty() {
            return Err(EmbedError::Empty);
        }
        let mut v = vec![0.0; self.dimension];
        let mut add = |feature: &str, weight: f64| {
            let h = fnv1a(feature.as_bytes());
            let idx = (h % self.dimension as u64) as usize;
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            v[idx] += sign * weight;
        };
        for w in &words {
            add(w, 1.0);
        }
        for pair in words.windows(2) {
            add(&alloc::format!("{} {}", pair[0], pair[1]), 0.5);
        }
        EmbeddingVector::normalized(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_camel_case() {
        assert_eq!(words("craftStonePickaxe now"), vec!["craft", "stone", "pickaxe", "now"]);
        assert_eq!(words("smeltFiveRawIronV2"), vec!["smelt", "five", "raw", "iron", "v2"]);
    }

    #[test]
    fn empty_text_is_rejected() {
        assert_eq!(HashEmbedder::default().embed(" ,. "), Err(EmbedError::Empty));
    }
}
