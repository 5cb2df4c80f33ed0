//! Core of a lifelong-learning game agent: the world simulator, the skill
//! scripting language, the skill library and the agent loops that drive them.
//!
//! Everything here is `no_std` + `alloc`; file IO, HTTP and the CLI live in the
//! `voyager-harness` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod registry;
pub mod world;
pub mod script;
pub mod embedding;
pub mod library;
pub mod llm;
pub mod prompts;
pub mod task;
pub mod events;
pub mod curriculum;
pub mod verifier;
pub mod agent;
pub mod baselines;
pub mod metrics;
pub mod oracle;
pub mod zero_shot;

use alloc::string::String;
use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use core::fmt::Write;
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}
