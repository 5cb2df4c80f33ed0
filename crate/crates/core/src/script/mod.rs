//! SkillScript: the small language skills are written in.
//!
//! A program is a single function:
//!
//! ```text
//! fn craftWoodenPickaxe() {
//!     if inventory_count("oak_planks") < 3 {
//!         mineBlock("oak_log", 1);
//!         craftItem("oak_planks", 1);
//!     }
//!     placeItem("crafting_table", position_x() + 1, position_y(), position_z());
//!     craftItem("wooden_pickaxe", 1);
//!     chat("crafted a pickaxe");
//! }
//! ```
//!
//! Statements: `let`, `if`/`else if`/`else`, `repeat N { }` with a literal
//! bound, `chat(...)`, and calls to primitives or library skills. Expressions
//! have integers, strings, booleans, arithmetic, comparisons, `&&`/`and`,
//! `||`/`or`, `!`/`not` and side-effect-free queries. See `docs/skillscript.md`
//! for the full grammar.

pub mod analyze;
pub mod api;
pub mod ast;
pub mod interp;
mod lexer;
pub mod parser;
pub mod printer;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub use analyze::{analyze, find_cycle, static_bound, StaticError, StaticErrorKind};
pub use api::{ApiRegistry, CallableKind, Signature};
pub use ast::{Function, Span};
pub use interp::{
    execute, ErrorKind, ExecConfig, ExecError, ExecutionOutcome, Frame, TraceEntry, Value,
    DEFAULT_BUDGET,
};
pub use parser::parse;
pub use printer::print;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub span: Span,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}", self.message, self.span)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl From<ParseError> for ExecError {
    fn from(e: ParseError) -> Self {
        let mut message = e.message.clone();
        if !e.expected.is_empty() {
            message = format!("{message} (expected {})", e.expected.join(" or "));
        }
        ExecError::new(ErrorKind::Parse, message, e.span)
    }
}

/// Parses and statically checks a program, reporting the first problem as
/// an execution error suitable for the next prompt.
pub fn compile(src: &str, registry: &ApiRegistry) -> Result<Function, ExecError> {
    let func = parse(src)?;
    let errors = analyze(&func, registry);
    if let Some(first) = errors.first() {
        let message = errors
            .iter()
            .map(|e| e.message.clone())
            .collect::<Vec<_>>()
            .join("; ");
        return Err(ExecError::new(ErrorKind::Static, message, first.span));
    }
    Ok(func)
}
