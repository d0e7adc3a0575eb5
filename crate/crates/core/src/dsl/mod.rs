//! The `.gqms` model format.
//!
//! [`parse_model`] reads a document into a [`Grid`]; [`serialize_model`]
//! writes the canonical form back out. The grammar is documented in
//! `docs/dsl.md`.

pub(crate) mod cursor;
pub(crate) mod lexer;
mod parser;
mod writer;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use parser::{parse_element, parse_model, parse_model_bytes, parse_model_named, ParsedModel};
pub use writer::{serialize_element, serialize_model, HEADER};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: u32,
    pub column: u32,
}

impl SourceSpan {
    pub fn start(file: &str) -> Self {
        Self { file: file.to_string(), line: 1, column: 1 }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{span}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected {})", expected.join(", "))
    }
}

impl ParseError {
    pub fn new(span: SourceSpan, message: impl Into<String>, expected: &[&str]) -> Self {
        let mut message = message.into();
        if message.is_empty() {
            message = "syntax error".into();
        }
        Self { span, message, expected: expected.iter().map(|s| s.to_string()).collect() }
    }
}

/// Where each parsed entity starts, in document order.
///
/// Keys are `kind:id`, e.g. `element:Goal1`, `strategy:S1`,
/// `question:Goal1/Q1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub entries: Vec<(String, SourceSpan)>,
}

impl SourceMap {
    pub fn get(&self, key: &str) -> Option<&SourceSpan> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, s)| s)
    }

    pub(crate) fn push(&mut self, key: String, span: SourceSpan) {
        self.entries.push((key, span));
    }
}
