//! Front end for `specpos`: input files, commands and the corpus runner.

pub mod commands;
pub mod corpus;
pub mod input;

use std::fmt::Display;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{path}: {msg}")]
    Parse { path: String, msg: String },

    #[error(transparent)]
    Core(#[from] specpos_core::Error),
}

impl CliError {
    pub fn parse(path: &Path, msg: impl Display) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            msg: msg.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_invariant_violation() => EXIT_INVARIANT,
            _ => EXIT_INPUT,
        }
    }
}

/// What a command produced: a one-line verdict, detail lines, structured
/// data for `--json`, and the exit code.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub verdict: String,
    pub code: i32,
    pub lines: Vec<String>,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

impl Outcome {
    pub fn new(verdict: impl Into<String>, code: i32) -> Self {
        Outcome {
            verdict: verdict.into(),
            code,
            lines: Vec::new(),
            data: Value::Null,
        }
    }

    pub fn line(mut self, l: impl Into<String>) -> Self {
        self.lines.push(l.into());
        self
    }

    pub fn lines(mut self, ls: impl IntoIterator<Item = String>) -> Self {
        self.lines.extend(ls);
        self
    }

    pub fn data(mut self, v: Value) -> Self {
        self.data = v;
        self
    }

    pub fn render(&self, json: bool) -> String {
        if json {
            let mut s = serde_json::to_string_pretty(self).expect("outcome serializes");
            s.push('\n');
            return s;
        }
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }
}
