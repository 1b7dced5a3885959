//! Frontend: lexing and parsing of protocol files, plus entry points for
//! the individual sub-languages (globals, processes, local types, formulas).
//!
//! Basic sort checking happens at parse time: payload expressions are
//! checked against their declared sorts, assertions may only constrain
//! `int`/`bool` variables, and recursion calls are matched against their
//! definitions. Every error carries a 1-based line/column position.

mod lexer;
mod parser;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::diagnostics::{NodePath, Pos};
use crate::syntax::{Formula, GlobalAssertion, LocalAssertion, Participant, Process, Sort};

/// Source positions per syntax-tree node, keyed by node path; kept outside
/// the trees so that structural equality ignores source locations.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    pub global: HashMap<NodePath, Pos>,
    pub processes: HashMap<String, HashMap<NodePath, Pos>>,
}

impl SourceMap {
    pub fn global_pos(&self, path: &NodePath) -> Option<Pos> {
        self.global.get(path).copied()
    }

    pub fn process_pos(&self, participant: &str, path: &NodePath) -> Option<Pos> {
        self.processes.get(participant).and_then(|m| m.get(path)).copied()
    }
}

/// A parsed input file: the global description followed by one process per
/// participant.
#[derive(Debug, Clone)]
pub struct ProtocolFile {
    pub global: GlobalAssertion,
    pub participants: Vec<(Participant, Process)>,
    pub source_map: SourceMap,
}

impl ProtocolFile {
    pub fn process_of(&self, name: &str) -> Option<&Process> {
        self.participants.iter().find(|(p, _)| p.name() == name).map(|(_, proc)| proc)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("expected sort {expected}, found {found}")]
    Sort { expected: Sort, found: String },
    #[error("duplicate label `{0}` in branch")]
    DuplicateLabel(String),
    #[error("unknown recursion variable `{0}`")]
    UnknownRecursionVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("recursion `{var}` takes {expected} argument(s), found {found}")]
    ArityMismatch { var: String, expected: usize, found: usize },
    #[error("assertions may only mention int or bool variables; `{var}` has sort {sort}")]
    AssertionOnOpaque { var: String, sort: Sort },
    #[error("sender and receiver coincide: `{0}`")]
    SelfInteraction(String),
    #[error("{0}")]
    Structure(String),
}

/// A parse or parse-time sort error with its source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub pos: Pos,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(pos: Pos, kind: ParseErrorKind) -> Self {
        ParseError { pos, kind }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.kind)
    }
}

/// Parses a whole protocol file: a global description followed by
/// `Name :: process` implementations.
pub fn parse_protocol_file(text: &str) -> Result<ProtocolFile, ParseError> {
    parser::Parser::new(text, parser::Mode::File)?.protocol_file()
}

/// Parses a single global description.
pub fn parse_global(text: &str) -> Result<GlobalAssertion, ParseError> {
    parser::Parser::new(text, parser::Mode::File)?.global_only()
}

/// Parses a single process term. Variable sorts and channels are inferred
/// from usage rather than required up front.
pub fn parse_process(text: &str) -> Result<Process, ParseError> {
    parser::Parser::new(text, parser::Mode::Standalone)?.process_only()
}

/// Parses a single local assertion (endpoint type).
pub fn parse_local(text: &str) -> Result<LocalAssertion, ParseError> {
    parser::Parser::new(text, parser::Mode::Standalone)?.local_only()
}

/// Parses a single formula. Unknown variables are admitted; their sorts are
/// inferred from how they are used.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    parser::Parser::new(text, parser::Mode::Standalone)?.formula_only()
}
