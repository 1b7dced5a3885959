//! Shared domain types: sorts, expressions, logical formulas, global and
//! local assertion trees, and participant processes.
//!
//! Everything in this module is an immutable value type; trees are built
//! once by the parser (or by hand in tests) and shared freely afterwards.

mod expr;
mod formula;
mod global;
mod local;
mod process;

pub use expr::{BinOp, CmpOp, Expr};
pub use formula::{fresh_name, Formula};
pub use global::{GlobalAssertion, GlobalBranchArm, RecParam};
pub use local::{LocalAssertion, LocalBranchArm};
pub use process::{Process, ProcessBranchArm};

use std::fmt;

/// Payload sort of a communicated value.
///
/// Assertions may only constrain `int` and `bool` variables; `string` and
/// `date` values travel through sessions but stay opaque to the logic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Bool,
    Str,
    Date,
}

impl Sort {
    /// Sorts the assertion logic can quantify over and constrain.
    pub fn is_logical(self) -> bool {
        matches!(self, Sort::Int | Sort::Bool)
    }

    pub fn name(self) -> &'static str {
        match self {
            Sort::Int => "int",
            Sort::Bool => "bool",
            Sort::Str => "string",
            Sort::Date => "date",
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A named protocol participant (the `B1`, `B2`, `S` of a global description).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Participant(pub String);

impl Participant {
    pub fn new(name: impl Into<String>) -> Self {
        Participant(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Participant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A session channel name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel(pub String);

impl Channel {
    pub fn new(name: impl Into<String>) -> Self {
        Channel(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
