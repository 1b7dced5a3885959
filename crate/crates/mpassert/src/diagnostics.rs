//! Positions, node paths and the violation reports produced by the checking
//! stages.

use std::fmt;

use serde::Serialize;

/// A 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Path of a node inside a syntax tree: child indices from the root.
/// Stable across pretty-print/parse round trips, unlike source positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct NodePath(pub Vec<u32>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, idx: u32) -> Self {
        let mut path = self.0.clone();
        path.push(idx);
        NodePath(path)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "<root>");
        }
        for (i, step) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ".")?;
            }
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

/// What a checking stage found wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ViolationKind {
    Linearity,
    HistorySensitivity,
    TemporalSatisfiability,
    InvariantUnsatisfied,
    TypeMismatch,
    TypingSend,
    BranchGroup,
    ChannelScope,
    Arity,
    Sort,
    Incompatible,
    Logic,
}

impl ViolationKind {
    pub fn label(self) -> &'static str {
        match self {
            ViolationKind::Linearity => "Linearity",
            ViolationKind::HistorySensitivity => "HistorySensitivity",
            ViolationKind::TemporalSatisfiability => "TemporalSatisfiability",
            ViolationKind::InvariantUnsatisfied => "InvariantUnsatisfied",
            ViolationKind::TypeMismatch => "TypeMismatch",
            ViolationKind::TypingSend => "TypingSend",
            ViolationKind::BranchGroup => "BranchGroup",
            ViolationKind::ChannelScope => "ChannelScope",
            ViolationKind::Arity => "Arity",
            ViolationKind::Sort => "Sort",
            ViolationKind::Incompatible => "Incompatible",
            ViolationKind::Logic => "Logic",
        }
    }
}

/// A single reported violation, rendered as `KIND at <path>: <message>`.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub path: String,
    pub message: String,
    pub pos: Option<Pos>,
}

impl Violation {
    pub fn new(kind: ViolationKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { kind, path: path.into(), message: message.into(), pos: None }
    }

    pub fn at(mut self, pos: Option<Pos>) -> Self {
        self.pos = pos;
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.kind.label(), self.path, self.message)
    }
}

/// Verdict of a checking stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Ok,
    Failed,
}

/// Aggregated result of one checking stage. `verdict` is `Ok` exactly when
/// `violations` is empty.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn ok() -> Self {
        CheckReport { violations: Vec::new() }
    }

    pub fn from_violations(violations: Vec<Violation>) -> Self {
        CheckReport { violations }
    }

    pub fn verdict(&self) -> Verdict {
        if self.violations.is_empty() {
            Verdict::Ok
        } else {
            Verdict::Failed
        }
    }

    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}
