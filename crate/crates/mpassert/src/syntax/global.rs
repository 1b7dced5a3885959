use std::collections::BTreeSet;
use std::fmt;

use super::{Channel, Expr, Formula, Participant, Sort};

/// One labelled alternative of a global branching point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalBranchArm {
    pub label: String,
    pub assertion: Formula,
    pub continuation: GlobalAssertion,
}

/// A recursion parameter: formal name, sort, and initialisation expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecParam {
    pub formal: String,
    pub sort: Sort,
    pub init: Expr,
}

impl RecParam {
    pub fn new(formal: impl Into<String>, sort: Sort, init: Expr) -> Self {
        RecParam { formal: formal.into(), sort, init }
    }
}

/// A global assertion: the bird's-eye description of an asserted protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GlobalAssertion {
    /// `A -> B : k(v:sort)[f]; G`
    Interaction {
        sender: Participant,
        receiver: Participant,
        channel: Channel,
        payload_var: String,
        sort: Sort,
        assertion: Formula,
        continuation: Box<GlobalAssertion>,
    },
    /// `A -> B : k&id{ [f] l: G, ... }`
    Branch {
        sender: Participant,
        receiver: Participant,
        channel: Channel,
        branch_id: String,
        arms: Vec<GlobalBranchArm>,
    },
    /// `mu t(e1,..)(p1:s1,..)[inv]. G`
    Rec {
        var: String,
        params: Vec<RecParam>,
        invariant: Formula,
        body: Box<GlobalAssertion>,
    },
    /// `t(e1,..)`
    Call { var: String, actuals: Vec<Expr> },
    End,
}

impl GlobalAssertion {
    /// All participants mentioned, sorted by name.
    pub fn participants(&self) -> Vec<Participant> {
        let mut set = BTreeSet::new();
        self.collect_participants(&mut set);
        set.into_iter().collect()
    }

    fn collect_participants(&self, out: &mut BTreeSet<Participant>) {
        match self {
            GlobalAssertion::Interaction { sender, receiver, continuation, .. } => {
                out.insert(sender.clone());
                out.insert(receiver.clone());
                continuation.collect_participants(out);
            }
            GlobalAssertion::Branch { sender, receiver, arms, .. } => {
                out.insert(sender.clone());
                out.insert(receiver.clone());
                for arm in arms {
                    arm.continuation.collect_participants(out);
                }
            }
            GlobalAssertion::Rec { body, .. } => body.collect_participants(out),
            GlobalAssertion::Call { .. } | GlobalAssertion::End => {}
        }
    }

    /// Whether the participant occurs in a prefix of this subtree.
    pub fn mentions(&self, p: &Participant) -> bool {
        match self {
            GlobalAssertion::Interaction { sender, receiver, continuation, .. } => {
                sender == p || receiver == p || continuation.mentions(p)
            }
            GlobalAssertion::Branch { sender, receiver, arms, .. } => {
                sender == p || receiver == p || arms.iter().any(|a| a.continuation.mentions(p))
            }
            GlobalAssertion::Rec { body, .. } => body.mentions(p),
            GlobalAssertion::Call { .. } | GlobalAssertion::End => false,
        }
    }

    /// Number of communication prefixes (interactions and branch points) in
    /// the tree.
    pub fn prefix_count(&self) -> usize {
        match self {
            GlobalAssertion::Interaction { continuation, .. } => 1 + continuation.prefix_count(),
            GlobalAssertion::Branch { arms, .. } => {
                1 + arms.iter().map(|a| a.continuation.prefix_count()).sum::<usize>()
            }
            GlobalAssertion::Rec { body, .. } => body.prefix_count(),
            GlobalAssertion::Call { .. } | GlobalAssertion::End => 0,
        }
    }
}

impl fmt::Display for GlobalAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GlobalAssertion::Interaction {
                sender,
                receiver,
                channel,
                payload_var,
                sort,
                assertion,
                continuation,
            } => write!(
                f,
                "{sender} -> {receiver} : {channel}({payload_var}:{sort})[{assertion}]; {continuation}"
            ),
            GlobalAssertion::Branch { sender, receiver, channel, branch_id, arms } => {
                write!(f, "{sender} -> {receiver} : {channel}&{branch_id}{{ ")?;
                for (i, arm) in arms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "[{}] {}: {}", arm.assertion, arm.label, arm.continuation)?;
                }
                write!(f, " }}")
            }
            GlobalAssertion::Rec { var, params, invariant, body } => {
                write!(f, "mu {var}(")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}", p.init)?;
                }
                write!(f, ")(")?;
                for (i, p) in params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{}:{}", p.formal, p.sort)?;
                }
                write!(f, ")[{invariant}]. {body}")
            }
            GlobalAssertion::Call { var, actuals } => {
                write!(f, "{var}(")?;
                for (i, e) in actuals.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            GlobalAssertion::End => write!(f, "end"),
        }
    }
}
