use std::fmt;

use super::{Channel, Expr, Formula, RecParam, Sort};

/// One labelled alternative of a local select/branch menu.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalBranchArm {
    pub label: String,
    pub assertion: Formula,
    pub continuation: LocalAssertion,
}

/// An endpoint type with assertions: a single participant's view of the
/// protocol, either projected from a global assertion or inferred from a
/// process. Mentions no participant names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LocalAssertion {
    /// `k!<v:sort> [f];T`
    Send {
        channel: Channel,
        payload_var: String,
        sort: Sort,
        assertion: Formula,
        continuation: Box<LocalAssertion>,
    },
    /// `k?<v:sort> [f];T`
    Receive {
        channel: Channel,
        payload_var: String,
        sort: Sort,
        assertion: Formula,
        continuation: Box<LocalAssertion>,
    },
    /// `k$id{ [f] l: T, ... }` — internal choice.
    Select { channel: Channel, branch_id: String, arms: Vec<LocalBranchArm> },
    /// `k&id{ [f] l: T, ... }` — external choice.
    Branch { channel: Channel, branch_id: String, arms: Vec<LocalBranchArm> },
    /// `mu t(e1,..)(p1:s1,..) [inv]. T`
    Rec { var: String, params: Vec<RecParam>, invariant: Formula, body: Box<LocalAssertion> },
    /// `t(e1,..)`
    Call { var: String, actuals: Vec<Expr> },
    End,
}

impl LocalAssertion {
    pub fn send(
        channel: Channel,
        payload_var: impl Into<String>,
        sort: Sort,
        assertion: Formula,
        continuation: LocalAssertion,
    ) -> Self {
        LocalAssertion::Send {
            channel,
            payload_var: payload_var.into(),
            sort,
            assertion,
            continuation: Box::new(continuation),
        }
    }

    pub fn receive(
        channel: Channel,
        payload_var: impl Into<String>,
        sort: Sort,
        assertion: Formula,
        continuation: LocalAssertion,
    ) -> Self {
        LocalAssertion::Receive {
            channel,
            payload_var: payload_var.into(),
            sort,
            assertion,
            continuation: Box::new(continuation),
        }
    }

    /// Whether a recursion node occurs anywhere in the type.
    pub fn has_rec(&self) -> bool {
        match self {
            LocalAssertion::Send { continuation, .. }
            | LocalAssertion::Receive { continuation, .. } => continuation.has_rec(),
            LocalAssertion::Select { arms, .. } | LocalAssertion::Branch { arms, .. } => {
                arms.iter().any(|a| a.continuation.has_rec())
            }
            LocalAssertion::Rec { .. } => true,
            LocalAssertion::Call { .. } | LocalAssertion::End => false,
        }
    }

    /// Channels on which the type communicates.
    pub fn channels(&self) -> Vec<Channel> {
        let mut out = Vec::new();
        self.collect_channels(&mut out);
        out.dedup();
        out
    }

    fn collect_channels(&self, out: &mut Vec<Channel>) {
        match self {
            LocalAssertion::Send { channel, continuation, .. }
            | LocalAssertion::Receive { channel, continuation, .. } => {
                if !out.contains(channel) {
                    out.push(channel.clone());
                }
                continuation.collect_channels(out);
            }
            LocalAssertion::Select { channel, arms, .. }
            | LocalAssertion::Branch { channel, arms, .. } => {
                if !out.contains(channel) {
                    out.push(channel.clone());
                }
                for arm in arms {
                    arm.continuation.collect_channels(out);
                }
            }
            LocalAssertion::Rec { body, .. } => body.collect_channels(out),
            LocalAssertion::Call { .. } | LocalAssertion::End => {}
        }
    }
}

impl fmt::Display for LocalAssertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LocalAssertion::Send { channel, payload_var, sort, assertion, continuation } => {
                write!(f, "{channel}!<{payload_var}:{sort}> [{assertion}];{continuation}")
            }
            LocalAssertion::Receive { channel, payload_var, sort, assertion, continuation } => {
                write!(f, "{channel}?<{payload_var}:{sort}> [{assertion}];{continuation}")
            }
            LocalAssertion::Select { channel, branch_id, arms } => {
                write!(f, "{channel}${branch_id}{{ ")?;
                fmt_arms(f, arms)?;
                write!(f, " }}")
            }
            LocalAssertion::Branch { channel, branch_id, arms } => {
                write!(f, "{channel}&{branch_id}{{ ")?;
                fmt_arms(f, arms)?;
                write!(f, " }}")
            }
            LocalAssertion::Rec { var, params, invariant, body } => {
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
                write!(f, ") [{invariant}]. {body}")
            }
            LocalAssertion::Call { var, actuals } => {
                write!(f, "{var}(")?;
                for (i, e) in actuals.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{e}")?;
                }
                write!(f, ")")
            }
            LocalAssertion::End => write!(f, "end"),
        }
    }
}

fn fmt_arms(f: &mut fmt::Formatter<'_>, arms: &[LocalBranchArm]) -> fmt::Result {
    for (i, arm) in arms.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "[{}] {}: {}", arm.assertion, arm.label, arm.continuation)?;
    }
    Ok(())
}
