use std::fmt;

use super::{Channel, Expr, Formula, Participant, Sort};

/// One labelled alternative of a process-level branching construct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessBranchArm {
    pub label: String,
    pub assertion: Formula,
    pub body: Process,
}

/// A participant implementation in the pi-calculus dialect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Process {
    /// `init:a[P1,..,Pn](k1,..,km). P` — session request; the first
    /// participant identifier is the initiator's own role.
    Init {
        service: String,
        participants: Vec<Participant>,
        channels: Vec<Channel>,
        body: Box<Process>,
    },
    /// `join:a[Pi](k1,..,km). P` — session acceptance.
    Join {
        service: String,
        participant: Participant,
        channels: Vec<Channel>,
        body: Box<Process>,
    },
    /// `k!(e)(v:sort)[f]; P` — send `e` on `k`, binding `v` for the rest.
    Send {
        channel: Channel,
        expr: Expr,
        payload_var: String,
        sort: Sort,
        assertion: Formula,
        body: Box<Process>,
    },
    /// `k?(v:sort)[f]; P`
    Receive {
        channel: Channel,
        payload_var: String,
        sort: Sort,
        assertion: Formula,
        body: Box<Process>,
    },
    /// `k$ [f] id.l; P` — select label `l` of branch group `id`.
    Select {
        channel: Channel,
        assertion: Formula,
        branch_id: String,
        label: String,
        body: Box<Process>,
    },
    /// `k&id{ [f] l: P, ... }` — offer the labels of group `id`.
    Branch { channel: Channel, branch_id: String, arms: Vec<ProcessBranchArm> },
    /// `if e then P else Q` — both branches carry their full continuations.
    IfThenElse { cond: Expr, then_body: Box<Process>, else_body: Box<Process> },
    /// `mu t(e1,..;k1,..)(p1:s1,..;h1,..)[true]. P`
    Rec {
        var: String,
        value_args: Vec<Expr>,
        channel_args: Vec<Channel>,
        value_params: Vec<(String, Sort)>,
        channel_params: Vec<Channel>,
        body: Box<Process>,
    },
    /// `t(e1,..;k1,..)`
    Call { var: String, value_actuals: Vec<Expr>, channel_actuals: Vec<Channel> },
    /// `end`
    Inact,
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Process::Init { service, participants, channels, body } => {
                write!(f, "init:{service}[")?;
                join_display(f, participants)?;
                write!(f, "](")?;
                join_display(f, channels)?;
                write!(f, "). {body}")
            }
            Process::Join { service, participant, channels, body } => {
                write!(f, "join:{service}[{participant}](")?;
                join_display(f, channels)?;
                write!(f, "). {body}")
            }
            Process::Send { channel, expr, payload_var, sort, assertion, body } => {
                write!(f, "{channel}!({expr})({payload_var}:{sort})[{assertion}]; {body}")
            }
            Process::Receive { channel, payload_var, sort, assertion, body } => {
                write!(f, "{channel}?({payload_var}:{sort})[{assertion}]; {body}")
            }
            Process::Select { channel, assertion, branch_id, label, body } => {
                write!(f, "{channel}$ [{assertion}] {branch_id}.{label}; {body}")
            }
            Process::Branch { channel, branch_id, arms } => {
                write!(f, "{channel}&{branch_id}{{ ")?;
                for (i, arm) in arms.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "[{}] {}: {}", arm.assertion, arm.label, arm.body)?;
                }
                write!(f, " }}")
            }
            Process::IfThenElse { cond, then_body, else_body } => {
                write!(f, "if {cond} then {then_body} else {else_body}")
            }
            Process::Rec { var, value_args, channel_args, value_params, channel_params, body } => {
                write!(f, "mu {var}(")?;
                join_display(f, value_args)?;
                if !channel_args.is_empty() {
                    write!(f, ";")?;
                    join_display(f, channel_args)?;
                }
                write!(f, ")(")?;
                for (i, (name, sort)) in value_params.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{name}:{sort}")?;
                }
                if !channel_params.is_empty() {
                    write!(f, ";")?;
                    join_display(f, channel_params)?;
                }
                write!(f, ")[true]. {body}")
            }
            Process::Call { var, value_actuals, channel_actuals } => {
                write!(f, "{var}(")?;
                join_display(f, value_actuals)?;
                if !channel_actuals.is_empty() {
                    write!(f, ";")?;
                    join_display(f, channel_actuals)?;
                }
                write!(f, ")")
            }
            Process::Inact => write!(f, "end"),
        }
    }
}

fn join_display<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{item}")?;
    }
    Ok(())
}
