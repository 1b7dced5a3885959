use std::fmt;

use thiserror::Error;

use crate::diagnostics::NodePath;
use crate::presburger::{LogicError, Solver};
use crate::syntax::{
    Channel, Expr, Formula, LocalAssertion, LocalBranchArm, Participant, Process, RecParam, Sort,
};

use super::{EntryStatus, EnvBinding, EnvEntry, TypingEnvironment, TypingMode};

/// A typing failure, located by the node path of the offending construct.
#[derive(Debug, Clone, Error)]
pub struct TypingError {
    pub path: NodePath,
    pub kind: TypingErrorKind,
}

impl fmt::Display for TypingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)
    }
}

#[derive(Debug, Clone, Error)]
pub enum TypingErrorKind {
    /// The sent value does not meet the declared assertion under the
    /// current context.
    #[error("[Typing-Send] Assertion not satisfiable: {context} => {assertion}")]
    SendUnsat { context: String, assertion: String },
    #[error("branch group `{0}` is used on more than one channel")]
    UnknownBranchGroup(String),
    #[error("channel `{0}` is not in scope (session and recursion channels only)")]
    ChannelNotInScope(Channel),
    #[error("recursion `{var}` called with the wrong number of arguments")]
    ArityMismatch { var: String },
    #[error("expected sort {expected}, found {found}")]
    SortMismatch { expected: Sort, found: String },
    #[error("recursion `{var}` must be re-entered with its own channel parameters")]
    ChannelMismatchAtCall { var: String },
    #[error("`if` branches infer incompatible types: {0}")]
    IfBranchesDiffer(String),
    #[error("process must open a session with `init:` or `join:`")]
    NoSession,
    #[error("unknown recursion variable `{0}`")]
    UnknownRecursionVariable(String),
    #[error(transparent)]
    Logic(LogicError),
}

impl TypingError {
    fn at(path: &NodePath, kind: TypingErrorKind) -> Self {
        TypingError { path: path.clone(), kind }
    }
}

/// Tracks which channel each branch-group identifier lives on, so that
/// selections scattered across conditional branches assemble into one
/// selection type.
#[derive(Debug, Default, Clone)]
pub struct BranchGroupTable {
    groups: Vec<(String, Channel)>,
}

impl BranchGroupTable {
    fn register(
        &mut self,
        id: &str,
        channel: &Channel,
        path: &NodePath,
    ) -> Result<(), TypingError> {
        match self.groups.iter().find(|(g, _)| g == id) {
            Some((_, seen)) if seen == channel => Ok(()),
            Some(_) => Err(TypingError::at(
                path,
                TypingErrorKind::UnknownBranchGroup(id.to_string()),
            )),
            None => {
                self.groups.push((id.to_string(), channel.clone()));
                Ok(())
            }
        }
    }

    pub fn channel_of(&self, id: &str) -> Option<&Channel> {
        self.groups.iter().find(|(g, _)| g == id).map(|(_, c)| c)
    }
}

struct RecSig {
    var: String,
    value_params: Vec<(String, Sort)>,
    /// Session channels the channel parameters were bound to, in order.
    bound_channels: Vec<Channel>,
}

struct Inference<'a> {
    solver: &'a Solver,
    ctx: Vec<Formula>,
    vars: Vec<(String, Sort)>,
    /// Stack of channel scopes with their session resolutions.
    scopes: Vec<Vec<(Channel, Channel)>>,
    recs: Vec<RecSig>,
    groups: BranchGroupTable,
}

/// Infers the session type of a participant process by a depth-first
/// traversal. The resulting environment maps the opened session to a local
/// assertion for the declared role; send assertions are validated against
/// the context of prior sends and receives along the way.
pub fn infer_type(
    process: &Process,
    _mode: &TypingMode,
    solver: &Solver,
) -> Result<TypingEnvironment, TypingError> {
    let mut inference =
        Inference { solver, ctx: Vec::new(), vars: Vec::new(), scopes: Vec::new(), recs: Vec::new(), groups: BranchGroupTable::default() };
    let root = NodePath::root();
    match process {
        Process::Init { service, participants, channels, body } => {
            let role = participants.first().cloned().unwrap_or_else(|| Participant::new("?"));
            inference.session(service, &role, channels, body, root)
        }
        Process::Join { service, participant, channels, body } => {
            inference.session(service, participant, channels, body, root)
        }
        _ => Err(TypingError::at(&root, TypingErrorKind::NoSession)),
    }
}

impl<'a> Inference<'a> {
    fn session(
        &mut self,
        service: &str,
        role: &Participant,
        channels: &[Channel],
        body: &Process,
        root: NodePath,
    ) -> Result<TypingEnvironment, TypingError> {
        self.scopes.push(channels.iter().map(|c| (c.clone(), c.clone())).collect());
        let ty = self.infer(body, root.child(0))?;
        self.scopes.pop();
        Ok(TypingEnvironment {
            entries: vec![EnvEntry {
                service: service.to_string(),
                channels: channels.to_vec(),
                binding: EnvBinding::Role { participant: role.clone(), ty },
                status: EntryStatus::Open,
            }],
        })
    }

    fn resolve(&self, channel: &Channel, path: &NodePath) -> Result<Channel, TypingError> {
        match self.scopes.last().and_then(|scope| {
            scope.iter().find(|(name, _)| name == channel).map(|(_, session)| session.clone())
        }) {
            Some(resolved) => Ok(resolved),
            None => Err(TypingError::at(path, TypingErrorKind::ChannelNotInScope(channel.clone()))),
        }
    }

    fn sort_of_expr(&self, e: &Expr, path: &NodePath) -> Result<Sort, TypingError> {
        let ctx = |name: &str| {
            self.vars.iter().rev().find(|(v, _)| v == name).map(|(_, s)| *s)
        };
        e.sort_in(&ctx).ok_or_else(|| {
            TypingError::at(
                path,
                TypingErrorKind::SortMismatch { expected: Sort::Int, found: e.to_string() },
            )
        })
    }

    fn check_sort(&self, e: &Expr, expected: Sort, path: &NodePath) -> Result<(), TypingError> {
        let found = self.sort_of_expr(e, path)?;
        // Date payloads are written as opaque string literals.
        if found == expected || (expected == Sort::Date && found == Sort::Str) {
            Ok(())
        } else {
            Err(TypingError::at(
                path,
                TypingErrorKind::SortMismatch { expected, found: found.to_string() },
            ))
        }
    }

    fn context_formula(&self) -> Formula {
        Formula::conj(self.ctx.clone())
    }

    /// Rebinding a name invalidates context facts about its previous value
    /// (the language allows shadowing, with the innermost binding in
    /// scope). Returns the context to restore afterwards.
    fn bind_payload(&mut self, payload_var: &str) -> Vec<Formula> {
        let saved = self.ctx.clone();
        if self.vars.iter().any(|(v, _)| v == payload_var) {
            self.ctx.retain(|f| !f.free_variables().contains(payload_var));
        }
        saved
    }

    fn render_context(&self) -> String {
        let conj = self.context_formula();
        conj.spaced()
    }

    fn infer(&mut self, p: &Process, path: NodePath) -> Result<LocalAssertion, TypingError> {
        match p {
            Process::Inact => Ok(LocalAssertion::End),
            Process::Init { .. } | Process::Join { .. } => {
                // Sessions are opened at the top of a participant only.
                Err(TypingError::at(&path, TypingErrorKind::NoSession))
            }
            Process::Send { channel, expr, payload_var, sort, assertion, body } => {
                let resolved = self.resolve(channel, &path)?;
                self.check_sort(expr, *sort, &path)?;
                // The sent value must guarantee the assertion under what is
                // known so far.
                let instantiated =
                    assertion.substitute(&[(payload_var.clone(), expr.clone())]);
                let holds = self
                    .solver
                    .implies(&self.context_formula(), &instantiated)
                    .map_err(|e| TypingError::at(&path, TypingErrorKind::Logic(e)))?;
                if !holds {
                    return Err(TypingError::at(
                        &path,
                        TypingErrorKind::SendUnsat {
                            context: self.render_context(),
                            assertion: instantiated.spaced(),
                        },
                    ));
                }
                let saved_ctx = self.bind_payload(payload_var);
                self.vars.push((payload_var.clone(), *sort));
                self.ctx.push(assertion.clone());
                let cont = self.infer(body, path.child(0))?;
                self.ctx = saved_ctx;
                self.vars.pop();
                Ok(LocalAssertion::send(
                    resolved,
                    payload_var.clone(),
                    *sort,
                    assertion.clone(),
                    cont,
                ))
            }
            Process::Receive { channel, payload_var, sort, assertion, body } => {
                let resolved = self.resolve(channel, &path)?;
                let saved_ctx = self.bind_payload(payload_var);
                self.vars.push((payload_var.clone(), *sort));
                self.ctx.push(assertion.clone());
                let cont = self.infer(body, path.child(0))?;
                self.ctx = saved_ctx;
                self.vars.pop();
                Ok(LocalAssertion::receive(
                    resolved,
                    payload_var.clone(),
                    *sort,
                    assertion.clone(),
                    cont,
                ))
            }
            Process::Select { channel, assertion, branch_id, label, body } => {
                let resolved = self.resolve(channel, &path)?;
                self.groups.register(branch_id, &resolved, &path)?;
                let cont = self.infer(body, path.child(0))?;
                Ok(LocalAssertion::Select {
                    channel: resolved,
                    branch_id: branch_id.clone(),
                    arms: vec![LocalBranchArm {
                        label: label.clone(),
                        assertion: assertion.clone(),
                        continuation: cont,
                    }],
                })
            }
            Process::Branch { channel, branch_id, arms } => {
                let resolved = self.resolve(channel, &path)?;
                self.groups.register(branch_id, &resolved, &path)?;
                let mut out = Vec::new();
                for (i, arm) in arms.iter().enumerate() {
                    self.ctx.push(arm.assertion.clone());
                    let continuation = self.infer(&arm.body, path.child(i as u32))?;
                    self.ctx.pop();
                    out.push(LocalBranchArm {
                        label: arm.label.clone(),
                        assertion: arm.assertion.clone(),
                        continuation,
                    });
                }
                Ok(LocalAssertion::Branch {
                    channel: resolved,
                    branch_id: branch_id.clone(),
                    arms: out,
                })
            }
            Process::IfThenElse { cond, then_body, else_body } => {
                self.check_sort(cond, Sort::Bool, &path)?;
                // Conditions do not enter the assertion context.
                let then_ty = self.infer(then_body, path.child(0))?;
                let else_ty = self.infer(else_body, path.child(1))?;
                self.merge(then_ty, else_ty, &path)
            }
            Process::Rec { var, value_args, channel_args, value_params, channel_params, body } => {
                if value_args.len() != value_params.len()
                    || channel_args.len() != channel_params.len()
                {
                    return Err(TypingError::at(
                        &path,
                        TypingErrorKind::ArityMismatch { var: var.clone() },
                    ));
                }
                for (arg, (_, sort)) in value_args.iter().zip(value_params) {
                    self.check_sort(arg, *sort, &path)?;
                }
                let bound: Vec<Channel> = channel_args
                    .iter()
                    .map(|c| self.resolve(c, &path))
                    .collect::<Result<_, _>>()?;
                self.scopes.push(
                    channel_params.iter().cloned().zip(bound.iter().cloned()).collect(),
                );
                self.recs.push(RecSig {
                    var: var.clone(),
                    value_params: value_params.clone(),
                    bound_channels: bound,
                });
                let depth = self.vars.len();
                for (name, sort) in value_params {
                    self.vars.push((name.clone(), *sort));
                }
                // Facts about shadowed names no longer apply inside.
                let saved_ctx = self.ctx.clone();
                self.ctx.retain(|f| {
                    !f.free_variables().iter().any(|v| value_params.iter().any(|(p, _)| p == v))
                });
                let body_ty = self.infer(body, path.child(0))?;
                self.ctx = saved_ctx;
                self.vars.truncate(depth);
                self.recs.pop();
                self.scopes.pop();
                Ok(LocalAssertion::Rec {
                    var: var.clone(),
                    params: value_params
                        .iter()
                        .zip(value_args)
                        .map(|((formal, sort), init)| RecParam {
                            formal: formal.clone(),
                            sort: *sort,
                            init: init.clone(),
                        })
                        .collect(),
                    invariant: Formula::True,
                    body: Box::new(body_ty),
                })
            }
            Process::Call { var, value_actuals, channel_actuals } => {
                let sig_pos = self
                    .recs
                    .iter()
                    .rposition(|sig| &sig.var == var)
                    .ok_or_else(|| {
                        TypingError::at(
                            &path,
                            TypingErrorKind::UnknownRecursionVariable(var.clone()),
                        )
                    })?;
                if value_actuals.len() != self.recs[sig_pos].value_params.len()
                    || channel_actuals.len() != self.recs[sig_pos].bound_channels.len()
                {
                    return Err(TypingError::at(
                        &path,
                        TypingErrorKind::ArityMismatch { var: var.clone() },
                    ));
                }
                let expected_sorts: Vec<Sort> =
                    self.recs[sig_pos].value_params.iter().map(|(_, s)| *s).collect();
                for (actual, sort) in value_actuals.iter().zip(expected_sorts) {
                    self.check_sort(actual, sort, &path)?;
                }
                // The loop must be re-entered with the channels it was
                // opened on, in the same roles.
                let resolved: Vec<Channel> = channel_actuals
                    .iter()
                    .map(|c| self.resolve(c, &path))
                    .collect::<Result<_, _>>()?;
                if resolved != self.recs[sig_pos].bound_channels {
                    return Err(TypingError::at(
                        &path,
                        TypingErrorKind::ChannelMismatchAtCall { var: var.clone() },
                    ));
                }
                Ok(LocalAssertion::Call { var: var.clone(), actuals: value_actuals.clone() })
            }
        }
    }

    /// Merges the types of two conditional branches. Selections of the same
    /// group contribute their labels to one menu; everything else must
    /// agree structurally.
    fn merge(
        &self,
        a: LocalAssertion,
        b: LocalAssertion,
        path: &NodePath,
    ) -> Result<LocalAssertion, TypingError> {
        if a == b {
            return Ok(a);
        }
        match (a, b) {
            (
                LocalAssertion::Select { channel: ca, branch_id: ia, arms: aa },
                LocalAssertion::Select { channel: cb, branch_id: ib, arms: ab },
            ) if ca == cb && ia == ib => {
                let mut arms = aa;
                for arm in ab {
                    match arms.iter().position(|seen| seen.label == arm.label) {
                        None => arms.push(arm),
                        Some(i) => {
                            if arms[i] != arm {
                                return Err(TypingError::at(
                                    path,
                                    TypingErrorKind::IfBranchesDiffer(format!(
                                        "label `{}` of group `{ia}` is selected with different continuations",
                                        arm.label
                                    )),
                                ));
                            }
                        }
                    }
                }
                Ok(LocalAssertion::Select { channel: ca, branch_id: ia, arms })
            }
            (
                LocalAssertion::Send {
                    channel: ca,
                    payload_var: va,
                    sort: sa,
                    assertion: fa,
                    continuation: ka,
                },
                LocalAssertion::Send {
                    channel: cb,
                    payload_var: vb,
                    sort: sb,
                    assertion: fb,
                    continuation: kb,
                },
            ) if ca == cb && va == vb && sa == sb && fa == fb => {
                let merged = self.merge(*ka, *kb, path)?;
                Ok(LocalAssertion::send(ca, va, sa, fa, merged))
            }
            (
                LocalAssertion::Receive {
                    channel: ca,
                    payload_var: va,
                    sort: sa,
                    assertion: fa,
                    continuation: ka,
                },
                LocalAssertion::Receive {
                    channel: cb,
                    payload_var: vb,
                    sort: sb,
                    assertion: fb,
                    continuation: kb,
                },
            ) if ca == cb && va == vb && sa == sb && fa == fb => {
                let merged = self.merge(*ka, *kb, path)?;
                Ok(LocalAssertion::receive(ca, va, sa, fa, merged))
            }
            (
                LocalAssertion::Branch { channel: ca, branch_id: ia, arms: aa },
                LocalAssertion::Branch { channel: cb, branch_id: ib, arms: ab },
            ) if ca == cb && ia == ib && aa.len() == ab.len() => {
                let mut arms = Vec::new();
                for (arm_a, arm_b) in aa.into_iter().zip(ab) {
                    if arm_a.label != arm_b.label || arm_a.assertion != arm_b.assertion {
                        return Err(TypingError::at(
                            path,
                            TypingErrorKind::IfBranchesDiffer(format!(
                                "branch group `{ia}` offers different arms"
                            )),
                        ));
                    }
                    let continuation =
                        self.merge(arm_a.continuation, arm_b.continuation, path)?;
                    arms.push(LocalBranchArm {
                        label: arm_a.label,
                        assertion: arm_a.assertion,
                        continuation,
                    });
                }
                Ok(LocalAssertion::Branch { channel: ca, branch_id: ia, arms })
            }
            (a, b) => Err(TypingError::at(
                path,
                TypingErrorKind::IfBranchesDiffer(format!("`{a}` versus `{b}`")),
            )),
        }
    }
}
