//! Session-type inference for participant processes, binary and multiparty
//! environment composition, and comparison of inferred types against
//! projections under refinement.

mod dual;
mod infer;
mod refine;

use std::fmt;

pub use dual::dual;
pub use infer::{infer_type, BranchGroupTable, TypingError, TypingErrorKind};
pub use refine::{refines, Mismatch, Refinement};

use crate::diagnostics::{CheckReport, Violation, ViolationKind};
use crate::parse::ProtocolFile;
use crate::presburger::Solver;
use crate::syntax::{Channel, LocalAssertion, LocalBranchArm, Participant};

/// Whether a channel group is still awaiting a peer or fully composed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryStatus {
    Open,
    Closed,
}

/// What a typing-environment entry assigns to its channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvBinding {
    Role { participant: Participant, ty: LocalAssertion },
    /// Both endpoints composed away (binary mode): the interactions are
    /// internal.
    Bottom,
}

/// One entry of a typing environment: a session's channels assigned to a
/// participant's local assertion (or to `Bottom` once composed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvEntry {
    pub service: String,
    pub channels: Vec<Channel>,
    pub binding: EnvBinding,
    pub status: EntryStatus,
}

impl fmt::Display for EnvEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.service)?;
        for (i, c) in self.channels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")?;
        match &self.binding {
            EnvBinding::Role { participant, ty } => write!(f, "@{participant} |- {ty}"),
            EnvBinding::Bottom => write!(f, " |- bot"),
        }
    }
}

/// A typing environment: the sessions (or channels, once composed) a system
/// fragment is committed to.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypingEnvironment {
    pub entries: Vec<EnvEntry>,
}

impl TypingEnvironment {
    pub fn single(entry: EnvEntry) -> Self {
        TypingEnvironment { entries: vec![entry] }
    }

    /// The local assertion of the given participant, if any entry types it.
    pub fn type_of(&self, participant: &Participant) -> Option<&LocalAssertion> {
        self.entries.iter().find_map(|e| match &e.binding {
            EnvBinding::Role { participant: p, ty } if p == participant => Some(ty),
            _ => None,
        })
    }

    /// Entries sorted for order-insensitive comparison.
    pub fn normalised(&self) -> Vec<EnvEntry> {
        let mut out = self.entries.clone();
        out.sort_by_key(|e| {
            let who = match &e.binding {
                EnvBinding::Role { participant, .. } => participant.name().to_string(),
                EnvBinding::Bottom => String::new(),
            };
            (e.service.clone(), who, format!("{:?}", e.channels))
        });
        out
    }
}

/// The typing algorithm is parameterised by how environments are tested for
/// compatibility and composed: binary sessions demand dual endpoints and
/// close channels to `Bottom`, multiparty sessions demand distinct roles
/// and take the union.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TypingMode {
    Binary,
    Multiparty,
}

impl TypingMode {
    pub fn name(self) -> &'static str {
        match self {
            TypingMode::Binary => "binary",
            TypingMode::Multiparty => "multiparty",
        }
    }

    /// Tests compatibility; on failure explains which channel clashes.
    pub fn compatible(
        self,
        a: &TypingEnvironment,
        b: &TypingEnvironment,
    ) -> Result<(), String> {
        match self {
            TypingMode::Multiparty => {
                for ea in &a.entries {
                    for eb in &b.entries {
                        if ea.status != EntryStatus::Open || eb.status != EntryStatus::Open {
                            continue;
                        }
                        if !ea.channels.iter().any(|c| eb.channels.contains(c)) {
                            continue;
                        }
                        match (&ea.binding, &eb.binding) {
                            (
                                EnvBinding::Role { participant: pa, .. },
                                EnvBinding::Role { participant: pb, .. },
                            ) if pa == pb => {
                                return Err(format!(
                                    "participant `{pa}` is typed twice for shared channels"
                                ));
                            }
                            _ => {}
                        }
                    }
                }
                Ok(())
            }
            TypingMode::Binary => {
                for ea in &a.entries {
                    for eb in &b.entries {
                        if ea.status != EntryStatus::Open || eb.status != EntryStatus::Open {
                            continue;
                        }
                        let (EnvBinding::Role { ty: ta, .. }, EnvBinding::Role { ty: tb, .. }) =
                            (&ea.binding, &eb.binding)
                        else {
                            continue;
                        };
                        for channel in &ea.channels {
                            if !eb.channels.contains(channel) {
                                continue;
                            }
                            let ra = restrict(ta, channel).map_err(|e| {
                                format!("channel `{channel}`: {e}")
                            })?;
                            let rb = restrict(tb, channel).map_err(|e| {
                                format!("channel `{channel}`: {e}")
                            })?;
                            if dual(&ra) != rb {
                                return Err(format!(
                                    "types of channel `{channel}` are not dual: `{ra}` versus `{rb}`"
                                ));
                            }
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Composes two compatible environments.
    pub fn compose(
        self,
        a: &TypingEnvironment,
        b: &TypingEnvironment,
    ) -> Result<TypingEnvironment, String> {
        self.compatible(a, b)?;
        match self {
            TypingMode::Multiparty => {
                let mut entries = a.entries.clone();
                entries.extend(b.entries.clone());
                Ok(TypingEnvironment { entries })
            }
            TypingMode::Binary => {
                let mut entries: Vec<EnvEntry> = Vec::new();
                let mut consumed_b: Vec<usize> = Vec::new();
                for ea in &a.entries {
                    let partner = b.entries.iter().enumerate().find(|(i, eb)| {
                        !consumed_b.contains(i)
                            && ea.status == EntryStatus::Open
                            && eb.status == EntryStatus::Open
                            && ea.service == eb.service
                            && ea.channels.iter().any(|c| eb.channels.contains(c))
                    });
                    match partner {
                        Some((i, eb)) => {
                            consumed_b.push(i);
                            // Shared channels become internal.
                            for channel in &ea.channels {
                                if eb.channels.contains(channel) {
                                    entries.push(EnvEntry {
                                        service: ea.service.clone(),
                                        channels: vec![channel.clone()],
                                        binding: EnvBinding::Bottom,
                                        status: EntryStatus::Closed,
                                    });
                                }
                            }
                        }
                        None => entries.push(ea.clone()),
                    }
                }
                for (i, eb) in b.entries.iter().enumerate() {
                    if !consumed_b.contains(&i) {
                        entries.push(eb.clone());
                    }
                }
                Ok(TypingEnvironment { entries })
            }
        }
    }
}

/// Projects a local assertion onto the actions of a single channel; used by
/// the binary mode's per-channel duality test. Choices made on other
/// channels must look the same on this one.
pub fn restrict(t: &LocalAssertion, channel: &Channel) -> Result<LocalAssertion, String> {
    match t {
        LocalAssertion::End => Ok(LocalAssertion::End),
        LocalAssertion::Send { channel: c, payload_var, sort, assertion, continuation } => {
            let cont = restrict(continuation, channel)?;
            if c == channel {
                Ok(LocalAssertion::send(c.clone(), payload_var.clone(), *sort, assertion.clone(), cont))
            } else {
                Ok(cont)
            }
        }
        LocalAssertion::Receive { channel: c, payload_var, sort, assertion, continuation } => {
            let cont = restrict(continuation, channel)?;
            if c == channel {
                Ok(LocalAssertion::receive(c.clone(), payload_var.clone(), *sort, assertion.clone(), cont))
            } else {
                Ok(cont)
            }
        }
        LocalAssertion::Select { channel: c, branch_id, arms }
        | LocalAssertion::Branch { channel: c, branch_id, arms } => {
            let select = matches!(t, LocalAssertion::Select { .. });
            if c == channel {
                let arms = arms
                    .iter()
                    .map(|arm| {
                        restrict(&arm.continuation, channel).map(|continuation| LocalBranchArm {
                            label: arm.label.clone(),
                            assertion: arm.assertion.clone(),
                            continuation,
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(if select {
                    LocalAssertion::Select { channel: c.clone(), branch_id: branch_id.clone(), arms }
                } else {
                    LocalAssertion::Branch { channel: c.clone(), branch_id: branch_id.clone(), arms }
                })
            } else {
                let mut restricted = arms
                    .iter()
                    .map(|arm| restrict(&arm.continuation, channel))
                    .collect::<Result<Vec<_>, _>>()?;
                let first = restricted.pop().unwrap_or(LocalAssertion::End);
                if restricted.iter().any(|r| *r != first) {
                    return Err(format!(
                        "a choice on `{c}` changes the behaviour on `{channel}`; the type is not channel-separable"
                    ));
                }
                Ok(first)
            }
        }
        LocalAssertion::Rec { var, params, invariant, body } => {
            let restricted = restrict(body, channel)?;
            match restricted {
                LocalAssertion::End | LocalAssertion::Call { .. } => Ok(LocalAssertion::End),
                body => Ok(LocalAssertion::Rec {
                    var: var.clone(),
                    params: params.clone(),
                    invariant: invariant.clone(),
                    body: Box::new(body),
                }),
            }
        }
        LocalAssertion::Call { .. } => Ok(t.clone()),
    }
}

/// A participant together with its inferred session type.
#[derive(Debug, Clone)]
pub struct TypedParticipant {
    pub participant: Participant,
    pub ty: LocalAssertion,
}

/// A refinement failure, kept whole for rendering.
#[derive(Debug, Clone)]
pub struct MismatchReport {
    pub participant: Participant,
    pub inferred: LocalAssertion,
    pub projected: LocalAssertion,
    pub mismatch: Mismatch,
}

/// Everything the validation stage produces: inferred types for printing,
/// the composed environment, refinement failures and the aggregated report.
#[derive(Debug, Clone)]
pub struct ValidationOutcome {
    pub report: CheckReport,
    pub typed: Vec<TypedParticipant>,
    pub composed: Option<TypingEnvironment>,
    pub mismatches: Vec<MismatchReport>,
}

/// STREAM 2 tail: infers every participant's type, composes the
/// environments under the chosen mode, and compares each inferred type with
/// its projection under refinement. All failures are aggregated.
pub fn validate_all(
    file: &ProtocolFile,
    projections: &[(Participant, LocalAssertion)],
    mode: TypingMode,
    solver: &Solver,
) -> ValidationOutcome {
    let mut violations: Vec<Violation> = Vec::new();
    let mut typed: Vec<TypedParticipant> = Vec::new();
    let mut envs: Vec<TypingEnvironment> = Vec::new();
    let mut mismatches: Vec<MismatchReport> = Vec::new();

    for (participant, process) in &file.participants {
        match infer_type(process, &mode, solver) {
            Ok(env) => {
                if let Some(ty) = env.type_of(participant) {
                    typed.push(TypedParticipant { participant: participant.clone(), ty: ty.clone() });
                }
                envs.push(env);
            }
            Err(err) => {
                let kind = match err.kind {
                    TypingErrorKind::SendUnsat { .. } => ViolationKind::TypingSend,
                    TypingErrorKind::UnknownBranchGroup(_) => ViolationKind::BranchGroup,
                    TypingErrorKind::ChannelNotInScope(_) => ViolationKind::ChannelScope,
                    TypingErrorKind::SortMismatch { .. } => ViolationKind::Sort,
                    TypingErrorKind::Logic(_) => ViolationKind::Logic,
                    _ => ViolationKind::Arity,
                };
                let pos = file.source_map.process_pos(participant.name(), &err.path);
                violations.push(
                    Violation::new(kind, format!("{}:{}", participant, err.path), err.to_string())
                        .at(pos),
                );
            }
        }
    }

    // Composition is a sequential fold over the participant environments.
    let mut composed: Option<TypingEnvironment> = None;
    for env in envs {
        composed = Some(match composed {
            None => env,
            Some(acc) => match mode.compose(&acc, &env) {
                Ok(next) => next,
                Err(reason) => {
                    violations.push(Violation::new(
                        ViolationKind::Incompatible,
                        "composition",
                        reason,
                    ));
                    acc
                }
            },
        });
    }

    for TypedParticipant { participant, ty } in &typed {
        let Some((_, projection)) = projections.iter().find(|(p, _)| p == participant) else {
            violations.push(Violation::new(
                ViolationKind::TypeMismatch,
                participant.name(),
                format!("no projection for `{participant}`"),
            ));
            continue;
        };
        match refines(ty, projection, solver) {
            Ok(Refinement::Ok) => {}
            Ok(Refinement::Mismatch(mismatch)) => {
                let mismatch = *mismatch;
                violations.push(Violation::new(
                    ViolationKind::TypeMismatch,
                    format!("{participant}:{}", mismatch.path),
                    format!("Local type doesn't match projection for {participant}!"),
                ));
                mismatches.push(MismatchReport {
                    participant: participant.clone(),
                    inferred: ty.clone(),
                    projected: projection.clone(),
                    mismatch,
                });
            }
            Err(err) => {
                violations.push(Violation::new(
                    ViolationKind::Logic,
                    participant.name(),
                    err.to_string(),
                ));
            }
        }
    }

    ValidationOutcome {
        report: CheckReport::from_violations(violations),
        typed,
        composed,
        mismatches,
    }
}
