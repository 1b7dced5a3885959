use std::collections::BTreeMap;

use crate::presburger::Solver;
use crate::syntax::{
    BinOp, Channel, CmpOp, Expr, Formula, Participant, Process, Sort,
};

use super::value::{deserialize_value, serialize_label, serialize_value, Value};
use super::{Action, RuntimeError, TraceEvent};

/// FIFO queues, one per session channel.
pub(super) struct Channels {
    queues: BTreeMap<Channel, Vec<String>>,
}

impl Channels {
    pub(super) fn new(channels: &[Channel]) -> Self {
        Channels { queues: channels.iter().map(|c| (c.clone(), Vec::new())).collect() }
    }

    fn push(&mut self, channel: &Channel, payload: String) {
        self.queues.entry(channel.clone()).or_default().push(payload);
    }

    fn pop(&mut self, channel: &Channel) -> Option<String> {
        let queue = self.queues.get_mut(channel)?;
        if queue.is_empty() {
            None
        } else {
            Some(queue.remove(0))
        }
    }
}

struct RecFrame {
    var: String,
    value_params: Vec<(String, Sort)>,
    body: Process,
    scope_depth: usize,
    store_depth: usize,
}

/// One sequential execution unit: a participant working through its
/// process tree with a variable store and channel scopes.
pub(super) struct Task {
    pub participant: Participant,
    current: Option<Process>,
    store: Vec<(String, Value)>,
    scopes: Vec<Vec<(Channel, Channel)>>,
    frames: Vec<RecFrame>,
    monitor: bool,
}

pub(super) enum StepOutcome {
    Progressed(Action, Option<Channel>, String),
    Blocked(Channel),
    Done,
}

impl Task {
    pub(super) fn new(
        participant: Participant,
        body: Process,
        session_channels: &[Channel],
        monitor: bool,
    ) -> Self {
        Task {
            participant,
            current: Some(body),
            store: Vec::new(),
            scopes: vec![session_channels.iter().map(|c| (c.clone(), c.clone())).collect()],
            frames: Vec::new(),
            monitor,
        }
    }

    pub(super) fn is_done(&self) -> bool {
        self.current.is_none()
    }

    fn lookup(&self, var: &str) -> Result<Value, RuntimeError> {
        self.store
            .iter()
            .rev()
            .find(|(v, _)| v == var)
            .map(|(_, value)| value.clone())
            .ok_or_else(|| RuntimeError::Internal(format!("unbound variable `{var}` at runtime")))
    }

    fn resolve(&self, channel: &Channel) -> Result<Channel, RuntimeError> {
        self.scopes
            .last()
            .and_then(|scope| {
                scope.iter().find(|(name, _)| name == channel).map(|(_, c)| c.clone())
            })
            .ok_or_else(|| {
                RuntimeError::Internal(format!("channel `{channel}` out of scope at runtime"))
            })
    }

    fn eval(&self, e: &Expr) -> Result<Value, RuntimeError> {
        match e {
            Expr::Int(n) => Ok(Value::Int(*n)),
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Str(s) => Ok(Value::Str(s.clone())),
            Expr::Var(v) => self.lookup(v),
            Expr::Neg(inner) => match self.eval(inner)? {
                Value::Int(n) => Ok(Value::Int(-n)),
                other => Err(RuntimeError::Internal(format!("cannot negate {other}"))),
            },
            Expr::Not(inner) => match self.eval(inner)? {
                Value::Bool(b) => Ok(Value::Bool(!b)),
                other => Err(RuntimeError::Internal(format!("cannot invert {other}"))),
            },
            Expr::Bin(op, l, r) => {
                let (a, b) = (self.eval(l)?, self.eval(r)?);
                match (op, a, b) {
                    (BinOp::Add, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a + b)),
                    (BinOp::Sub, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a - b)),
                    (BinOp::Mul, Value::Int(a), Value::Int(b)) => Ok(Value::Int(a * b)),
                    // Floor division, matching the logic's encoding.
                    (BinOp::Div, Value::Int(a), Value::Int(b)) if b > 0 => {
                        Ok(Value::Int(a.div_euclid(b)))
                    }
                    (BinOp::And, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a && b)),
                    (BinOp::Or, Value::Bool(a), Value::Bool(b)) => Ok(Value::Bool(a || b)),
                    (op, a, b) => Err(RuntimeError::Internal(format!(
                        "ill-sorted operation {a} {} {b}",
                        op.symbol()
                    ))),
                }
            }
            Expr::Cmp(op, l, r) => {
                let (a, b) = (self.eval(l)?, self.eval(r)?);
                let holds = match (&a, &b) {
                    (Value::Int(a), Value::Int(b)) => op.holds(*a, *b),
                    // Opaque values compare by equality only.
                    (Value::Str(a), Value::Str(b)) | (Value::Date(a), Value::Date(b)) => match op {
                        CmpOp::Eq => a == b,
                        CmpOp::Ne => a != b,
                        _ => {
                            return Err(RuntimeError::Internal(
                                "opaque values admit only equality comparisons".into(),
                            ))
                        }
                    },
                    (Value::Bool(a), Value::Bool(b)) => match op {
                        CmpOp::Eq => a == b,
                        CmpOp::Ne => a != b,
                        _ => {
                            return Err(RuntimeError::Internal(
                                "booleans admit only equality comparisons".into(),
                            ))
                        }
                    },
                    _ => {
                        return Err(RuntimeError::Internal(format!(
                            "comparison across sorts: {a} vs {b}"
                        )))
                    }
                };
                Ok(Value::Bool(holds))
            }
        }
    }

    /// Decides a (possibly quantified) assertion under the current store.
    fn assertion_holds(
        &self,
        assertion: &Formula,
        extra: &[(String, Value)],
        solver: &Solver,
    ) -> Result<bool, RuntimeError> {
        if assertion.is_true() {
            return Ok(true);
        }
        let mut bindings: Vec<(String, Expr)> = Vec::new();
        for (var, value) in self.store.iter().chain(extra) {
            let image = match value {
                Value::Int(n) => Expr::Int(*n),
                Value::Bool(b) => Expr::Bool(*b),
                // Opaque values cannot occur in assertions.
                Value::Str(_) | Value::Date(_) => continue,
            };
            bindings.push((var.clone(), image));
        }
        let closed = assertion.substitute(&bindings);
        solver.is_valid(&closed).map_err(RuntimeError::Logic)
    }

    fn monitor_check(
        &self,
        assertion: &Formula,
        extra: &[(String, Value)],
        solver: &Solver,
    ) -> Result<(), RuntimeError> {
        if !self.monitor {
            return Ok(());
        }
        if self.assertion_holds(assertion, extra, solver)? {
            Ok(())
        } else {
            let store = self
                .store
                .iter()
                .chain(extra)
                .map(|(v, value)| format!("{v}={value}"))
                .collect::<Vec<_>>()
                .join(", ");
            Err(RuntimeError::MonitorViolation {
                participant: self.participant.clone(),
                assertion: assertion.compact(),
                store,
            })
        }
    }

    /// Executes until the next observable action (conditionals are
    /// internal). Returns what happened so the scheduler can trace it.
    pub(super) fn step(
        &mut self,
        channels: &mut Channels,
        solver: &Solver,
    ) -> Result<StepOutcome, RuntimeError> {
        loop {
            let Some(current) = self.current.take() else {
                return Ok(StepOutcome::Done);
            };
            match current {
                Process::Inact => {
                    self.current = None;
                    return Ok(StepOutcome::Progressed(Action::End, None, String::new()));
                }
                Process::Init { .. } | Process::Join { .. } => {
                    return Err(RuntimeError::Internal(
                        "session headers are consumed at setup".into(),
                    ));
                }
                Process::Send { channel, expr, payload_var, sort, assertion, body } => {
                    let resolved = self.resolve(&channel)?;
                    let mut value = self.eval(&expr)?;
                    if sort == Sort::Date {
                        if let Value::Str(s) = value {
                            value = Value::Date(s);
                        }
                    }
                    self.monitor_check(
                        &assertion,
                        &[(payload_var.clone(), value.clone())],
                        solver,
                    )?;
                    let payload = serialize_value(&value);
                    channels.push(&resolved, payload.clone());
                    self.store.push((payload_var, value));
                    self.current = Some(*body);
                    return Ok(StepOutcome::Progressed(Action::Send, Some(resolved), payload));
                }
                Process::Receive { channel, payload_var, sort, assertion, body } => {
                    let resolved = self.resolve(&channel)?;
                    let Some(payload) = channels.pop(&resolved) else {
                        self.current = Some(Process::Receive {
                            channel,
                            payload_var,
                            sort,
                            assertion,
                            body,
                        });
                        return Ok(StepOutcome::Blocked(resolved));
                    };
                    let value = deserialize_value(&payload, sort).map_err(RuntimeError::Decode)?;
                    self.monitor_check(
                        &assertion,
                        &[(payload_var.clone(), value.clone())],
                        solver,
                    )?;
                    self.store.push((payload_var, value));
                    self.current = Some(*body);
                    return Ok(StepOutcome::Progressed(Action::Receive, Some(resolved), payload));
                }
                Process::Select { channel, assertion, branch_id, label, body } => {
                    let resolved = self.resolve(&channel)?;
                    self.monitor_check(&assertion, &[], solver)?;
                    let payload = serialize_label(&branch_id, &label);
                    channels.push(&resolved, payload.clone());
                    self.current = Some(*body);
                    return Ok(StepOutcome::Progressed(Action::Select, Some(resolved), payload));
                }
                Process::Branch { channel, branch_id, arms } => {
                    let resolved = self.resolve(&channel)?;
                    let Some(payload) = channels.pop(&resolved) else {
                        self.current = Some(Process::Branch { channel, branch_id, arms });
                        return Ok(StepOutcome::Blocked(resolved));
                    };
                    let Some(arm) =
                        arms.iter().find(|a| serialize_label(&branch_id, &a.label) == payload)
                    else {
                        return Err(RuntimeError::Decode(super::value::DecodeError::Value {
                            payload,
                            sort: Sort::Str,
                        }));
                    };
                    self.monitor_check(&arm.assertion, &[], solver)?;
                    self.current = Some(arm.body.clone());
                    return Ok(StepOutcome::Progressed(Action::Branch, Some(resolved), payload));
                }
                Process::IfThenElse { cond, then_body, else_body } => {
                    match self.eval(&cond)? {
                        Value::Bool(true) => self.current = Some(*then_body),
                        Value::Bool(false) => self.current = Some(*else_body),
                        other => {
                            return Err(RuntimeError::Internal(format!(
                                "condition evaluated to {other}"
                            )))
                        }
                    }
                    // Internal step; keep going to the next action.
                }
                Process::Rec { var, value_args, channel_args, value_params, channel_params, body } => {
                    let mut values = Vec::new();
                    for (arg, (name, _)) in value_args.iter().zip(&value_params) {
                        values.push((name.clone(), self.eval(arg)?));
                    }
                    let resolved: Vec<(Channel, Channel)> = channel_params
                        .iter()
                        .cloned()
                        .zip(
                            channel_args
                                .iter()
                                .map(|c| self.resolve(c))
                                .collect::<Result<Vec<_>, _>>()?,
                        )
                        .collect();
                    let payload = format!(
                        "{var}({})",
                        values.iter().map(|(_, v)| v.to_string()).collect::<Vec<_>>().join(",")
                    );
                    self.frames.push(RecFrame {
                        var: var.clone(),
                        value_params: value_params.clone(),
                        body: (*body).clone(),
                        scope_depth: self.scopes.len(),
                        store_depth: self.store.len(),
                    });
                    self.scopes.push(resolved);
                    self.store.extend(values);
                    self.current = Some(*body);
                    return Ok(StepOutcome::Progressed(Action::RecCall, None, payload));
                }
                Process::Call { var, value_actuals, .. } => {
                    let Some(frame_idx) = self.frames.iter().rposition(|f| f.var == var) else {
                        return Err(RuntimeError::Internal(format!(
                            "call to unknown recursion `{var}`"
                        )));
                    };
                    let mut values = Vec::new();
                    {
                        let frame = &self.frames[frame_idx];
                        for (actual, (name, _)) in value_actuals.iter().zip(&frame.value_params) {
                            values.push((name.clone(), self.eval(actual)?));
                        }
                    }
                    // Tail call: inner frames die, the loop re-enters with
                    // fresh parameter bindings.
                    self.frames.truncate(frame_idx + 1);
                    let frame = &self.frames[frame_idx];
                    self.scopes.truncate(frame.scope_depth + 1);
                    self.store.truncate(frame.store_depth);
                    let payload = format!(
                        "{var}({})",
                        values.iter().map(|(_, v)| v.to_string()).collect::<Vec<_>>().join(",")
                    );
                    self.store.extend(values);
                    self.current = Some(frame.body.clone());
                    return Ok(StepOutcome::Progressed(Action::RecCall, None, payload));
                }
            }
        }
    }
}

/// Builds one trace event; the scheduler assigns the step ordinal.
pub(super) fn event(
    step: usize,
    participant: &Participant,
    action: Action,
    channel: Option<Channel>,
    payload: String,
) -> TraceEvent {
    TraceEvent { step, participant: participant.clone(), action, channel, payload }
}
