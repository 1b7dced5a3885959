//! Independent reference implementations for the erasure-commutation
//! suites: a classical assertion-free projector and a plain session-type
//! extractor for processes. Deliberately written as straight-line
//! recursion, separate from the production code paths they are compared
//! against.

use mpassert::syntax::{
    Formula, GlobalAssertion, LocalAssertion, LocalBranchArm, Process, RecParam, Sort,
};

/// Classical endpoint projection without assertions. Returns `None` when an
/// uninvolved participant would see different behaviour across branch arms.
pub fn plain_project(g: &GlobalAssertion, who: &str) -> Option<LocalAssertion> {
    project(g, who, &mut Vec::new())
}

fn project(
    g: &GlobalAssertion,
    who: &str,
    dead: &mut Vec<String>,
) -> Option<LocalAssertion> {
    match g {
        GlobalAssertion::End => Some(LocalAssertion::End),
        GlobalAssertion::Interaction {
            sender, receiver, channel, payload_var, sort, continuation, ..
        } => {
            let rest = project(continuation, who, dead)?;
            if sender.name() == who {
                Some(LocalAssertion::send(
                    channel.clone(),
                    payload_var.clone(),
                    *sort,
                    Formula::True,
                    rest,
                ))
            } else if receiver.name() == who {
                Some(LocalAssertion::receive(
                    channel.clone(),
                    payload_var.clone(),
                    *sort,
                    Formula::True,
                    rest,
                ))
            } else {
                Some(rest)
            }
        }
        GlobalAssertion::Branch { sender, receiver, channel, branch_id, arms } => {
            if sender.name() == who || receiver.name() == who {
                let mut out = Vec::new();
                for arm in arms {
                    out.push(LocalBranchArm {
                        label: arm.label.clone(),
                        assertion: Formula::True,
                        continuation: project(&arm.continuation, who, dead)?,
                    });
                }
                Some(if sender.name() == who {
                    LocalAssertion::Select {
                        channel: channel.clone(),
                        branch_id: branch_id.clone(),
                        arms: out,
                    }
                } else {
                    LocalAssertion::Branch {
                        channel: channel.clone(),
                        branch_id: branch_id.clone(),
                        arms: out,
                    }
                })
            } else {
                let mut seen: Option<LocalAssertion> = None;
                for arm in arms {
                    let projected = project(&arm.continuation, who, dead)?;
                    match &seen {
                        None => seen = Some(projected),
                        Some(first) if *first == projected => {}
                        Some(_) => return None,
                    }
                }
                seen.or(Some(LocalAssertion::End))
            }
        }
        GlobalAssertion::Rec { var, params, body, .. } => {
            if body.mentions(&mpassert::syntax::Participant::new(who)) {
                let inner = project(body, who, dead)?;
                Some(LocalAssertion::Rec {
                    var: var.clone(),
                    params: params.clone(),
                    invariant: Formula::True,
                    body: Box::new(inner),
                })
            } else {
                dead.push(var.clone());
                let out = project(body, who, dead);
                dead.pop();
                out
            }
        }
        GlobalAssertion::Call { var, actuals } => {
            if dead.contains(var) {
                Some(LocalAssertion::End)
            } else {
                Some(LocalAssertion::Call { var: var.clone(), actuals: actuals.clone() })
            }
        }
    }
}

/// Plain session-type extraction: the action skeleton of a process with
/// trivial assertions, resolving recursion channel parameters back to the
/// session channels. Panics on malformed input (test data is generated
/// well-formed).
pub fn plain_infer(p: &Process) -> LocalAssertion {
    match p {
        Process::Init { channels, body, .. } | Process::Join { channels, body, .. } => {
            let env: Vec<(String, String)> = channels
                .iter()
                .map(|c| (c.name().to_string(), c.name().to_string()))
                .collect();
            walk(body, &env)
        }
        _ => panic!("plain_infer expects a session-opening process"),
    }
}

fn resolve(env: &[(String, String)], name: &str) -> String {
    env.iter()
        .find(|(from, _)| from == name)
        .map(|(_, to)| to.clone())
        .unwrap_or_else(|| panic!("channel {name} out of scope"))
}

fn walk(p: &Process, env: &[(String, String)]) -> LocalAssertion {
    match p {
        Process::Inact => LocalAssertion::End,
        Process::Send { channel, payload_var, sort, body, .. } => LocalAssertion::send(
            mpassert::syntax::Channel::new(resolve(env, channel.name())),
            payload_var.clone(),
            *sort,
            Formula::True,
            walk(body, env),
        ),
        Process::Receive { channel, payload_var, sort, body, .. } => LocalAssertion::receive(
            mpassert::syntax::Channel::new(resolve(env, channel.name())),
            payload_var.clone(),
            *sort,
            Formula::True,
            walk(body, env),
        ),
        Process::Select { channel, branch_id, label, body, .. } => LocalAssertion::Select {
            channel: mpassert::syntax::Channel::new(resolve(env, channel.name())),
            branch_id: branch_id.clone(),
            arms: vec![LocalBranchArm {
                label: label.clone(),
                assertion: Formula::True,
                continuation: walk(body, env),
            }],
        },
        Process::Branch { channel, branch_id, arms } => LocalAssertion::Branch {
            channel: mpassert::syntax::Channel::new(resolve(env, channel.name())),
            branch_id: branch_id.clone(),
            arms: arms
                .iter()
                .map(|arm| LocalBranchArm {
                    label: arm.label.clone(),
                    assertion: Formula::True,
                    continuation: walk(&arm.body, env),
                })
                .collect(),
        },
        Process::IfThenElse { then_body, else_body, .. } => {
            let a = walk(then_body, env);
            let b = walk(else_body, env);
            merge(a, b)
        }
        Process::Rec { var, value_args, channel_args, value_params, channel_params, body } => {
            let inner_env: Vec<(String, String)> = channel_params
                .iter()
                .zip(channel_args)
                .map(|(param, arg)| (param.name().to_string(), resolve(env, arg.name())))
                .collect();
            LocalAssertion::Rec {
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
                body: Box::new(walk(body, &inner_env)),
            }
        }
        Process::Call { var, value_actuals, .. } => {
            LocalAssertion::Call { var: var.clone(), actuals: value_actuals.clone() }
        }
        Process::Init { .. } | Process::Join { .. } => {
            panic!("nested sessions are not part of the generated corpus")
        }
    }
}

fn merge(a: LocalAssertion, b: LocalAssertion) -> LocalAssertion {
    if a == b {
        return a;
    }
    match (a, b) {
        (
            LocalAssertion::Select { channel: ca, branch_id: ia, arms: mut aa },
            LocalAssertion::Select { channel: cb, branch_id: ib, arms: ab },
        ) if ca == cb && ia == ib => {
            for arm in ab {
                if let Some(existing) = aa.iter().position(|x| x.label == arm.label) {
                    assert_eq!(aa[existing], arm, "generated selects never disagree per label");
                } else {
                    aa.push(arm);
                }
            }
            LocalAssertion::Select { channel: ca, branch_id: ia, arms: aa }
        }
        (a, b) => panic!("generated conditionals merge only selections: {a} vs {b}"),
    }
}

/// Erases assertions from a local type (all become `true`).
pub fn erase_local(t: &LocalAssertion) -> LocalAssertion {
    match t {
        LocalAssertion::End => LocalAssertion::End,
        LocalAssertion::Send { channel, payload_var, sort, continuation, .. } => {
            LocalAssertion::send(
                channel.clone(),
                payload_var.clone(),
                *sort,
                Formula::True,
                erase_local(continuation),
            )
        }
        LocalAssertion::Receive { channel, payload_var, sort, continuation, .. } => {
            LocalAssertion::receive(
                channel.clone(),
                payload_var.clone(),
                *sort,
                Formula::True,
                erase_local(continuation),
            )
        }
        LocalAssertion::Select { channel, branch_id, arms } => LocalAssertion::Select {
            channel: channel.clone(),
            branch_id: branch_id.clone(),
            arms: erase_arms(arms),
        },
        LocalAssertion::Branch { channel, branch_id, arms } => LocalAssertion::Branch {
            channel: channel.clone(),
            branch_id: branch_id.clone(),
            arms: erase_arms(arms),
        },
        LocalAssertion::Rec { var, params, body, .. } => LocalAssertion::Rec {
            var: var.clone(),
            params: params.clone(),
            invariant: Formula::True,
            body: Box::new(erase_local(body)),
        },
        LocalAssertion::Call { .. } => t.clone(),
    }
}

fn erase_arms(arms: &[LocalBranchArm]) -> Vec<LocalBranchArm> {
    arms.iter()
        .map(|arm| LocalBranchArm {
            label: arm.label.clone(),
            assertion: Formula::True,
            continuation: erase_local(&arm.continuation),
        })
        .collect()
}

/// A literal of each sort, for synthesising payload expressions.
pub fn literal_of(sort: Sort) -> mpassert::syntax::Expr {
    use mpassert::syntax::Expr;
    match sort {
        Sort::Int => Expr::Int(1),
        Sort::Bool => Expr::Bool(true),
        Sort::Str => Expr::Str("s".into()),
        Sort::Date => Expr::Str("2026-01-01".into()),
    }
}
