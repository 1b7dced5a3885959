//! Generators for assertion-free globals and local types, plus a process
//! synthesiser that implements a given local type. Used by the
//! erasure-commutation and round-trip suites.

use mpassert::syntax::{
    Channel, Expr, Formula, GlobalAssertion, GlobalBranchArm, LocalAssertion, LocalBranchArm,
    Participant, Process, ProcessBranchArm, RecParam, Sort,
};

use super::plain::literal_of;
use super::TestRng;

const PARTICIPANTS: &[&str] = &["A", "B", "C"];
const CHANNELS: &[&str] = &["k", "m"];

struct Names {
    vars: u32,
    labels: u32,
    ids: u32,
    recs: u32,
}

impl Names {
    fn new() -> Self {
        Names { vars: 0, labels: 0, ids: 0, recs: 0 }
    }

    fn var(&mut self) -> String {
        self.vars += 1;
        format!("v{}", self.vars)
    }

    fn label(&mut self) -> String {
        self.labels += 1;
        format!("lab{}", self.labels)
    }

    fn id(&mut self) -> String {
        self.ids += 1;
        format!("grp{}", self.ids)
    }

    fn rec(&mut self) -> String {
        self.recs += 1;
        format!("t{}", self.recs)
    }
}

/// A random assertion-free global of bounded depth over three participants
/// and two channels.
pub fn gen_plain_global(rng: &mut TestRng, depth: u32) -> GlobalAssertion {
    let mut names = Names::new();
    gen_global_node(rng, depth, &mut names, &mut Vec::new())
}

fn pick_pair(rng: &mut TestRng) -> (Participant, Participant) {
    loop {
        let a = *rng.pick(PARTICIPANTS);
        let b = *rng.pick(PARTICIPANTS);
        if a != b {
            return (Participant::new(a), Participant::new(b));
        }
    }
}

fn gen_global_node(
    rng: &mut TestRng,
    depth: u32,
    names: &mut Names,
    recs: &mut Vec<(String, usize)>,
) -> GlobalAssertion {
    if depth == 0 {
        if let Some((var, arity)) = recs.last() {
            if rng.chance(50) {
                return GlobalAssertion::Call {
                    var: var.clone(),
                    actuals: (0..*arity).map(|_| Expr::Int(rng.range(0, 3))).collect(),
                };
            }
        }
        return GlobalAssertion::End;
    }
    match rng.next_u64() % 100 {
        0..=54 => {
            let (sender, receiver) = pick_pair(rng);
            GlobalAssertion::Interaction {
                sender,
                receiver,
                channel: Channel::new(*rng.pick(CHANNELS)),
                payload_var: names.var(),
                sort: Sort::Int,
                assertion: Formula::True,
                continuation: Box::new(gen_global_node(rng, depth - 1, names, recs)),
            }
        }
        55..=74 => {
            let (sender, receiver) = pick_pair(rng);
            let arm_count = rng.range(2, 3);
            GlobalAssertion::Branch {
                sender,
                receiver,
                channel: Channel::new(*rng.pick(CHANNELS)),
                branch_id: names.id(),
                arms: (0..arm_count)
                    .map(|_| GlobalBranchArm {
                        label: names.label(),
                        assertion: Formula::True,
                        continuation: gen_global_node(rng, depth - 1, names, recs),
                    })
                    .collect(),
            }
        }
        75..=84 => {
            let var = names.rec();
            let arity = rng.range(0, 1) as usize;
            let params: Vec<RecParam> = (0..arity)
                .map(|_| RecParam::new(names.var(), Sort::Int, Expr::Int(rng.range(0, 3))))
                .collect();
            recs.push((var.clone(), arity));
            let body = gen_global_node(rng, depth - 1, names, recs);
            recs.pop();
            GlobalAssertion::Rec { var, params, invariant: Formula::True, body: Box::new(body) }
        }
        _ => GlobalAssertion::End,
    }
}

/// A random local type with trivial assertions, suitable for synthesising a
/// process: recursion parameters are integers with literal initialisers and
/// calls re-pass the formals.
pub fn gen_local_type(rng: &mut TestRng, depth: u32) -> LocalAssertion {
    let mut names = Names::new();
    gen_local_node(rng, depth, &mut names, &mut Vec::new())
}

fn gen_local_node(
    rng: &mut TestRng,
    depth: u32,
    names: &mut Names,
    recs: &mut Vec<(String, Vec<String>)>,
) -> LocalAssertion {
    if depth == 0 {
        if let Some((var, formals)) = recs.last() {
            if rng.chance(60) {
                return LocalAssertion::Call {
                    var: var.clone(),
                    actuals: formals.iter().map(|f| Expr::var(f.clone())).collect(),
                };
            }
        }
        return LocalAssertion::End;
    }
    let sorts = [Sort::Int, Sort::Bool, Sort::Str, Sort::Date];
    match rng.next_u64() % 100 {
        0..=29 => LocalAssertion::send(
            Channel::new(*rng.pick(CHANNELS)),
            names.var(),
            *rng.pick(&sorts),
            Formula::True,
            gen_local_node(rng, depth - 1, names, recs),
        ),
        30..=54 => LocalAssertion::receive(
            Channel::new(*rng.pick(CHANNELS)),
            names.var(),
            *rng.pick(&sorts),
            Formula::True,
            gen_local_node(rng, depth - 1, names, recs),
        ),
        55..=69 => {
            let arm_count = rng.range(1, 3);
            LocalAssertion::Select {
                channel: Channel::new(*rng.pick(CHANNELS)),
                branch_id: names.id(),
                arms: (0..arm_count)
                    .map(|_| LocalBranchArm {
                        label: names.label(),
                        assertion: Formula::True,
                        continuation: gen_local_node(rng, depth - 1, names, recs),
                    })
                    .collect(),
            }
        }
        70..=84 => {
            let arm_count = rng.range(1, 3);
            LocalAssertion::Branch {
                channel: Channel::new(*rng.pick(CHANNELS)),
                branch_id: names.id(),
                arms: (0..arm_count)
                    .map(|_| LocalBranchArm {
                        label: names.label(),
                        assertion: Formula::True,
                        continuation: gen_local_node(rng, depth - 1, names, recs),
                    })
                    .collect(),
            }
        }
        85..=94 => {
            let var = names.rec();
            let arity = rng.range(1, 2) as usize;
            let params: Vec<RecParam> = (0..arity)
                .map(|_| RecParam::new(names.var(), Sort::Int, Expr::Int(rng.range(0, 5))))
                .collect();
            recs.push((var.clone(), params.iter().map(|p| p.formal.clone()).collect()));
            let body = gen_local_node(rng, depth - 1, names, recs);
            recs.pop();
            LocalAssertion::Rec { var, params, invariant: Formula::True, body: Box::new(body) }
        }
        _ => LocalAssertion::End,
    }
}

/// Synthesises a participant process whose inferred session type is exactly
/// the given local type. Multi-label selections become chains of
/// conditionals; recursions abstract all session channels.
pub fn synth_process(ty: &LocalAssertion, role: &str, all_roles: &[&str]) -> Process {
    let channels: Vec<Channel> = CHANNELS.iter().map(|c| Channel::new(*c)).collect();
    let env: Vec<(String, String)> =
        CHANNELS.iter().map(|c| (c.to_string(), c.to_string())).collect();
    let body = synth(ty, &env, 0);
    if role == all_roles[0] {
        Process::Init {
            service: "gen".into(),
            participants: all_roles.iter().map(|r| Participant::new(*r)).collect(),
            channels,
            body: Box::new(body),
        }
    } else {
        Process::Join {
            service: "gen".into(),
            participant: Participant::new(role),
            channels,
            body: Box::new(body),
        }
    }
}

fn current_name(env: &[(String, String)], session: &str) -> String {
    env.iter()
        .find(|(s, _)| s == session)
        .map(|(_, cur)| cur.clone())
        .expect("session channel present")
}

fn synth(ty: &LocalAssertion, env: &[(String, String)], rec_depth: u32) -> Process {
    match ty {
        LocalAssertion::End => Process::Inact,
        LocalAssertion::Send { channel, payload_var, sort, continuation, .. } => Process::Send {
            channel: Channel::new(current_name(env, channel.name())),
            expr: literal_of(*sort),
            payload_var: payload_var.clone(),
            sort: *sort,
            assertion: Formula::True,
            body: Box::new(synth(continuation, env, rec_depth)),
        },
        LocalAssertion::Receive { channel, payload_var, sort, continuation, .. } => {
            Process::Receive {
                channel: Channel::new(current_name(env, channel.name())),
                payload_var: payload_var.clone(),
                sort: *sort,
                assertion: Formula::True,
                body: Box::new(synth(continuation, env, rec_depth)),
            }
        }
        LocalAssertion::Select { channel, branch_id, arms } => {
            // One arm selects directly; more become an if-chain, which the
            // inference merges back into one selection menu.
            let mut out = None;
            for arm in arms.iter().rev() {
                let select = Process::Select {
                    channel: Channel::new(current_name(env, channel.name())),
                    assertion: Formula::True,
                    branch_id: branch_id.clone(),
                    label: arm.label.clone(),
                    body: Box::new(synth(&arm.continuation, env, rec_depth)),
                };
                out = Some(match out {
                    None => select,
                    Some(rest) => Process::IfThenElse {
                        cond: Expr::Bool(true),
                        then_body: Box::new(select),
                        else_body: Box::new(rest),
                    },
                });
            }
            out.expect("selections have at least one arm")
        }
        LocalAssertion::Branch { channel, branch_id, arms } => Process::Branch {
            channel: Channel::new(current_name(env, channel.name())),
            branch_id: branch_id.clone(),
            arms: arms
                .iter()
                .map(|arm| ProcessBranchArm {
                    label: arm.label.clone(),
                    assertion: Formula::True,
                    body: synth(&arm.continuation, env, rec_depth),
                })
                .collect(),
        },
        LocalAssertion::Rec { var, params, body, .. } => {
            let channel_args: Vec<Channel> =
                env.iter().map(|(_, cur)| Channel::new(cur.clone())).collect();
            let channel_params: Vec<Channel> = env
                .iter()
                .map(|(session, _)| Channel::new(format!("{session}f{}", rec_depth + 1)))
                .collect();
            let inner_env: Vec<(String, String)> = env
                .iter()
                .zip(&channel_params)
                .map(|((session, _), param)| (session.clone(), param.name().to_string()))
                .collect();
            Process::Rec {
                var: var.clone(),
                value_args: params.iter().map(|p| p.init.clone()).collect(),
                channel_args,
                value_params: params.iter().map(|p| (p.formal.clone(), p.sort)).collect(),
                channel_params,
                body: Box::new(synth(body, &inner_env, rec_depth + 1)),
            }
        }
        LocalAssertion::Call { var, actuals } => Process::Call {
            var: var.clone(),
            value_actuals: actuals.clone(),
            channel_actuals: env.iter().map(|(_, cur)| Channel::new(cur.clone())).collect(),
        },
    }
}
