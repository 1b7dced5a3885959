use crate::syntax::{GlobalAssertion, GlobalBranchArm, RecParam};

/// One-time unfolding per the equi-recursive view: every recursion body's
/// calls are replaced by one copy of the recursion itself (initialised with
/// the call's actual parameters); the copies' own calls are left alone.
/// Non-recursive descriptions come back unchanged. Linearity is checked on
/// the unfolded tree, so in-loop prefixes appear twice along any path that
/// crosses the recursion.
pub fn unfold_once(g: &GlobalAssertion) -> GlobalAssertion {
    match g {
        GlobalAssertion::Interaction {
            sender,
            receiver,
            channel,
            payload_var,
            sort,
            assertion,
            continuation,
        } => GlobalAssertion::Interaction {
            sender: sender.clone(),
            receiver: receiver.clone(),
            channel: channel.clone(),
            payload_var: payload_var.clone(),
            sort: *sort,
            assertion: assertion.clone(),
            continuation: Box::new(unfold_once(continuation)),
        },
        GlobalAssertion::Branch { sender, receiver, channel, branch_id, arms } => {
            GlobalAssertion::Branch {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: channel.clone(),
                branch_id: branch_id.clone(),
                arms: arms
                    .iter()
                    .map(|arm| GlobalBranchArm {
                        label: arm.label.clone(),
                        assertion: arm.assertion.clone(),
                        continuation: unfold_once(&arm.continuation),
                    })
                    .collect(),
            }
        }
        GlobalAssertion::Rec { var, params, invariant, body } => {
            let unfolded_body = unfold_once(body);
            let replaced = replace_calls(&unfolded_body, var, params, invariant, body);
            GlobalAssertion::Rec {
                var: var.clone(),
                params: params.clone(),
                invariant: invariant.clone(),
                body: Box::new(replaced),
            }
        }
        GlobalAssertion::Call { .. } | GlobalAssertion::End => g.clone(),
    }
}

/// Replaces `Call(var, actuals)` with a copy of the original recursion whose
/// parameter initialisers are the call's actuals. An inner recursion with
/// the same name shadows the outer one.
fn replace_calls(
    g: &GlobalAssertion,
    var: &str,
    params: &[RecParam],
    invariant: &crate::syntax::Formula,
    original_body: &GlobalAssertion,
) -> GlobalAssertion {
    match g {
        GlobalAssertion::Call { var: v, actuals } if v == var => GlobalAssertion::Rec {
            var: var.to_string(),
            params: params
                .iter()
                .zip(actuals)
                .map(|(p, actual)| RecParam {
                    formal: p.formal.clone(),
                    sort: p.sort,
                    init: actual.clone(),
                })
                .collect(),
            invariant: invariant.clone(),
            body: Box::new(original_body.clone()),
        },
        GlobalAssertion::Call { .. } | GlobalAssertion::End => g.clone(),
        GlobalAssertion::Interaction {
            sender,
            receiver,
            channel,
            payload_var,
            sort,
            assertion,
            continuation,
        } => GlobalAssertion::Interaction {
            sender: sender.clone(),
            receiver: receiver.clone(),
            channel: channel.clone(),
            payload_var: payload_var.clone(),
            sort: *sort,
            assertion: assertion.clone(),
            continuation: Box::new(replace_calls(continuation, var, params, invariant, original_body)),
        },
        GlobalAssertion::Branch { sender, receiver, channel, branch_id, arms } => {
            GlobalAssertion::Branch {
                sender: sender.clone(),
                receiver: receiver.clone(),
                channel: channel.clone(),
                branch_id: branch_id.clone(),
                arms: arms
                    .iter()
                    .map(|arm| GlobalBranchArm {
                        label: arm.label.clone(),
                        assertion: arm.assertion.clone(),
                        continuation: replace_calls(
                            &arm.continuation,
                            var,
                            params,
                            invariant,
                            original_body,
                        ),
                    })
                    .collect(),
            }
        }
        GlobalAssertion::Rec { var: v, params: p, invariant: i, body } if v != var => {
            GlobalAssertion::Rec {
                var: v.clone(),
                params: p.clone(),
                invariant: i.clone(),
                body: Box::new(replace_calls(body, var, params, invariant, original_body)),
            }
        }
        // Shadowed: an inner recursion rebinds the variable.
        GlobalAssertion::Rec { .. } => g.clone(),
    }
}
