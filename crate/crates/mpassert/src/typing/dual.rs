use crate::syntax::{LocalAssertion, LocalBranchArm};

/// The binary-session dual: sends become receives and selections become
/// branchings (and vice versa), recursively; assertions, payloads and
/// recursion structure are preserved.
pub fn dual(t: &LocalAssertion) -> LocalAssertion {
    match t {
        LocalAssertion::Send { channel, payload_var, sort, assertion, continuation } => {
            LocalAssertion::Receive {
                channel: channel.clone(),
                payload_var: payload_var.clone(),
                sort: *sort,
                assertion: assertion.clone(),
                continuation: Box::new(dual(continuation)),
            }
        }
        LocalAssertion::Receive { channel, payload_var, sort, assertion, continuation } => {
            LocalAssertion::Send {
                channel: channel.clone(),
                payload_var: payload_var.clone(),
                sort: *sort,
                assertion: assertion.clone(),
                continuation: Box::new(dual(continuation)),
            }
        }
        LocalAssertion::Select { channel, branch_id, arms } => LocalAssertion::Branch {
            channel: channel.clone(),
            branch_id: branch_id.clone(),
            arms: dual_arms(arms),
        },
        LocalAssertion::Branch { channel, branch_id, arms } => LocalAssertion::Select {
            channel: channel.clone(),
            branch_id: branch_id.clone(),
            arms: dual_arms(arms),
        },
        LocalAssertion::Rec { var, params, invariant, body } => LocalAssertion::Rec {
            var: var.clone(),
            params: params.clone(),
            invariant: invariant.clone(),
            body: Box::new(dual(body)),
        },
        LocalAssertion::Call { .. } | LocalAssertion::End => t.clone(),
    }
}

fn dual_arms(arms: &[LocalBranchArm]) -> Vec<LocalBranchArm> {
    arms.iter()
        .map(|arm| LocalBranchArm {
            label: arm.label.clone(),
            assertion: arm.assertion.clone(),
            continuation: dual(&arm.continuation),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_local;

    #[test]
    fn end_is_self_dual() {
        assert_eq!(dual(&LocalAssertion::End), LocalAssertion::End);
    }

    #[test]
    fn send_becomes_receive() {
        let t = parse_local("s!<x:int> [x>0];end").unwrap();
        assert_eq!(dual(&t).to_string(), "s?<x:int> [x>0];end");
    }

    #[test]
    fn dual_is_an_involution_on_the_player_type() {
        let t = parse_local(
            "f!<x:int> [true];mu t(x,0)(r:int,cpt:int) [true]. \
             h&ans{ [-] less: l!<y:int> [y=r+1];t(y,cpt+1), \
             [-] greater: l!<y:int> [y=r-1];t(y,cpt+1), \
             [-] equal: h&res{ [-] win: end, [-] lose: end } }",
        )
        .unwrap();
        assert_eq!(dual(&dual(&t)), t);
        assert_ne!(dual(&t), t);
    }
}
