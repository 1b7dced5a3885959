//! Endpoint projection: a checked global assertion becomes one local
//! assertion per participant, with assertions split into rely/guarantee
//! form. Senders keep their own assertions as obligations; receivers get
//! the accumulated rely — the conjunction of the current assertion with the
//! assertions met along the path (most recent first, trivial ones dropped),
//! existentially quantifying everything the participant does not know, most
//! recently introduced variables outermost.

use thiserror::Error;

use crate::diagnostics::NodePath;
use crate::syntax::{
    Formula, GlobalAssertion, LocalAssertion, LocalBranchArm, Participant, Sort,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProjectionError {
    #[error("branches at {path} do not merge for uninvolved participant `{participant}`")]
    UnmergeableBranches { participant: Participant, path: String },
}

/// Projects onto every participant of the description, sorted by name.
pub fn project_all(
    g: &GlobalAssertion,
) -> Result<Vec<(Participant, LocalAssertion)>, ProjectionError> {
    g.participants()
        .into_iter()
        .map(|p| project(g, &p).map(|t| (p, t)))
        .collect()
}

/// Projects the description onto one participant.
pub fn project(g: &GlobalAssertion, p: &Participant) -> Result<LocalAssertion, ProjectionError> {
    let mut state = State {
        participant: p.clone(),
        path: Vec::new(),
        intro: Vec::new(),
        known: Vec::new(),
        dead_recs: Vec::new(),
    };
    state.project(g, NodePath::root())
}

struct State {
    participant: Participant,
    /// Assertions met along the path, chronologically.
    path: Vec<Formula>,
    /// Variable introduction order with sorts.
    intro: Vec<(String, Sort)>,
    /// Variables the participant knows.
    known: Vec<String>,
    /// Recursions whose body does not involve the participant: their calls
    /// project to `end`.
    dead_recs: Vec<String>,
}

impl State {
    fn project(
        &mut self,
        g: &GlobalAssertion,
        node: NodePath,
    ) -> Result<LocalAssertion, ProjectionError> {
        match g {
            GlobalAssertion::End => Ok(LocalAssertion::End),
            GlobalAssertion::Interaction {
                sender,
                receiver,
                channel,
                payload_var,
                sort,
                assertion,
                continuation,
            } => {
                let me = self.participant.clone();
                let out = if *sender == me {
                    self.know(payload_var);
                    let own = assertion.clone();
                    self.step(payload_var, *sort, assertion);
                    let cont = self.project(continuation, node.child(0))?;
                    LocalAssertion::send(channel.clone(), payload_var.clone(), *sort, own, cont)
                } else if *receiver == me {
                    self.know(payload_var);
                    let rely = self.rely(assertion);
                    self.step(payload_var, *sort, assertion);
                    let cont = self.project(continuation, node.child(0))?;
                    LocalAssertion::receive(channel.clone(), payload_var.clone(), *sort, rely, cont)
                } else {
                    self.step(payload_var, *sort, assertion);
                    self.project(continuation, node.child(0))?
                };
                Ok(out)
            }
            GlobalAssertion::Branch { sender, receiver, channel, branch_id, arms } => {
                let me = self.participant.clone();
                if *sender == me || *receiver == me {
                    let mut out = Vec::new();
                    for (i, arm) in arms.iter().enumerate() {
                        let assertion = if *sender == me {
                            arm.assertion.clone()
                        } else {
                            self.rely(&arm.assertion)
                        };
                        let mark = self.mark();
                        self.path.push(arm.assertion.clone());
                        let continuation = self.project(&arm.continuation, node.child(i as u32))?;
                        self.restore(mark);
                        out.push(LocalBranchArm { label: arm.label.clone(), assertion, continuation });
                    }
                    Ok(if *sender == me {
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
                    // Uninvolved participants must see identical behaviour
                    // in every alternative.
                    let mut merged: Option<LocalAssertion> = None;
                    for (i, arm) in arms.iter().enumerate() {
                        let mark = self.mark();
                        self.path.push(arm.assertion.clone());
                        let projected = self.project(&arm.continuation, node.child(i as u32))?;
                        self.restore(mark);
                        match &merged {
                            None => merged = Some(projected),
                            Some(seen) if *seen == projected => {}
                            Some(_) => {
                                return Err(ProjectionError::UnmergeableBranches {
                                    participant: me,
                                    path: node.to_string(),
                                })
                            }
                        }
                    }
                    Ok(merged.unwrap_or(LocalAssertion::End))
                }
            }
            GlobalAssertion::Rec { var, params, invariant, body } => {
                if body.mentions(&self.participant) {
                    for p in params {
                        self.know(&p.formal);
                        self.intro.push((p.formal.clone(), p.sort));
                    }
                    self.path.push(invariant.clone());
                    let projected = self.project(body, node.child(0))?;
                    self.path.pop();
                    Ok(LocalAssertion::Rec {
                        var: var.clone(),
                        params: params.clone(),
                        invariant: invariant.clone(),
                        body: Box::new(projected),
                    })
                } else {
                    // Not in the loop: project the body once with the calls
                    // treated as end, yielding a non-recursive type.
                    self.dead_recs.push(var.clone());
                    for p in params {
                        self.intro.push((p.formal.clone(), p.sort));
                    }
                    self.path.push(invariant.clone());
                    let projected = self.project(body, node.child(0))?;
                    self.path.pop();
                    self.dead_recs.pop();
                    Ok(projected)
                }
            }
            GlobalAssertion::Call { var, actuals } => {
                if self.dead_recs.iter().any(|v| v == var) {
                    Ok(LocalAssertion::End)
                } else {
                    Ok(LocalAssertion::Call { var: var.clone(), actuals: actuals.clone() })
                }
            }
        }
    }

    fn mark(&self) -> (usize, usize, usize) {
        (self.path.len(), self.intro.len(), self.known.len())
    }

    fn restore(&mut self, (path, intro, known): (usize, usize, usize)) {
        self.path.truncate(path);
        self.intro.truncate(intro);
        self.known.truncate(known);
    }

    fn know(&mut self, var: &str) {
        if !self.known.iter().any(|v| v == var) {
            self.known.push(var.to_string());
        }
    }

    fn step(&mut self, payload_var: &str, sort: Sort, assertion: &Formula) {
        self.intro.push((payload_var.to_string(), sort));
        self.path.push(assertion.clone());
    }

    /// The accumulated rely at a reception: current assertion first, then
    /// the path assertions most recent first; unknown logical variables are
    /// existentially quantified, most recently introduced outermost.
    /// Opaque-sorted unknowns never occur in assertions and contribute no
    /// quantifier.
    fn rely(&self, current: &Formula) -> Formula {
        let mut parts = vec![current.clone()];
        parts.extend(self.path.iter().rev().cloned());
        let conj = Formula::conj(parts);
        let free = conj.free_variables();
        let mut out = conj;
        // Wrap oldest-introduced innermost first, so the most recent ends
        // up outermost.
        for (var, sort) in self.intro.iter() {
            if free.contains(var) && !self.known.iter().any(|k| k == var) && sort.is_logical() {
                out = Formula::exists(var.clone(), *sort, out);
            }
        }
        out
    }
}
