use crate::diagnostics::NodePath;
use crate::presburger::{LogicError, Solver};
use crate::syntax::{Expr, LocalAssertion};

/// Outcome of a refinement check.
#[derive(Debug, Clone)]
pub enum Refinement {
    Ok,
    Mismatch(Box<Mismatch>),
}

impl Refinement {
    pub fn is_ok(&self) -> bool {
        matches!(self, Refinement::Ok)
    }
}

/// Where and how an inferred type failed to refine its projection.
#[derive(Debug, Clone)]
pub struct Mismatch {
    pub path: NodePath,
    pub inferred: LocalAssertion,
    pub projected: LocalAssertion,
    pub reason: String,
}

/// Binder alignment: both sides' payload variables, recursion variables
/// and formals are renamed to shared positional names before any formula
/// comparison, so differing or clashing names cannot capture.
#[derive(Default)]
struct Alignment {
    inferred: Vec<(String, Expr)>,
    projected: Vec<(String, Expr)>,
    fresh: u32,
}

impl Alignment {
    fn bind(&mut self, inferred: &str, projected: &str) {
        self.fresh += 1;
        let canonical = format!("_al{}", self.fresh);
        self.inferred.push((inferred.to_string(), Expr::var(canonical.clone())));
        self.projected.push((projected.to_string(), Expr::var(canonical)));
    }

    fn mark(&self) -> (usize, usize, u32) {
        (self.inferred.len(), self.projected.len(), self.fresh)
    }

    fn restore(&mut self, (i, p, fresh): (usize, usize, u32)) {
        self.inferred.truncate(i);
        self.projected.truncate(p);
        self.fresh = fresh;
    }

    /// Whether two recursion variables denote the same aligned binder.
    fn rec_var_matches(&self, inferred: &str, projected: &str) -> bool {
        let canon = |renaming: &[(String, Expr)], name: &str| {
            renaming.iter().rev().find_map(|(from, to)| match to {
                Expr::Var(canonical) if from == name => Some(canonical.clone()),
                _ => None,
            })
        };
        match (canon(&self.inferred, inferred), canon(&self.projected, projected)) {
            (Some(a), Some(b)) => a == b,
            (None, None) => inferred == projected,
            _ => false,
        }
    }
}

/// Checks that an inferred local type refines a projection: the
/// implementation may select fewer labels, strengthen the predicates of
/// sends and selections, and weaken the predicates of receptions and
/// branchings. Binders are aligned by position; a trivial local recursion
/// invariant is accepted outright.
pub fn refines(
    inferred: &LocalAssertion,
    projected: &LocalAssertion,
    solver: &Solver,
) -> Result<Refinement, LogicError> {
    let mut alignment = Alignment::default();
    walk(inferred, projected, solver, &mut alignment, NodePath::root())
}

fn mismatch(
    path: &NodePath,
    inferred: &LocalAssertion,
    projected: &LocalAssertion,
    reason: impl Into<String>,
) -> Result<Refinement, LogicError> {
    Ok(Refinement::Mismatch(Box::new(Mismatch {
        path: path.clone(),
        inferred: inferred.clone(),
        projected: projected.clone(),
        reason: reason.into(),
    })))
}

fn walk(
    inferred: &LocalAssertion,
    projected: &LocalAssertion,
    solver: &Solver,
    alignment: &mut Alignment,
    path: NodePath,
) -> Result<Refinement, LogicError> {
    match (inferred, projected) {
        (LocalAssertion::End, LocalAssertion::End) => Ok(Refinement::Ok),
        (
            LocalAssertion::Send {
                channel: ci,
                payload_var: vi,
                sort: si,
                assertion: fi,
                continuation: ki,
            },
            LocalAssertion::Send {
                channel: cp,
                payload_var: vp,
                sort: sp,
                assertion: fp,
                continuation: kp,
            },
        ) => {
            if ci != cp || si != sp {
                return mismatch(&path, inferred, projected, "send prefixes differ");
            }
            let mark = alignment.mark();
            alignment.bind(vi, vp);
            // Senders may strengthen their obligations.
            let holds = solver.implies(
                &fi.substitute(&alignment.inferred),
                &fp.substitute(&alignment.projected),
            )?;
            if !holds {
                alignment.restore(mark);
                return mismatch(
                    &path,
                    inferred,
                    projected,
                    "send assertion does not strengthen the projection",
                );
            }
            let out = walk(ki, kp, solver, alignment, path.child(0));
            alignment.restore(mark);
            out
        }
        (
            LocalAssertion::Receive {
                channel: ci,
                payload_var: vi,
                sort: si,
                assertion: fi,
                continuation: ki,
            },
            LocalAssertion::Receive {
                channel: cp,
                payload_var: vp,
                sort: sp,
                assertion: fp,
                continuation: kp,
            },
        ) => {
            if ci != cp || si != sp {
                return mismatch(&path, inferred, projected, "receive prefixes differ");
            }
            let mark = alignment.mark();
            alignment.bind(vi, vp);
            // Receivers may weaken their assumptions.
            let holds = solver.implies(
                &fp.substitute(&alignment.projected),
                &fi.substitute(&alignment.inferred),
            )?;
            if !holds {
                alignment.restore(mark);
                return mismatch(
                    &path,
                    inferred,
                    projected,
                    "receive assertion does not weaken the projection",
                );
            }
            let out = walk(ki, kp, solver, alignment, path.child(0));
            alignment.restore(mark);
            out
        }
        (
            LocalAssertion::Select { channel: ci, branch_id: ii, arms: ai },
            LocalAssertion::Select { channel: cp, branch_id: ip, arms: ap },
        ) => {
            if ci != cp || ii != ip {
                return mismatch(&path, inferred, projected, "selection prefixes differ");
            }
            // A process may select fewer labels, never others.
            for (idx, arm) in ai.iter().enumerate() {
                let Some(counterpart) = ap.iter().find(|a| a.label == arm.label) else {
                    return mismatch(
                        &path,
                        inferred,
                        projected,
                        format!("label `{}` is not offered by the projection", arm.label),
                    );
                };
                let holds = solver.implies(
                    &arm.assertion.substitute(&alignment.inferred),
                    &counterpart.assertion.substitute(&alignment.projected),
                )?;
                if !holds {
                    return mismatch(
                        &path,
                        inferred,
                        projected,
                        format!(
                            "selection assertion for `{}` does not strengthen the projection",
                            arm.label
                        ),
                    );
                }
                let out = walk(
                    &arm.continuation,
                    &counterpart.continuation,
                    solver,
                    alignment,
                    path.child(idx as u32),
                )?;
                if !out.is_ok() {
                    return Ok(out);
                }
            }
            Ok(Refinement::Ok)
        }
        (
            LocalAssertion::Branch { channel: ci, branch_id: ii, arms: ai },
            LocalAssertion::Branch { channel: cp, branch_id: ip, arms: ap },
        ) => {
            if ci != cp || ii != ip {
                return mismatch(&path, inferred, projected, "branching prefixes differ");
            }
            // Every projected label must be offered, and no others.
            if ai.len() != ap.len() || ap.iter().any(|a| !ai.iter().any(|b| b.label == a.label)) {
                return mismatch(
                    &path,
                    inferred,
                    projected,
                    "branch labels differ from the projection",
                );
            }
            for (idx, counterpart) in ap.iter().enumerate() {
                let arm = ai.iter().find(|a| a.label == counterpart.label).unwrap();
                let holds = solver.implies(
                    &counterpart.assertion.substitute(&alignment.projected),
                    &arm.assertion.substitute(&alignment.inferred),
                )?;
                if !holds {
                    return mismatch(
                        &path,
                        inferred,
                        projected,
                        format!(
                            "branch assertion for `{}` does not weaken the projection",
                            arm.label
                        ),
                    );
                }
                let out = walk(
                    &arm.continuation,
                    &counterpart.continuation,
                    solver,
                    alignment,
                    path.child(idx as u32),
                )?;
                if !out.is_ok() {
                    return Ok(out);
                }
            }
            Ok(Refinement::Ok)
        }
        (
            LocalAssertion::Rec { var: vi, params: pi, invariant: fi, body: bi },
            LocalAssertion::Rec { var: vp, params: pp, invariant: fp, body: bp },
        ) => {
            if pi.len() != pp.len() || pi.iter().zip(pp).any(|(a, b)| a.sort != b.sort) {
                return mismatch(&path, inferred, projected, "recursion parameters differ");
            }
            // Initialisers evaluate in the enclosing scope.
            let inits_match = pi.iter().zip(pp).all(|(a, b)| {
                a.init.substitute(&alignment.inferred) == b.init.substitute(&alignment.projected)
            });
            if !inits_match {
                return mismatch(&path, inferred, projected, "recursion initialisers differ");
            }
            let mark = alignment.mark();
            for (a, b) in pi.iter().zip(pp) {
                alignment.bind(&a.formal, &b.formal);
            }
            alignment.bind(vi, vp);
            // A trivial local invariant is always acceptable: the
            // projection is well-asserted, so its invariant is guaranteed
            // by the global checks. A non-trivial one must imply it.
            if !fi.is_true() {
                let holds = solver.implies(
                    &fi.substitute(&alignment.inferred),
                    &fp.substitute(&alignment.projected),
                )?;
                if !holds {
                    alignment.restore(mark);
                    return mismatch(
                        &path,
                        inferred,
                        projected,
                        "recursion invariant does not imply the projection's",
                    );
                }
            }
            let out = walk(bi, bp, solver, alignment, path.child(0));
            alignment.restore(mark);
            out
        }
        (
            LocalAssertion::Call { var: vi, actuals: ai },
            LocalAssertion::Call { var: vp, actuals: ap },
        ) => {
            if !alignment.rec_var_matches(vi, vp) {
                return mismatch(&path, inferred, projected, "recursion calls differ");
            }
            let args_match = ai.len() == ap.len()
                && ai.iter().zip(ap).all(|(a, b)| {
                    a.substitute(&alignment.inferred) == b.substitute(&alignment.projected)
                });
            if !args_match {
                return mismatch(&path, inferred, projected, "recursion call arguments differ");
            }
            Ok(Refinement::Ok)
        }
        _ => mismatch(&path, inferred, projected, "type shapes differ"),
    }
}
