use std::collections::{BTreeMap, BTreeSet};

use crate::diagnostics::{CheckReport, NodePath, Violation, ViolationKind};
use crate::presburger::{LogicError, Solver};
use crate::syntax::{Expr, Formula, GlobalAssertion, Participant, Sort};

/// Which variables each participant knows at a point of the protocol:
/// payloads it has sent or received so far, plus the formals of recursions
/// whose body it appears in.
pub type KnowledgeMap = BTreeMap<Participant, BTreeSet<String>>;

struct RecSig {
    formals: Vec<(String, Sort)>,
    invariant: Formula,
}

struct Checker<'a> {
    solver: &'a Solver,
    violations: Vec<Violation>,
}

/// Well-assertedness of a global description:
///
/// * history sensitivity — assertions only mention variables their sender
///   knows (plus the payload being fixed);
/// * temporal satisfiability — under the assertions accumulated so far, a
///   sender can always pick a payload satisfying its assertion, and some
///   branch label is always enabled;
/// * recursion — the invariant holds for the initialisers, may be assumed
///   inside the body, and is re-established by every call.
pub fn check_well_asserted(
    g: &GlobalAssertion,
    solver: &Solver,
) -> Result<CheckReport, LogicError> {
    let mut knowledge = KnowledgeMap::new();
    for p in g.participants() {
        knowledge.insert(p, BTreeSet::new());
    }
    let mut checker = Checker { solver, violations: Vec::new() };
    checker.walk(
        g,
        NodePath::root(),
        &mut Vec::new(),
        &mut knowledge,
        &mut BTreeMap::new(),
        &mut Vec::new(),
    )?;
    Ok(CheckReport::from_violations(checker.violations))
}

impl<'a> Checker<'a> {
    fn walk(
        &mut self,
        g: &GlobalAssertion,
        path: NodePath,
        context: &mut Vec<Formula>,
        knowledge: &mut KnowledgeMap,
        sorts: &mut BTreeMap<String, Sort>,
        recs: &mut Vec<(String, RecSig)>,
    ) -> Result<(), LogicError> {
        match g {
            GlobalAssertion::End => Ok(()),
            GlobalAssertion::Interaction {
                sender,
                receiver,
                payload_var,
                sort,
                assertion,
                continuation,
                ..
            } => {
                self.check_history(sender, assertion, Some(payload_var), knowledge, &path);
                self.check_payload_satisfiable(
                    context,
                    payload_var,
                    *sort,
                    assertion,
                    &path,
                )?;
                for p in [sender, receiver] {
                    knowledge.entry(p.clone()).or_default().insert(payload_var.clone());
                }
                sorts.insert(payload_var.clone(), *sort);
                context.push(assertion.clone());
                let out = self.walk(continuation, path.child(0), context, knowledge, sorts, recs);
                context.pop();
                out
            }
            GlobalAssertion::Branch { sender, arms, .. } => {
                for arm in arms {
                    self.check_history(sender, &arm.assertion, None, knowledge, &path);
                }
                // Some label must always be selectable.
                let disjunction =
                    Formula::disj(arms.iter().map(|a| a.assertion.clone()).collect::<Vec<_>>());
                if !self.solver.implies(&Formula::conj(context.clone()), &disjunction)? {
                    self.violations.push(Violation::new(
                        ViolationKind::TemporalSatisfiability,
                        path.to_string(),
                        format!(
                            "no branch label is enabled: {} => {}",
                            Formula::conj(context.clone()).spaced(),
                            disjunction.spaced()
                        ),
                    ));
                }
                for (i, arm) in arms.iter().enumerate() {
                    context.push(arm.assertion.clone());
                    let mut arm_knowledge = knowledge.clone();
                    let mut arm_sorts = sorts.clone();
                    self.walk(
                        &arm.continuation,
                        path.child(i as u32),
                        context,
                        &mut arm_knowledge,
                        &mut arm_sorts,
                        recs,
                    )?;
                    context.pop();
                }
                Ok(())
            }
            GlobalAssertion::Rec { var, params, invariant, body } => {
                // The invariant must hold for the initialisers.
                let bindings: Vec<(String, Expr)> =
                    params.iter().map(|p| (p.formal.clone(), p.init.clone())).collect();
                let initial = invariant.substitute(&bindings);
                if !self.solver.implies(&Formula::conj(context.clone()), &initial)? {
                    self.violations.push(Violation::new(
                        ViolationKind::InvariantUnsatisfied,
                        path.to_string(),
                        format!(
                            "recursion invariant does not hold initially: {} => {}",
                            Formula::conj(context.clone()).spaced(),
                            initial.spaced()
                        ),
                    ));
                }
                // Formals are known to every participant of the body, and
                // the invariant may be assumed inside.
                for p in body.participants() {
                    let entry = knowledge.entry(p).or_default();
                    for param in params {
                        entry.insert(param.formal.clone());
                    }
                }
                for param in params {
                    sorts.insert(param.formal.clone(), param.sort);
                }
                recs.push((
                    var.clone(),
                    RecSig {
                        formals: params.iter().map(|p| (p.formal.clone(), p.sort)).collect(),
                        invariant: invariant.clone(),
                    },
                ));
                context.push(invariant.clone());
                let out = self.walk(body, path.child(0), context, knowledge, sorts, recs);
                context.pop();
                recs.pop();
                out
            }
            GlobalAssertion::Call { var, actuals } => {
                let Some((_, sig)) = recs.iter().rev().find(|(name, _)| name == var) else {
                    self.violations.push(Violation::new(
                        ViolationKind::Arity,
                        path.to_string(),
                        format!("call to unknown recursion `{var}`"),
                    ));
                    return Ok(());
                };
                let bindings: Vec<(String, Expr)> = sig
                    .formals
                    .iter()
                    .map(|(f, _)| f.clone())
                    .zip(actuals.iter().cloned())
                    .collect();
                let re_established = sig.invariant.substitute(&bindings);
                if !self.solver.implies(&Formula::conj(context.clone()), &re_established)? {
                    self.violations.push(Violation::new(
                        ViolationKind::InvariantUnsatisfied,
                        path.to_string(),
                        format!(
                            "recursion invariant is not re-established: {} => {}",
                            Formula::conj(context.clone()).spaced(),
                            re_established.spaced()
                        ),
                    ));
                }
                Ok(())
            }
        }
    }

    /// History sensitivity: the assertion's free variables must be known to
    /// the sender (the payload being fixed counts as known).
    fn check_history(
        &mut self,
        sender: &Participant,
        assertion: &Formula,
        payload: Option<&str>,
        knowledge: &KnowledgeMap,
        path: &NodePath,
    ) {
        let known = knowledge.get(sender).cloned().unwrap_or_default();
        for var in assertion.free_variables() {
            if Some(var.as_str()) == payload || known.contains(&var) {
                continue;
            }
            self.violations.push(Violation::new(
                ViolationKind::HistorySensitivity,
                path.to_string(),
                format!("`{sender}` asserts on `{var}` without knowing it"),
            ));
        }
    }

    /// Temporal satisfiability of one interaction: under the accumulated
    /// context, some payload value must satisfy the assertion.
    fn check_payload_satisfiable(
        &mut self,
        context: &[Formula],
        payload_var: &str,
        sort: Sort,
        assertion: &Formula,
        path: &NodePath,
    ) -> Result<(), LogicError> {
        let goal = if sort.is_logical() {
            Formula::exists(payload_var, sort, assertion.clone())
        } else {
            // Opaque payloads cannot be constrained, so the assertion does
            // not mention the variable and needs no quantifier.
            assertion.clone()
        };
        let hypothesis = Formula::conj(context.to_vec());
        if !self.solver.implies(&hypothesis, &goal)? {
            self.violations.push(Violation::new(
                ViolationKind::TemporalSatisfiability,
                path.to_string(),
                format!(
                    "no payload can satisfy the assertion: {} => {}",
                    hypothesis.spaced(),
                    goal.spaced()
                ),
            ));
        }
        Ok(())
    }
}
