//! Decision procedure for Presburger arithmetic: linear integer arithmetic
//! with quantifiers, plus boolean variables treated as 0/1 integers.
//!
//! The module is the solver — no external engine sits behind it. The public
//! surface is intentionally exactly four operations
//! ([`Solver::eliminate_quantifiers`], [`Solver::is_satisfiable`],
//! [`Solver::is_valid`], [`Solver::implies`]) so that a different engine
//! could replace it later without touching the callers.

mod cooper;
mod linear;
mod simplify;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::syntax::{Expr, Formula, Sort};

use linear::{expand_divisions, qff_to_formula, to_qff, Qff};
use simplify::simplify;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("non-linear atom: {0}")]
    NonLinearAtom(String),
    #[error("variable `{0}` is used both as an integer and as a boolean")]
    IllSorted(String),
    #[error("quantifier elimination exceeded its step budget ({0} steps)")]
    ResourceExhausted(u64),
    #[error("coefficient overflow during quantifier elimination")]
    Overflow,
    #[error("unsupported sort in the logic: {0}")]
    UnsupportedSort(String),
}

/// Tunable limits for the decision procedure.
#[derive(Debug, Clone, Copy)]
pub struct QeConfig {
    /// Abort with [`LogicError::ResourceExhausted`] once this many
    /// elementary steps (atom constructions and substitutions) have been
    /// spent on one query. Elimination is super-exponential in the worst
    /// case; the budget turns a hang into an error.
    pub max_steps: u64,
}

impl Default for QeConfig {
    fn default() -> Self {
        QeConfig { max_steps: 400_000 }
    }
}

pub(crate) struct Budget {
    spent: u64,
    limit: u64,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Budget { spent: 0, limit }
    }

    pub(crate) fn spend(&mut self, steps: u64) -> Result<(), LogicError> {
        self.spent = self.spent.saturating_add(steps);
        if self.spent > self.limit {
            Err(LogicError::ResourceExhausted(self.limit))
        } else {
            Ok(())
        }
    }
}

/// Result of quantifier elimination: an equivalent quantifier-free formula
/// plus some accounting. Divisibility atoms may appear in the output.
#[derive(Debug, Clone)]
pub struct QeResult {
    pub formula: Formula,
    pub eliminated_quantifiers: usize,
    pub atom_count: usize,
}

/// The Presburger solver. Stateless apart from its configuration; queries
/// may run from any number of threads.
#[derive(Debug, Clone, Default)]
pub struct Solver {
    config: QeConfig,
}

impl Solver {
    pub fn new() -> Self {
        Solver::default()
    }

    pub fn with_config(config: QeConfig) -> Self {
        Solver { config }
    }

    pub fn config(&self) -> QeConfig {
        self.config
    }

    /// Produces a quantifier-free formula equivalent to the input over the
    /// integers (booleans read as 0/1).
    pub fn eliminate_quantifiers(&self, f: &Formula) -> Result<QeResult, LogicError> {
        let mut budget = Budget::new(self.config.max_steps);
        let mut eliminated = 0usize;
        let expanded = expand_divisions(f)?;
        let out = eliminate(&expanded, &mut budget, &mut eliminated)?;
        let atom_count = out.atom_count();
        Ok(QeResult { formula: out, eliminated_quantifiers: eliminated, atom_count })
    }

    /// Satisfiability with free variables read existentially. Inner
    /// quantifiers are eliminated symbolically; the free variables are then
    /// decided by depth-first search over the candidate substitutions,
    /// which prunes far better than a full elimination chain.
    pub fn is_satisfiable(&self, f: &Formula) -> Result<bool, LogicError> {
        let mut budget = Budget::new(self.config.max_steps);
        let mut eliminated = 0usize;
        let expanded = expand_divisions(f)?;
        let mut sorts: BTreeMap<String, Sort> = BTreeMap::new();
        infer_free_sorts(&expanded, &mut Vec::new(), &mut sorts)?;
        let inner_qf = eliminate(&expanded, &mut budget, &mut eliminated)?;
        let mut qff = to_qff(&inner_qf, false)?;
        // Boolean variables become 0/1-bounded integers.
        let mut conjuncts = vec![];
        for (var, sort) in &sorts {
            if *sort == Sort::Bool {
                let t = linear::LinTerm::var(var);
                conjuncts.push(Qff::Lt(t.scale(-1)?.add(&linear::LinTerm::constant(-1))?)); // 0 <= b
                conjuncts.push(Qff::Lt(t.add(&linear::LinTerm::constant(-2))?)); // b <= 1
            }
        }
        if !conjuncts.is_empty() {
            conjuncts.push(qff);
            qff = Qff::And(conjuncts);
        }
        let vars: Vec<String> = sorts.keys().cloned().collect();
        cooper::sat_search(qff, &vars, &mut budget)
    }

    /// Validity with free variables read universally.
    pub fn is_valid(&self, f: &Formula) -> Result<bool, LogicError> {
        Ok(!self.is_satisfiable(&Formula::not(f.clone()))?)
    }

    /// `is_valid(hypothesis => conclusion)`.
    pub fn implies(&self, hypothesis: &Formula, conclusion: &Formula) -> Result<bool, LogicError> {
        self.is_valid(&Formula::implies(hypothesis.clone(), conclusion.clone()))
    }
}

/// Recursively eliminates quantifiers, innermost first. Boolean quantifiers
/// expand by substitution; integer quantifiers go through the elimination
/// core. Universals reduce to negated existentials.
fn eliminate(
    f: &Formula,
    budget: &mut Budget,
    eliminated: &mut usize,
) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::True
        | Formula::False
        | Formula::BoolVar(_)
        | Formula::Cmp(..)
        | Formula::Divides(..) => f.clone(),
        Formula::Not(inner) => Formula::not(eliminate(inner, budget, eliminated)?),
        Formula::And(l, r) => {
            Formula::and(eliminate(l, budget, eliminated)?, eliminate(r, budget, eliminated)?)
        }
        Formula::Or(l, r) => {
            Formula::or(eliminate(l, budget, eliminated)?, eliminate(r, budget, eliminated)?)
        }
        Formula::Implies(l, r) => {
            Formula::implies(eliminate(l, budget, eliminated)?, eliminate(r, budget, eliminated)?)
        }
        Formula::Exists(v, sort, body) => match sort {
            Sort::Int => {
                let inner = eliminate(body, budget, eliminated)?;
                let qff = to_qff(&inner, false)?;
                let out = cooper::eliminate_int_var(v, qff, budget)?;
                *eliminated += 1;
                qff_to_formula(&simplify(out))
            }
            Sort::Bool => {
                *eliminated += 1;
                let expansion = Formula::or(
                    body.substitute(&[(v.clone(), Expr::Bool(true))]),
                    body.substitute(&[(v.clone(), Expr::Bool(false))]),
                );
                eliminate(&expansion, budget, eliminated)?
            }
            other => return Err(LogicError::UnsupportedSort(other.to_string())),
        },
        Formula::Forall(v, sort, body) => match sort {
            Sort::Int => {
                let dual = Formula::exists(v.clone(), Sort::Int, Formula::not((**body).clone()));
                let out = eliminate(&dual, budget, eliminated)?;
                // Push the outer negation back through the internal form.
                qff_to_formula(&simplify(to_qff(&out, true)?))
            }
            Sort::Bool => {
                *eliminated += 1;
                let expansion = Formula::and(
                    body.substitute(&[(v.clone(), Expr::Bool(true))]),
                    body.substitute(&[(v.clone(), Expr::Bool(false))]),
                );
                eliminate(&expansion, budget, eliminated)?
            }
            other => return Err(LogicError::UnsupportedSort(other.to_string())),
        },
    })
}

fn infer_free_sorts(
    f: &Formula,
    bound: &mut Vec<String>,
    out: &mut BTreeMap<String, Sort>,
) -> Result<(), LogicError> {
    fn record(
        v: &str,
        sort: Sort,
        bound: &[String],
        out: &mut BTreeMap<String, Sort>,
    ) -> Result<(), LogicError> {
        if bound.iter().any(|b| b == v) {
            return Ok(());
        }
        match out.get(v) {
            None => {
                out.insert(v.to_string(), sort);
                Ok(())
            }
            Some(s) if *s == sort => Ok(()),
            Some(_) => Err(LogicError::IllSorted(v.to_string())),
        }
    }
    match f {
        Formula::True | Formula::False => Ok(()),
        Formula::BoolVar(v) => record(v, Sort::Bool, bound, out),
        Formula::Cmp(_, l, r) => {
            for side in [l, r] {
                for v in side.free_vars() {
                    record(&v, Sort::Int, bound, out)?;
                }
            }
            Ok(())
        }
        Formula::Divides(_, e) => {
            for v in e.free_vars() {
                record(&v, Sort::Int, bound, out)?;
            }
            Ok(())
        }
        Formula::Not(inner) => infer_free_sorts(inner, bound, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            infer_free_sorts(l, bound, out)?;
            infer_free_sorts(r, bound, out)
        }
        Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
            bound.push(v.clone());
            let res = infer_free_sorts(body, bound, out);
            bound.pop();
            res
        }
    }
}
