//! Brute-force evaluation of formulas over bounded integer windows, plus
//! the generator for the window-complete formula family the solver is
//! checked against.
//!
//! Window completeness: every generated formula confines its free and
//! quantified variables to a finite box, in one of two ways.
//!
//! * Box bounds: explicit conjuncts `-BOUND <= v <= BOUND`.
//! * Diamond bounds: conjuncts `|v + w| <= BOUND && |v - w| <= BOUND` for a
//!   chain of variable pairs anchored at a box-bounded variable. Adding the
//!   two gives `|2v| <= 2*BOUND`, so every variable again satisfies
//!   `|v| <= BOUND`.
//!
//! Any model therefore lies inside `[-BOUND, BOUND]^n`, and enumerating a
//! window at least that large decides the family exactly. The diamond form
//! exists so that the solver cannot discharge the family through
//! single-variable interval enumeration alone: its two-variable bound atoms
//! force the general elimination machinery.

use mpassert::syntax::{BinOp, CmpOp, Expr, Formula, Sort};

use super::TestRng;

/// Range bound baked into every generated formula.
pub const BOUND: i64 = 8;

pub type Env = Vec<(String, i64)>;

fn lookup(env: &Env, var: &str) -> i64 {
    env.iter()
        .rev()
        .find(|(v, _)| v == var)
        .map(|(_, n)| *n)
        .unwrap_or_else(|| panic!("unbound variable `{var}` in oracle evaluation"))
}

pub fn eval_expr(e: &Expr, env: &Env) -> i64 {
    match e {
        Expr::Int(n) => *n,
        Expr::Bool(b) => i64::from(*b),
        Expr::Str(_) => panic!("strings do not occur in oracle formulas"),
        Expr::Var(v) => lookup(env, v),
        Expr::Neg(inner) => -eval_expr(inner, env),
        Expr::Not(inner) => i64::from(eval_expr(inner, env) == 0),
        Expr::Bin(op, l, r) => {
            let (a, b) = (eval_expr(l, env), eval_expr(r, env));
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => a.div_euclid(b),
                BinOp::And => i64::from(a != 0 && b != 0),
                BinOp::Or => i64::from(a != 0 || b != 0),
            }
        }
        Expr::Cmp(op, l, r) => i64::from(op.holds(eval_expr(l, env), eval_expr(r, env))),
    }
}

/// Evaluates a formula under an assignment, enumerating quantifiers over
/// `-window..=window` (booleans over 0/1).
pub fn eval_formula(f: &Formula, env: &mut Env, window: i64) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::BoolVar(v) => lookup(env, v) == 1,
        Formula::Cmp(op, l, r) => op.holds(eval_expr(l, env), eval_expr(r, env)),
        Formula::Divides(k, e) => eval_expr(e, env).rem_euclid(*k) == 0,
        Formula::Not(inner) => !eval_formula(inner, env, window),
        Formula::And(l, r) => eval_formula(l, env, window) && eval_formula(r, env, window),
        Formula::Or(l, r) => eval_formula(l, env, window) || eval_formula(r, env, window),
        Formula::Implies(l, r) => !eval_formula(l, env, window) || eval_formula(r, env, window),
        Formula::Exists(v, sort, body) => {
            let values: Vec<i64> = match sort {
                Sort::Bool => vec![0, 1],
                _ => (-window..=window).collect(),
            };
            values.into_iter().any(|n| {
                env.push((v.clone(), n));
                let out = eval_formula(body, env, window);
                env.pop();
                out
            })
        }
        Formula::Forall(v, sort, body) => {
            let values: Vec<i64> = match sort {
                Sort::Bool => vec![0, 1],
                _ => (-window..=window).collect(),
            };
            values.into_iter().all(|n| {
                env.push((v.clone(), n));
                let out = eval_formula(body, env, window);
                env.pop();
                out
            })
        }
    }
}

/// Brute-force satisfiability over the window (free variables enumerated).
pub fn brute_satisfiable(f: &Formula, free: &[String], window: i64) -> bool {
    let mut env = Env::new();
    enumerate(f, free, window, &mut env, false)
}

/// Brute-force validity over the window.
pub fn brute_valid(f: &Formula, free: &[String], window: i64) -> bool {
    let mut env = Env::new();
    !enumerate(&Formula::not(f.clone()), free, window, &mut env, false)
}

fn enumerate(f: &Formula, free: &[String], window: i64, env: &mut Env, _all: bool) -> bool {
    match free.split_first() {
        None => eval_formula(f, env, window),
        Some((v, rest)) => (-window..=window).any(|n| {
            env.push((v.clone(), n));
            let out = enumerate(f, rest, window, env, _all);
            env.pop();
            out
        }),
    }
}

/// A generated oracle case: the formula and its free variables.
pub struct OracleCase {
    pub formula: Formula,
    pub free: Vec<String>,
}

fn var(name: &str) -> Expr {
    Expr::var(name)
}

fn bounds_for(v: &str) -> Formula {
    Formula::and(
        Formula::Cmp(CmpOp::Le, Expr::Int(-BOUND), var(v)),
        Formula::Cmp(CmpOp::Le, var(v), Expr::Int(BOUND)),
    )
}

/// `|v + w| <= BOUND && |v - w| <= BOUND`: confines `v` given that `w` is
/// confined, without any single-variable atom on `v`.
fn diamond_for(v: &str, w: &str) -> Formula {
    let sum = Expr::add(var(v), var(w));
    let diff = Expr::sub(var(v), var(w));
    Formula::conj([
        Formula::Cmp(CmpOp::Le, Expr::Int(-BOUND), sum.clone()),
        Formula::Cmp(CmpOp::Le, sum, Expr::Int(BOUND)),
        Formula::Cmp(CmpOp::Le, Expr::Int(-BOUND), diff.clone()),
        Formula::Cmp(CmpOp::Le, diff, Expr::Int(BOUND)),
    ])
}

/// Bounds for a variable chain: the first variable is box-bounded, later
/// ones diamond-bounded against their predecessor.
fn chain_bounds(vars: &[String], diamonds: bool) -> Vec<Formula> {
    let mut out = Vec::new();
    for (i, v) in vars.iter().enumerate() {
        if i == 0 || !diamonds {
            out.push(bounds_for(v));
        } else {
            out.push(diamond_for(v, &vars[i - 1]));
        }
    }
    out
}

/// A random linear atom over the given variables: coefficients in [-5, 5],
/// constants in [-10, 10].
fn random_atom(rng: &mut TestRng, vars: &[String]) -> Formula {
    let ops = [CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge];
    let op = *rng.pick(&ops);
    let mut lhs: Option<Expr> = None;
    for v in vars {
        if rng.chance(70) {
            let c = rng.range(-5, 5);
            if c == 0 {
                continue;
            }
            let term = if c == 1 {
                var(v)
            } else {
                Expr::bin(BinOp::Mul, Expr::Int(c), var(v))
            };
            lhs = Some(match lhs {
                None => term,
                Some(prev) => Expr::add(prev, term),
            });
        }
    }
    let lhs = match lhs {
        Some(e) => e,
        None => var(rng.pick(vars)),
    };
    Formula::Cmp(op, lhs, Expr::Int(rng.range(-10, 10)))
}

fn random_shape(rng: &mut TestRng, vars: &[String], depth: u32) -> Formula {
    if depth == 0 || rng.chance(40) {
        return random_atom(rng, vars);
    }
    match rng.next_u64() % 4 {
        0 => Formula::and(random_shape(rng, vars, depth - 1), random_shape(rng, vars, depth - 1)),
        1 => Formula::or(random_shape(rng, vars, depth - 1), random_shape(rng, vars, depth - 1)),
        2 => Formula::implies(
            random_shape(rng, vars, depth - 1),
            random_shape(rng, vars, depth - 1),
        ),
        _ => Formula::not(random_shape(rng, vars, depth - 1)),
    }
}

fn names(n: usize) -> Vec<String> {
    ["x", "y", "z"].iter().take(n).map(|s| s.to_string()).collect()
}

/// Quantifier-free case over up to `max_vars` confined free variables.
pub fn gen_quantifier_free(rng: &mut TestRng, max_vars: usize, diamonds: bool) -> OracleCase {
    let n = rng.range(1, max_vars as i64) as usize;
    let free = names(n);
    let body = random_shape(rng, &free, 2);
    let formula = Formula::conj(
        chain_bounds(&free, diamonds).into_iter().chain(std::iter::once(body)).collect::<Vec<_>>(),
    );
    OracleCase { formula, free }
}

/// One relativised quantifier over up to two confined free variables.
pub fn gen_one_quantifier(rng: &mut TestRng, diamonds: bool) -> OracleCase {
    let n = rng.range(1, 2) as usize;
    let free = names(n);
    let mut all = free.clone();
    all.push("q".to_string());
    let inner = random_shape(rng, &all, 2);
    let q_bound = if diamonds { diamond_for("q", "x") } else { bounds_for("q") };
    let quantified = if rng.chance(50) {
        Formula::exists("q", Sort::Int, Formula::and(q_bound, inner))
    } else {
        Formula::forall("q", Sort::Int, Formula::implies(q_bound, inner))
    };
    let formula = Formula::conj(
        chain_bounds(&free, diamonds)
            .into_iter()
            .chain(std::iter::once(quantified))
            .collect::<Vec<_>>(),
    );
    OracleCase { formula, free }
}

/// Two nested relativised quantifiers over one confined free variable.
pub fn gen_two_quantifiers(rng: &mut TestRng, diamonds: bool) -> OracleCase {
    let free = names(1);
    let all: Vec<String> = vec!["x".into(), "q".into(), "w".into()];
    let inner = random_shape(rng, &all, 1);
    let w_bound = if diamonds { diamond_for("w", "q") } else { bounds_for("w") };
    let q_bound = if diamonds { diamond_for("q", "x") } else { bounds_for("q") };
    let innermost = if rng.chance(50) {
        Formula::exists("w", Sort::Int, Formula::and(w_bound, inner))
    } else {
        Formula::forall("w", Sort::Int, Formula::implies(w_bound, inner))
    };
    let outer = if rng.chance(50) {
        Formula::exists("q", Sort::Int, Formula::and(q_bound, innermost))
    } else {
        Formula::forall("q", Sort::Int, Formula::implies(q_bound, innermost))
    };
    let formula = Formula::and(bounds_for("x"), outer);
    OracleCase { formula, free }
}
