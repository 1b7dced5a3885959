use std::collections::{BTreeMap, BTreeSet};

use crate::syntax::{BinOp, CmpOp, Expr, Formula, Sort};

use super::LogicError;

/// A linear combination of integer variables plus a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct LinTerm {
    pub coeffs: BTreeMap<String, i64>,
    pub constant: i64,
}

impl LinTerm {
    pub fn constant(k: i64) -> Self {
        LinTerm { coeffs: BTreeMap::new(), constant: k }
    }

    pub fn var(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), 1);
        LinTerm { coeffs, constant: 0 }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff_of(&self, var: &str) -> i64 {
        self.coeffs.get(var).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &LinTerm) -> Result<LinTerm, LogicError> {
        let mut out = self.clone();
        for (v, c) in &other.coeffs {
            let entry = out.coeffs.entry(v.clone()).or_insert(0);
            *entry = entry.checked_add(*c).ok_or(LogicError::Overflow)?;
        }
        out.constant = out.constant.checked_add(other.constant).ok_or(LogicError::Overflow)?;
        out.coeffs.retain(|_, c| *c != 0);
        Ok(out)
    }

    pub fn sub(&self, other: &LinTerm) -> Result<LinTerm, LogicError> {
        self.add(&other.scale(-1)?)
    }

    pub fn scale(&self, factor: i64) -> Result<LinTerm, LogicError> {
        if factor == 0 {
            return Ok(LinTerm::constant(0));
        }
        let mut out = LinTerm::constant(self.constant.checked_mul(factor).ok_or(LogicError::Overflow)?);
        for (v, c) in &self.coeffs {
            out.coeffs.insert(v.clone(), c.checked_mul(factor).ok_or(LogicError::Overflow)?);
        }
        Ok(out)
    }

    /// Drops `var` from the term, returning its coefficient and the rest.
    pub fn split_var(&self, var: &str) -> (i64, LinTerm) {
        let mut rest = self.clone();
        let coeff = rest.coeffs.remove(var).unwrap_or(0);
        (coeff, rest)
    }

    /// Substitutes `var := replacement` into the term.
    pub fn subst_var(&self, var: &str, replacement: &LinTerm) -> Result<LinTerm, LogicError> {
        let (coeff, rest) = self.split_var(var);
        if coeff == 0 {
            return Ok(self.clone());
        }
        rest.add(&replacement.scale(coeff)?)
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.coeffs.keys()
    }

    pub fn to_expr(&self) -> Expr {
        let mut acc: Option<Expr> = if self.constant != 0 || self.coeffs.is_empty() {
            Some(if self.constant < 0 {
                Expr::Neg(Box::new(Expr::Int(-self.constant)))
            } else {
                Expr::Int(self.constant)
            })
        } else {
            None
        };
        for (v, c) in &self.coeffs {
            let part = match *c {
                1 => Expr::var(v.clone()),
                -1 => Expr::Neg(Box::new(Expr::var(v.clone()))),
                c if c < 0 => Expr::Neg(Box::new(Expr::bin(
                    BinOp::Mul,
                    Expr::Int(-c),
                    Expr::var(v.clone()),
                ))),
                c => Expr::bin(BinOp::Mul, Expr::Int(c), Expr::var(v.clone())),
            };
            acc = Some(match acc {
                None => part,
                Some(prev) => Expr::add(prev, part),
            });
        }
        acc.unwrap_or(Expr::Int(0))
    }
}

/// Converts an integer expression into a linear term. Division must have
/// been expanded away beforehand; products need one constant side.
pub(crate) fn expr_to_linterm(e: &Expr) -> Result<LinTerm, LogicError> {
    match e {
        Expr::Int(n) => Ok(LinTerm::constant(*n)),
        Expr::Var(v) => Ok(LinTerm::var(v)),
        Expr::Neg(inner) => expr_to_linterm(inner)?.scale(-1),
        Expr::Bin(BinOp::Add, l, r) => expr_to_linterm(l)?.add(&expr_to_linterm(r)?),
        Expr::Bin(BinOp::Sub, l, r) => expr_to_linterm(l)?.sub(&expr_to_linterm(r)?),
        Expr::Bin(BinOp::Mul, l, r) => {
            let lt = expr_to_linterm(l)?;
            let rt = expr_to_linterm(r)?;
            if lt.is_constant() {
                rt.scale(lt.constant)
            } else if rt.is_constant() {
                lt.scale(rt.constant)
            } else {
                Err(LogicError::NonLinearAtom(e.to_string()))
            }
        }
        _ => Err(LogicError::NonLinearAtom(e.to_string())),
    }
}

/// Quantifier-free formulas in negation normal form over linear atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Qff {
    Const(bool),
    /// `term < 0`
    Lt(LinTerm),
    /// `term = 0`
    Eq(LinTerm),
    /// `k | term` with k >= 1
    Div(i64, LinTerm),
    NotDiv(i64, LinTerm),
    And(Vec<Qff>),
    Or(Vec<Qff>),
}

impl Qff {
    pub fn mentions(&self, var: &str) -> bool {
        match self {
            Qff::Const(_) => false,
            Qff::Lt(t) | Qff::Eq(t) | Qff::Div(_, t) | Qff::NotDiv(_, t) => t.coeff_of(var) != 0,
            Qff::And(items) | Qff::Or(items) => items.iter().any(|q| q.mentions(var)),
        }
    }

    pub fn atom_count(&self) -> usize {
        match self {
            Qff::Const(_) => 0,
            Qff::Lt(_) | Qff::Eq(_) | Qff::Div(..) | Qff::NotDiv(..) => 1,
            Qff::And(items) | Qff::Or(items) => items.iter().map(Qff::atom_count).sum(),
        }
    }
}

/// Translates a quantifier-free, division-free formula into NNF over linear
/// atoms. Boolean variables are treated as 0/1 integers (`b` reads `b = 1`).
pub(crate) fn to_qff(f: &Formula, negated: bool) -> Result<Qff, LogicError> {
    Ok(match f {
        Formula::True => Qff::Const(!negated),
        Formula::False => Qff::Const(negated),
        Formula::BoolVar(v) => {
            // b  <=>  b = 1; !b  <=>  b != 1 (0/1 bounds are added at closure).
            let t = LinTerm::var(v);
            cmp_atom(if negated { CmpOp::Ne } else { CmpOp::Eq }, t, LinTerm::constant(1))?
        }
        Formula::Cmp(op, l, r) => {
            let lt = expr_to_linterm(l)?;
            let rt = expr_to_linterm(r)?;
            let op = if negated { negate_cmp(*op) } else { *op };
            cmp_atom(op, lt, rt)?
        }
        Formula::Divides(k, e) => {
            if *k <= 0 {
                return Err(LogicError::NonLinearAtom(format!("{k} | {e}")));
            }
            let t = expr_to_linterm(e)?;
            if negated {
                Qff::NotDiv(*k, t)
            } else {
                Qff::Div(*k, t)
            }
        }
        Formula::Not(inner) => to_qff(inner, !negated)?,
        Formula::And(l, r) => {
            let (lq, rq) = (to_qff(l, negated)?, to_qff(r, negated)?);
            if negated {
                Qff::Or(vec![lq, rq])
            } else {
                Qff::And(vec![lq, rq])
            }
        }
        Formula::Or(l, r) => {
            let (lq, rq) = (to_qff(l, negated)?, to_qff(r, negated)?);
            if negated {
                Qff::And(vec![lq, rq])
            } else {
                Qff::Or(vec![lq, rq])
            }
        }
        Formula::Implies(l, r) => {
            let (lq, rq) = (to_qff(l, !negated)?, to_qff(r, negated)?);
            if negated {
                // !(l => r) = l && !r; to_qff(l, !true)=to_qff(l,false) is l itself.
                Qff::And(vec![lq, rq])
            } else {
                Qff::Or(vec![lq, rq])
            }
        }
        Formula::Exists(..) | Formula::Forall(..) => {
            unreachable!("to_qff expects quantifier-free input")
        }
    })
}

fn negate_cmp(op: CmpOp) -> CmpOp {
    match op {
        CmpOp::Eq => CmpOp::Ne,
        CmpOp::Ne => CmpOp::Eq,
        CmpOp::Lt => CmpOp::Ge,
        CmpOp::Le => CmpOp::Gt,
        CmpOp::Gt => CmpOp::Le,
        CmpOp::Ge => CmpOp::Lt,
    }
}

/// Encodes `lhs op rhs` with strict `< 0` atoms.
fn cmp_atom(op: CmpOp, lhs: LinTerm, rhs: LinTerm) -> Result<Qff, LogicError> {
    let diff = lhs.sub(&rhs)?; // lhs - rhs
    Ok(match op {
        // lhs < rhs  <=>  diff < 0
        CmpOp::Lt => Qff::Lt(diff),
        // lhs <= rhs  <=>  diff - 1 < 0
        CmpOp::Le => Qff::Lt(diff.add(&LinTerm::constant(-1))?),
        // lhs > rhs  <=>  -diff < 0
        CmpOp::Gt => Qff::Lt(diff.scale(-1)?),
        // lhs >= rhs  <=>  -diff - 1 < 0
        CmpOp::Ge => Qff::Lt(diff.scale(-1)?.add(&LinTerm::constant(-1))?),
        CmpOp::Eq => Qff::Eq(diff),
        CmpOp::Ne => Qff::Or(vec![Qff::Lt(diff.clone()), Qff::Lt(diff.scale(-1)?)]),
    })
}

/// Reads the internal form back as a surface formula.
pub(crate) fn qff_to_formula(q: &Qff) -> Formula {
    match q {
        Qff::Const(true) => Formula::True,
        Qff::Const(false) => Formula::False,
        Qff::Lt(t) => {
            let (lhs, rhs) = split_sides(t);
            Formula::Cmp(CmpOp::Lt, lhs.to_expr(), rhs.to_expr())
        }
        Qff::Eq(t) => {
            let (lhs, rhs) = split_sides(t);
            Formula::Cmp(CmpOp::Eq, lhs.to_expr(), rhs.to_expr())
        }
        Qff::Div(k, t) => Formula::Divides(*k, t.to_expr()),
        Qff::NotDiv(k, t) => Formula::not(Formula::Divides(*k, t.to_expr())),
        Qff::And(items) => {
            Formula::conj(items.iter().map(qff_to_formula).collect::<Vec<_>>())
        }
        Qff::Or(items) => {
            if items.is_empty() {
                Formula::False
            } else {
                Formula::disj(items.iter().map(qff_to_formula).collect::<Vec<_>>())
            }
        }
    }
}

/// Splits `t ? 0` into `positive-part ? negated-negative-part` for display.
fn split_sides(t: &LinTerm) -> (LinTerm, LinTerm) {
    let mut lhs = LinTerm::constant(0);
    let mut rhs = LinTerm::constant(0);
    for (v, c) in &t.coeffs {
        if *c > 0 {
            lhs.coeffs.insert(v.clone(), *c);
        } else {
            rhs.coeffs.insert(v.clone(), -*c);
        }
    }
    if t.constant > 0 {
        lhs.constant = t.constant;
    } else {
        rhs.constant = -t.constant;
    }
    (lhs, rhs)
}

/// Rewrites every atom containing an integer division into an equivalent
/// division-free atom guarded by fresh existentials: `x = e/k` becomes the
/// unique `z` with `k*z <= e < k*(z+1)`.
pub(crate) fn expand_divisions(f: &Formula) -> Result<Formula, LogicError> {
    let mut avoid = BTreeSet::new();
    collect_names(f, &mut avoid);
    expand_divisions_inner(f, &mut avoid)
}

fn expand_divisions_inner(
    f: &Formula,
    avoid: &mut BTreeSet<String>,
) -> Result<Formula, LogicError> {
    Ok(match f {
        Formula::True | Formula::False | Formula::BoolVar(_) => f.clone(),
        Formula::Cmp(op, l, r) => {
            let mut defs = Vec::new();
            let l2 = lift_divisions(l, avoid, &mut defs)?;
            let r2 = lift_divisions(r, avoid, &mut defs)?;
            close_over_defs(Formula::Cmp(*op, l2, r2), defs)
        }
        Formula::Divides(k, e) => {
            let mut defs = Vec::new();
            let e2 = lift_divisions(e, avoid, &mut defs)?;
            close_over_defs(Formula::Divides(*k, e2), defs)
        }
        Formula::Not(inner) => Formula::not(expand_divisions_inner(inner, avoid)?),
        Formula::And(l, r) => {
            Formula::and(expand_divisions_inner(l, avoid)?, expand_divisions_inner(r, avoid)?)
        }
        Formula::Or(l, r) => {
            Formula::or(expand_divisions_inner(l, avoid)?, expand_divisions_inner(r, avoid)?)
        }
        Formula::Implies(l, r) => {
            Formula::implies(expand_divisions_inner(l, avoid)?, expand_divisions_inner(r, avoid)?)
        }
        Formula::Exists(v, sort, body) => {
            Formula::exists(v.clone(), *sort, expand_divisions_inner(body, avoid)?)
        }
        Formula::Forall(v, sort, body) => {
            Formula::forall(v.clone(), *sort, expand_divisions_inner(body, avoid)?)
        }
    })
}

struct DivDef {
    var: String,
    divisor: i64,
    dividend: Expr,
}

fn lift_divisions(
    e: &Expr,
    avoid: &mut BTreeSet<String>,
    defs: &mut Vec<DivDef>,
) -> Result<Expr, LogicError> {
    Ok(match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_) => e.clone(),
        Expr::Neg(inner) => Expr::Neg(Box::new(lift_divisions(inner, avoid, defs)?)),
        Expr::Not(inner) => Expr::Not(Box::new(lift_divisions(inner, avoid, defs)?)),
        Expr::Bin(BinOp::Div, l, r) => {
            let dividend = lift_divisions(l, avoid, defs)?;
            let divisor = match **r {
                Expr::Int(k) if k > 0 => k,
                _ => return Err(LogicError::NonLinearAtom(e.to_string())),
            };
            let var = crate::syntax::fresh_name("q", avoid);
            avoid.insert(var.clone());
            defs.push(DivDef { var: var.clone(), divisor, dividend });
            Expr::var(var)
        }
        Expr::Bin(op, l, r) => Expr::Bin(
            *op,
            Box::new(lift_divisions(l, avoid, defs)?),
            Box::new(lift_divisions(r, avoid, defs)?),
        ),
        Expr::Cmp(op, l, r) => Expr::Cmp(
            *op,
            Box::new(lift_divisions(l, avoid, defs)?),
            Box::new(lift_divisions(r, avoid, defs)?),
        ),
    })
}

fn close_over_defs(atom: Formula, defs: Vec<DivDef>) -> Formula {
    if defs.is_empty() {
        return atom;
    }
    let mut body = atom;
    // k*z <= e  &&  e < k*(z+1), innermost definition first.
    for def in defs.iter().rev() {
        let kz = Expr::bin(BinOp::Mul, Expr::Int(def.divisor), Expr::var(def.var.clone()));
        let kz1 = Expr::bin(
            BinOp::Mul,
            Expr::Int(def.divisor),
            Expr::add(Expr::var(def.var.clone()), Expr::Int(1)),
        );
        let lower = Formula::Cmp(CmpOp::Le, kz, def.dividend.clone());
        let upper = Formula::Cmp(CmpOp::Lt, def.dividend.clone(), kz1);
        body = Formula::exists(
            def.var.clone(),
            Sort::Int,
            Formula::and(Formula::and(lower, upper), body),
        );
    }
    body
}

fn collect_names(f: &Formula, out: &mut BTreeSet<String>) {
    match f {
        Formula::True | Formula::False => {}
        Formula::BoolVar(v) => {
            out.insert(v.clone());
        }
        Formula::Cmp(_, l, r) => {
            out.extend(l.free_vars());
            out.extend(r.free_vars());
        }
        Formula::Divides(_, e) => out.extend(e.free_vars()),
        Formula::Not(inner) => collect_names(inner, out),
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
            collect_names(l, out);
            collect_names(r, out);
        }
        Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
            out.insert(v.clone());
            collect_names(body, out);
        }
    }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: i64, b: i64) -> Result<i64, LogicError> {
    if a == 0 || b == 0 {
        return Ok(0);
    }
    (a / gcd(a, b)).checked_mul(b).map(i64::abs).ok_or(LogicError::Overflow)
}
