use std::collections::BTreeSet;
use std::fmt;

use super::{CmpOp, Expr, Sort};

/// Presburger-arithmetic predicates decorating interactions.
///
/// Atoms compare linear integer expressions; boolean variables stand on
/// their own. `Divides` never appears in surface syntax, it is produced by
/// quantifier elimination and admitted internally.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// A boolean-sorted variable used as an atom.
    BoolVar(String),
    /// `lhs op rhs` over integer expressions.
    Cmp(CmpOp, Expr, Expr),
    /// `k | e`: k divides e, with k a positive constant.
    Divides(i64, Expr),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn exists(var: impl Into<String>, sort: Sort, body: Formula) -> Formula {
        Formula::Exists(var.into(), sort, Box::new(body))
    }

    pub fn forall(var: impl Into<String>, sort: Sort, body: Formula) -> Formula {
        Formula::Forall(var.into(), sort, Box::new(body))
    }

    pub fn cmp(op: CmpOp, lhs: Expr, rhs: Expr) -> Formula {
        Formula::Cmp(op, lhs, rhs)
    }

    /// Conjunction of a list, dropping `true` units; empty yields `true`.
    pub fn conj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = parts.into_iter().filter(|p| *p != Formula::True).collect();
        match items.len() {
            0 => Formula::True,
            1 => items.pop().unwrap(),
            _ => {
                let mut it = items.into_iter();
                let first = it.next().unwrap();
                it.fold(first, Formula::and)
            }
        }
    }

    /// Disjunction of a list; empty yields `false`.
    pub fn disj(parts: impl IntoIterator<Item = Formula>) -> Formula {
        let mut items: Vec<Formula> = parts.into_iter().collect();
        match items.len() {
            0 => Formula::False,
            1 => items.pop().unwrap(),
            _ => {
                let mut it = items.into_iter();
                let first = it.next().unwrap();
                it.fold(first, Formula::or)
            }
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::True)
    }

    /// Variables occurring outside any binder for them.
    pub fn free_variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::BoolVar(v) => {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.clone());
                }
            }
            Formula::Cmp(_, l, r) => {
                for v in l.free_vars().union(&r.free_vars()) {
                    if !bound.iter().any(|b| b == v) {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Divides(_, e) => {
                for v in e.free_vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Formula::Exists(v, _, body) | Formula::Forall(v, _, body) => {
                bound.push(v.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    /// Whether any quantifier occurs in the formula.
    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::BoolVar(_) | Formula::Cmp(..) | Formula::Divides(..) => false,
            Formula::Not(f) => f.has_quantifier(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.has_quantifier() || r.has_quantifier()
            }
            Formula::Exists(..) | Formula::Forall(..) => true,
        }
    }

    /// Number of atoms (comparisons, boolean variables, divisibilities).
    pub fn atom_count(&self) -> usize {
        match self {
            Formula::True | Formula::False => 0,
            Formula::BoolVar(_) | Formula::Cmp(..) | Formula::Divides(..) => 1,
            Formula::Not(f) => f.atom_count(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.atom_count() + r.atom_count()
            }
            Formula::Exists(_, _, body) | Formula::Forall(_, _, body) => body.atom_count(),
        }
    }

    /// Capture-avoiding simultaneous substitution of expressions for free
    /// variables. Binders are renamed (with [`fresh_name`]) whenever a
    /// substituted expression would capture them.
    pub fn substitute(&self, bindings: &[(String, Expr)]) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::BoolVar(v) => match bindings.iter().find(|(name, _)| name == v) {
                // Only variable-for-variable or boolean-expression images make
                // sense here; a variable image keeps the atom shape.
                Some((_, Expr::Var(w))) => Formula::BoolVar(w.clone()),
                Some((_, Expr::Bool(true))) => Formula::True,
                Some((_, Expr::Bool(false))) => Formula::False,
                Some((_, e)) => expr_to_formula(e).unwrap_or_else(|| Formula::BoolVar(v.clone())),
                None => self.clone(),
            },
            Formula::Cmp(op, l, r) => {
                Formula::Cmp(*op, l.substitute_pairs(bindings), r.substitute_pairs(bindings))
            }
            Formula::Divides(k, e) => Formula::Divides(*k, e.substitute_pairs(bindings)),
            Formula::Not(f) => Formula::not(f.substitute(bindings)),
            Formula::And(l, r) => Formula::and(l.substitute(bindings), r.substitute(bindings)),
            Formula::Or(l, r) => Formula::or(l.substitute(bindings), r.substitute(bindings)),
            Formula::Implies(l, r) => {
                Formula::implies(l.substitute(bindings), r.substitute(bindings))
            }
            Formula::Exists(v, sort, body) => {
                let (v, body) = substitute_under_binder(v, body, bindings);
                Formula::Exists(v, *sort, Box::new(body))
            }
            Formula::Forall(v, sort, body) => {
                let (v, body) = substitute_under_binder(v, body, bindings);
                Formula::Forall(v, *sort, Box::new(body))
            }
        }
    }

    /// Compact rendering used inside assertion brackets: `0<c && c<=q`.
    pub fn compact(&self) -> String {
        let mut s = String::new();
        self.fmt_with(&mut s, 0, false);
        s
    }

    /// Spaced rendering used in diagnostics: `true => 0 > 50`.
    pub fn spaced(&self) -> String {
        let mut s = String::new();
        self.fmt_with(&mut s, 0, true);
        s
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Exists(..) | Formula::Forall(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(_) => 5,
            _ => 6,
        }
    }

    fn fmt_with(&self, out: &mut String, min: u8, spaced: bool) {
        let prec = self.precedence();
        let parens = prec < min;
        if parens {
            out.push('(');
        }
        match self {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::BoolVar(v) => out.push_str(v),
            Formula::Cmp(op, l, r) => {
                if spaced {
                    out.push_str(&format!("{l} {} {r}", op.symbol()));
                } else {
                    out.push_str(&format!("{l}{}{r}", op.symbol()));
                }
            }
            Formula::Divides(k, e) => {
                if spaced {
                    out.push_str(&format!("{k} | {e}"));
                } else {
                    out.push_str(&format!("{k}|{e}"));
                }
            }
            Formula::Not(f) => {
                out.push('!');
                f.fmt_with(out, 5, spaced);
            }
            Formula::And(l, r) => {
                l.fmt_with(out, prec, spaced);
                out.push_str(" && ");
                r.fmt_with(out, prec + 1, spaced);
            }
            Formula::Or(l, r) => {
                l.fmt_with(out, prec, spaced);
                out.push_str(" || ");
                r.fmt_with(out, prec + 1, spaced);
            }
            Formula::Implies(l, r) => {
                // Right-associative.
                l.fmt_with(out, prec + 1, spaced);
                out.push_str(" => ");
                r.fmt_with(out, prec, spaced);
            }
            Formula::Exists(v, sort, body) => {
                out.push_str(&format!("exists {v}:{sort}. "));
                body.fmt_with(out, prec, spaced);
            }
            Formula::Forall(v, sort, body) => {
                out.push_str(&format!("forall {v}:{sort}. "));
                body.fmt_with(out, prec, spaced);
            }
        }
        if parens {
            out.push(')');
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.compact())
    }
}

impl Expr {
    fn substitute_pairs(&self, bindings: &[(String, Expr)]) -> Expr {
        self.substitute(bindings)
    }
}

/// Reads a boolean expression back as a formula where possible.
fn expr_to_formula(e: &Expr) -> Option<Formula> {
    match e {
        Expr::Bool(true) => Some(Formula::True),
        Expr::Bool(false) => Some(Formula::False),
        Expr::Var(v) => Some(Formula::BoolVar(v.clone())),
        Expr::Not(inner) => expr_to_formula(inner).map(Formula::not),
        Expr::Cmp(op, l, r) => Some(Formula::Cmp(*op, (**l).clone(), (**r).clone())),
        Expr::Bin(super::BinOp::And, l, r) => {
            Some(Formula::and(expr_to_formula(l)?, expr_to_formula(r)?))
        }
        Expr::Bin(super::BinOp::Or, l, r) => {
            Some(Formula::or(expr_to_formula(l)?, expr_to_formula(r)?))
        }
        _ => None,
    }
}

fn substitute_under_binder(
    var: &str,
    body: &Formula,
    bindings: &[(String, Expr)],
) -> (String, Formula) {
    // The binder shadows its own substitution entry.
    let live: Vec<(String, Expr)> =
        bindings.iter().filter(|(name, _)| name != var).cloned().collect();
    if live.is_empty() {
        return (var.to_string(), body.clone());
    }
    let captures = live.iter().any(|(_, e)| e.free_vars().contains(var));
    if !captures {
        return (var.to_string(), body.substitute(&live));
    }
    // Rename the binder away from everything in sight.
    let mut avoid: BTreeSet<String> = body.free_variables();
    for (name, e) in &live {
        avoid.insert(name.clone());
        avoid.extend(e.free_vars());
    }
    let fresh = fresh_name(var, &avoid);
    let renamed = body.substitute(&[(var.to_string(), Expr::var(fresh.clone()))]);
    (fresh.clone(), renamed.substitute(&live))
}

/// Picks `base1`, `base2`, ... until the name avoids the given set.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    for i in 1.. {
        let candidate = format!("{base}{i}");
        if !avoid.contains(&candidate) {
            return candidate;
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str) -> Expr {
        Expr::var(name)
    }

    #[test]
    fn free_variables_of_constants_and_atoms() {
        assert!(Formula::True.free_variables().is_empty());

        // 0 < c && c <= q
        let f = Formula::and(
            Formula::cmp(CmpOp::Lt, Expr::Int(0), v("c")),
            Formula::cmp(CmpOp::Le, v("c"), v("q")),
        );
        let fv: Vec<_> = f.free_variables().into_iter().collect();
        assert_eq!(fv, vec!["c".to_string(), "q".to_string()]);
    }

    #[test]
    fn free_variables_under_quantifier() {
        // exists q:int. 0 < c && c <= q && q > 0
        let f = Formula::exists(
            "q",
            Sort::Int,
            Formula::conj([
                Formula::cmp(CmpOp::Lt, Expr::Int(0), v("c")),
                Formula::cmp(CmpOp::Le, v("c"), v("q")),
                Formula::cmp(CmpOp::Gt, v("q"), Expr::Int(0)),
            ]),
        );
        let fv: Vec<_> = f.free_variables().into_iter().collect();
        assert_eq!(fv, vec!["c".to_string()]);
    }

    #[test]
    fn ground_substitution() {
        let f = Formula::cmp(CmpOp::Gt, v("q"), Expr::Int(0));
        let out = f.substitute(&[("q".into(), Expr::Int(50))]);
        assert_eq!(out, Formula::cmp(CmpOp::Gt, Expr::Int(50), Expr::Int(0)));
        assert_eq!(out.spaced(), "50 > 0");
    }

    #[test]
    fn capture_avoidance_renames_binder() {
        // (exists q. c <= q)[c -> q]  must rename the binder.
        let f = Formula::exists("q", Sort::Int, Formula::cmp(CmpOp::Le, v("c"), v("q")));
        let out = f.substitute(&[("c".into(), v("q"))]);
        match out {
            Formula::Exists(b, Sort::Int, body) => {
                assert_ne!(b, "q");
                assert_eq!(*body, Formula::cmp(CmpOp::Le, v("q"), v(&b)));
            }
            other => panic!("expected exists, got {other:?}"),
        }
    }

    #[test]
    fn shifting_substitution() {
        // (r < n)[r -> r+1] = r+1 < n
        let f = Formula::cmp(CmpOp::Lt, v("r"), v("n"));
        let out = f.substitute(&[("r".into(), Expr::add(v("r"), Expr::Int(1)))]);
        assert_eq!(out, Formula::cmp(CmpOp::Lt, Expr::add(v("r"), Expr::Int(1)), v("n")));
        assert_eq!(out.compact(), "r+1<n");
    }

    #[test]
    fn identity_when_domain_disjoint() {
        let f = Formula::exists("q", Sort::Int, Formula::cmp(CmpOp::Le, v("c"), v("q")));
        let out = f.substitute(&[("z".into(), Expr::Int(3))]);
        assert_eq!(out, f);
    }

    #[test]
    fn rendering_conventions() {
        let f = Formula::conj([
            Formula::cmp(CmpOp::Lt, Expr::Int(0), v("c")),
            Formula::cmp(CmpOp::Le, v("c"), v("q")),
        ]);
        assert_eq!(f.compact(), "0<c && c<=q");
        assert_eq!(f.spaced(), "0 < c && c <= q");

        let imp = Formula::implies(Formula::True, Formula::cmp(CmpOp::Gt, Expr::Int(0), Expr::Int(50)));
        assert_eq!(imp.spaced(), "true => 0 > 50");

        let quant = Formula::exists(
            "n",
            Sort::Int,
            Formula::and(
                Formula::cmp(CmpOp::Lt, v("r"), v("n")),
                Formula::cmp(CmpOp::Gt, v("n"), Expr::Int(0)),
            ),
        );
        assert_eq!(quant.compact(), "exists n:int. r<n && n>0");
        // A quantifier under a connective gets parenthesised.
        let conj = Formula::and(quant, Formula::BoolVar("b".into()));
        assert_eq!(conj.compact(), "(exists n:int. r<n && n>0) && b");
    }
}
