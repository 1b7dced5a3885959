use std::collections::BTreeSet;
use std::fmt;

use super::Sort;

/// Comparison operators usable in formula atoms and boolean expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            CmpOp::Eq => lhs == rhs,
            CmpOp::Ne => lhs != rhs,
            CmpOp::Lt => lhs < rhs,
            CmpOp::Le => lhs <= rhs,
            CmpOp::Gt => lhs > rhs,
            CmpOp::Ge => lhs >= rhs,
        }
    }
}

/// Arithmetic and boolean operators over expressions.
///
/// `Div` is division by a positive integer constant only (floor semantics);
/// the decision procedure compiles it away, so formulas stay Presburger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

/// Value-level expressions: payloads of sends, recursion arguments and the
/// conditions of `if` processes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Str(String),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Add, lhs, rhs)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(lhs: Expr, rhs: Expr) -> Expr {
        Expr::bin(BinOp::Sub, lhs, rhs)
    }

    /// Variables occurring in the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(e) | Expr::Not(e) => e.collect_vars(out),
            Expr::Bin(_, l, r) | Expr::Cmp(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// Simultaneous substitution of expressions for variables.
    pub fn substitute(&self, bindings: &[(String, Expr)]) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) => self.clone(),
            Expr::Var(v) => bindings
                .iter()
                .find(|(name, _)| name == v)
                .map(|(_, e)| e.clone())
                .unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(bindings))),
            Expr::Not(e) => Expr::Not(Box::new(e.substitute(bindings))),
            Expr::Bin(op, l, r) => {
                Expr::Bin(*op, Box::new(l.substitute(bindings)), Box::new(r.substitute(bindings)))
            }
            Expr::Cmp(op, l, r) => {
                Expr::Cmp(*op, Box::new(l.substitute(bindings)), Box::new(r.substitute(bindings)))
            }
        }
    }

    /// Infers the sort of the expression given the sorts of its variables.
    /// Returns `None` when the expression is ill-sorted or mentions an
    /// unknown variable.
    pub fn sort_in(&self, ctx: &dyn Fn(&str) -> Option<Sort>) -> Option<Sort> {
        match self {
            Expr::Int(_) => Some(Sort::Int),
            Expr::Bool(_) => Some(Sort::Bool),
            Expr::Str(_) => Some(Sort::Str),
            Expr::Var(v) => ctx(v),
            Expr::Neg(e) => (e.sort_in(ctx)? == Sort::Int).then_some(Sort::Int),
            Expr::Not(e) => (e.sort_in(ctx)? == Sort::Bool).then_some(Sort::Bool),
            Expr::Bin(op, l, r) => {
                let (ls, rs) = (l.sort_in(ctx)?, r.sort_in(ctx)?);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        (ls == Sort::Int && rs == Sort::Int).then_some(Sort::Int)
                    }
                    BinOp::And | BinOp::Or => {
                        (ls == Sort::Bool && rs == Sort::Bool).then_some(Sort::Bool)
                    }
                }
            }
            Expr::Cmp(op, l, r) => {
                let (ls, rs) = (l.sort_in(ctx)?, r.sort_in(ctx)?);
                if ls != rs {
                    return None;
                }
                match op {
                    CmpOp::Eq | CmpOp::Ne => Some(Sort::Bool),
                    // Order comparisons apply to integers only.
                    _ => (ls == Sort::Int).then_some(Sort::Bool),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Str(_) | Expr::Var(_) => 5,
            Expr::Neg(_) | Expr::Not(_) => 4,
            Expr::Bin(BinOp::Mul | BinOp::Div, _, _) => 3,
            Expr::Bin(BinOp::Add | BinOp::Sub, _, _) => 2,
            Expr::Cmp(..) => 1,
            Expr::Bin(BinOp::And | BinOp::Or, _, _) => 0,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min {
            write!(f, "(")?;
        }
        match self {
            Expr::Int(n) => write!(f, "{n}")?,
            Expr::Bool(b) => write!(f, "{b}")?,
            Expr::Str(s) => write!(f, "\"{s}\"")?,
            Expr::Var(v) => f.write_str(v)?,
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 4)?;
            }
            Expr::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 4)?;
            }
            Expr::Bin(op, l, r) => {
                l.fmt_prec(f, prec)?;
                f.write_str(op.symbol())?;
                // Left-associative: the right operand needs strictly higher binding.
                r.fmt_prec(f, prec + 1)?;
            }
            Expr::Cmp(op, l, r) => {
                l.fmt_prec(f, prec + 1)?;
                f.write_str(op.symbol())?;
                r.fmt_prec(f, prec + 1)?;
            }
        }
        if prec < min {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn print_respects_precedence() {
        // (q+1)/2 needs parentheses, q+1*2 does not.
        let half = Expr::bin(
            BinOp::Div,
            Expr::add(Expr::var("q"), Expr::Int(1)),
            Expr::Int(2),
        );
        assert_eq!(half.to_string(), "(q+1)/2");
        let linear = Expr::add(Expr::var("q"), Expr::bin(BinOp::Mul, Expr::Int(1), Expr::Int(2)));
        assert_eq!(linear.to_string(), "q+1*2");
        let nested_sub = Expr::sub(Expr::var("a"), Expr::sub(Expr::var("b"), Expr::var("c")));
        assert_eq!(nested_sub.to_string(), "a-(b-c)");
    }

    #[test]
    fn substitute_replaces_all_occurrences() {
        let e = Expr::add(Expr::var("r"), Expr::Int(1));
        let out = e.substitute(&[("r".into(), Expr::Int(11))]);
        assert_eq!(out, Expr::add(Expr::Int(11), Expr::Int(1)));
    }

    #[test]
    fn sorts_of_mixed_expressions() {
        let ctx = |v: &str| match v {
            "q" => Some(Sort::Int),
            "ok" => Some(Sort::Bool),
            _ => None,
        };
        let half = Expr::bin(BinOp::Div, Expr::var("q"), Expr::Int(2));
        assert_eq!(half.sort_in(&ctx), Some(Sort::Int));
        let cmp = Expr::Cmp(CmpOp::Le, Box::new(Expr::var("q")), Box::new(Expr::Int(9)));
        assert_eq!(cmp.sort_in(&ctx), Some(Sort::Bool));
        let bad = Expr::add(Expr::var("ok"), Expr::Int(1));
        assert_eq!(bad.sort_in(&ctx), None);
    }
}
