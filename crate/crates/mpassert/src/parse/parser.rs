use std::collections::HashMap;

use crate::diagnostics::{NodePath, Pos};
use crate::syntax::{
    BinOp, Channel, CmpOp, Expr, Formula, GlobalAssertion, GlobalBranchArm, LocalAssertion,
    LocalBranchArm, Participant, Process, ProcessBranchArm, RecParam, Sort,
};

use super::lexer::{lex, Kw, Tok};
use super::{ParseError, ParseErrorKind, ProtocolFile, SourceMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Mode {
    /// Whole protocol files: unknown variables are errors.
    File,
    /// Single-term entry points: variable sorts are inferred from usage.
    Standalone,
}

struct RecSig {
    var: String,
    value_sorts: Vec<Sort>,
    channel_count: usize,
}

pub(super) struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
    mode: Mode,
    vars: Vec<(String, Sort)>,
    recs: Vec<RecSig>,
    /// Stack of channel scopes; empty in standalone mode (unrestricted).
    channels: Vec<Vec<Channel>>,
    inferred: HashMap<String, Sort>,
}

impl Parser {
    pub(super) fn new(text: &str, mode: Mode) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            i: 0,
            mode,
            vars: Vec::new(),
            recs: Vec::new(),
            channels: Vec::new(),
            inferred: HashMap::new(),
        })
    }

    // ------------------------------------------------------------------
    // Token helpers
    // ------------------------------------------------------------------

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err(&self, expected: impl Into<String>) -> ParseError {
        ParseError::new(
            self.pos(),
            ParseErrorKind::Syntax { expected: expected.into(), found: self.peek().describe() },
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err(what)),
        }
    }

    fn sort(&mut self) -> Result<Sort, ParseError> {
        let s = match self.peek() {
            Tok::Kw(Kw::Int) => Sort::Int,
            Tok::Kw(Kw::Bool) => Sort::Bool,
            Tok::Kw(Kw::String) => Sort::Str,
            Tok::Kw(Kw::Date) => Sort::Date,
            _ => return Err(self.err("a sort (int, bool, string, date)")),
        };
        self.bump();
        Ok(s)
    }

    // ------------------------------------------------------------------
    // Scopes
    // ------------------------------------------------------------------

    fn lookup_var(&self, name: &str) -> Option<Sort> {
        self.vars
            .iter()
            .rev()
            .find(|(v, _)| v == name)
            .map(|(_, s)| *s)
            .or_else(|| self.inferred.get(name).copied())
    }

    fn channel_in_scope(&self, name: &str) -> bool {
        match self.channels.last() {
            None => true, // standalone: unrestricted
            Some(scope) => scope.iter().any(|c| c.name() == name),
        }
    }

    fn require_channel(&self, name: &str, pos: Pos) -> Result<Channel, ParseError> {
        if self.channel_in_scope(name) {
            Ok(Channel::new(name))
        } else {
            Err(ParseError::new(
                pos,
                ParseErrorKind::Structure(format!(
                    "channel `{name}` is not in scope here (session and recursion channels only)"
                )),
            ))
        }
    }

    // ------------------------------------------------------------------
    // Expression sort checking / inference
    // ------------------------------------------------------------------

    fn infer_expr_sort(
        &mut self,
        e: &Expr,
        hint: Option<Sort>,
        pos: Pos,
    ) -> Result<Sort, ParseError> {
        match e {
            Expr::Int(_) => Ok(Sort::Int),
            Expr::Bool(_) => Ok(Sort::Bool),
            // Date values are written as string literals.
            Expr::Str(_) => Ok(if hint == Some(Sort::Date) { Sort::Date } else { Sort::Str }),
            Expr::Var(v) => match self.lookup_var(v) {
                Some(s) => Ok(s),
                None if self.mode == Mode::Standalone => {
                    let s = hint.unwrap_or(Sort::Int);
                    self.inferred.insert(v.clone(), s);
                    Ok(s)
                }
                None => Err(ParseError::new(pos, ParseErrorKind::UnknownVariable(v.clone()))),
            },
            Expr::Neg(inner) => {
                self.check_expr(inner, Sort::Int, pos)?;
                Ok(Sort::Int)
            }
            Expr::Not(inner) => {
                self.check_expr(inner, Sort::Bool, pos)?;
                Ok(Sort::Bool)
            }
            Expr::Bin(BinOp::Add | BinOp::Sub | BinOp::Mul, l, r) => {
                self.check_expr(l, Sort::Int, pos)?;
                self.check_expr(r, Sort::Int, pos)?;
                Ok(Sort::Int)
            }
            Expr::Bin(BinOp::Div, l, r) => {
                self.check_expr(l, Sort::Int, pos)?;
                match **r {
                    Expr::Int(k) if k > 0 => Ok(Sort::Int),
                    _ => Err(ParseError::new(
                        pos,
                        ParseErrorKind::Structure(
                            "division is only allowed by a positive integer constant".into(),
                        ),
                    )),
                }
            }
            Expr::Bin(BinOp::And | BinOp::Or, l, r) => {
                self.check_expr(l, Sort::Bool, pos)?;
                self.check_expr(r, Sort::Bool, pos)?;
                Ok(Sort::Bool)
            }
            Expr::Cmp(op, l, r) => {
                match op {
                    CmpOp::Eq | CmpOp::Ne => {
                        let ls = self.infer_expr_sort(l, None, pos)?;
                        self.check_expr(r, ls, pos)?;
                    }
                    _ => {
                        self.check_expr(l, Sort::Int, pos)?;
                        self.check_expr(r, Sort::Int, pos)?;
                    }
                }
                Ok(Sort::Bool)
            }
        }
    }

    fn check_expr(&mut self, e: &Expr, expected: Sort, pos: Pos) -> Result<(), ParseError> {
        let found = self.infer_expr_sort(e, Some(expected), pos)?;
        if found == expected {
            Ok(())
        } else {
            Err(ParseError::new(
                pos,
                ParseErrorKind::Sort { expected, found: found.to_string() },
            ))
        }
    }

    /// Checks that a formula only constrains int/bool variables in scope and
    /// that its atoms are linear.
    fn validate_formula(&mut self, f: &Formula, pos: Pos) -> Result<(), ParseError> {
        match f {
            Formula::True | Formula::False => Ok(()),
            Formula::BoolVar(v) => match self.lookup_var(v) {
                Some(Sort::Bool) => Ok(()),
                Some(Sort::Int) => Err(ParseError::new(
                    pos,
                    ParseErrorKind::Sort { expected: Sort::Bool, found: Sort::Int.to_string() },
                )),
                Some(sort) => {
                    Err(ParseError::new(pos, ParseErrorKind::AssertionOnOpaque { var: v.clone(), sort }))
                }
                None if self.mode == Mode::Standalone => {
                    self.inferred.insert(v.clone(), Sort::Bool);
                    Ok(())
                }
                None => Err(ParseError::new(pos, ParseErrorKind::UnknownVariable(v.clone()))),
            },
            Formula::Cmp(_, l, r) => {
                for side in [l, r] {
                    self.check_assertion_operand(side, pos)?;
                    if !is_linear(side) {
                        return Err(ParseError::new(
                            pos,
                            ParseErrorKind::Structure(
                                "assertion atoms must be linear (no product of two variables)"
                                    .into(),
                            ),
                        ));
                    }
                }
                Ok(())
            }
            Formula::Divides(..) => Err(ParseError::new(
                pos,
                ParseErrorKind::Structure("divisibility atoms are internal only".into()),
            )),
            Formula::Not(inner) => self.validate_formula(inner, pos),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                self.validate_formula(l, pos)?;
                self.validate_formula(r, pos)
            }
            Formula::Exists(v, sort, body) | Formula::Forall(v, sort, body) => {
                if !sort.is_logical() {
                    return Err(ParseError::new(
                        pos,
                        ParseErrorKind::Structure(format!(
                            "quantified sorts must be int or bool, not {sort}"
                        )),
                    ));
                }
                self.vars.push((v.clone(), *sort));
                let res = self.validate_formula(body, pos);
                self.vars.pop();
                res
            }
        }
    }

    /// Operands of assertion atoms must be int expressions over int
    /// variables; string/date variables may not be constrained.
    fn check_assertion_operand(&mut self, e: &Expr, pos: Pos) -> Result<(), ParseError> {
        for v in e.free_vars() {
            match self.lookup_var(&v) {
                Some(Sort::Str) | Some(Sort::Date) => {
                    let sort = self.lookup_var(&v).unwrap();
                    return Err(ParseError::new(
                        pos,
                        ParseErrorKind::AssertionOnOpaque { var: v, sort },
                    ));
                }
                _ => {}
            }
        }
        self.check_expr(e, Sort::Int, pos)
    }

    // ------------------------------------------------------------------
    // Formulas
    // ------------------------------------------------------------------

    /// `[-]` (the placeholder for `true`) or `[formula]`.
    fn assertion(&mut self) -> Result<Formula, ParseError> {
        self.expect(Tok::LBracket, "`[`")?;
        if self.eat(&Tok::Minus) {
            self.expect(Tok::RBracket, "`]`")?;
            return Ok(Formula::True);
        }
        let pos = self.pos();
        let f = self.formula()?;
        self.validate_formula(&f, pos)?;
        self.expect(Tok::RBracket, "`]` after assertion")?;
        Ok(f)
    }

    pub(super) fn formula(&mut self) -> Result<Formula, ParseError> {
        self.formula_implies()
    }

    fn formula_implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.formula_or()?;
        if self.eat(&Tok::FatArrow) {
            let rhs = self.formula_implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn formula_or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_and()?;
        while self.eat(&Tok::OrOr) {
            let rhs = self.formula_and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn formula_and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.formula_unary()?;
        while self.eat(&Tok::AndAnd) {
            let rhs = self.formula_unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn formula_unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.formula_unary()?))
            }
            Tok::Kw(Kw::Exists) | Tok::Kw(Kw::Forall) => {
                let exists = matches!(self.peek(), Tok::Kw(Kw::Exists));
                self.bump();
                let var = self.ident("a quantified variable")?;
                self.expect(Tok::Colon, "`:`")?;
                let sort = self.sort()?;
                self.expect(Tok::Dot, "`.` after quantifier")?;
                let body = self.formula_implies()?;
                Ok(if exists {
                    Formula::exists(var, sort, body)
                } else {
                    Formula::forall(var, sort, body)
                })
            }
            _ => self.formula_atom(),
        }
    }

    fn formula_atom(&mut self) -> Result<Formula, ParseError> {
        // Attempt an arithmetic comparison first; fall back to boolean
        // constants, boolean variables and parenthesised formulas.
        let save = self.i;
        if let Ok(lhs) = self.arith_expr() {
            if let Some(op) = self.peek_cmp_op() {
                self.bump();
                let rhs = self.arith_expr()?;
                return Ok(Formula::Cmp(op, lhs, rhs));
            }
            if let Expr::Var(v) = lhs {
                return Ok(Formula::BoolVar(v));
            }
        }
        self.i = save;
        match self.peek().clone() {
            Tok::Kw(Kw::True) => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Kw(Kw::False) => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            _ => Err(self.err("a formula")),
        }
    }

    fn peek_cmp_op(&self) -> Option<CmpOp> {
        Some(match self.peek() {
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return None,
        })
    }

    // ------------------------------------------------------------------
    // Expressions
    // ------------------------------------------------------------------

    /// Full expression grammar: payloads, recursion arguments, conditions.
    pub(super) fn expr(&mut self) -> Result<Expr, ParseError> {
        self.expr_or()
    }

    fn expr_or(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_and()?;
        while self.eat(&Tok::OrOr) {
            lhs = Expr::bin(BinOp::Or, lhs, self.expr_and()?);
        }
        Ok(lhs)
    }

    fn expr_and(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.expr_cmp()?;
        while self.eat(&Tok::AndAnd) {
            lhs = Expr::bin(BinOp::And, lhs, self.expr_cmp()?);
        }
        Ok(lhs)
    }

    fn expr_cmp(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.arith_expr()?;
        if let Some(op) = self.peek_cmp_op() {
            self.bump();
            let rhs = self.arith_expr()?;
            Ok(Expr::Cmp(op, Box::new(lhs), Box::new(rhs)))
        } else {
            Ok(lhs)
        }
    }

    fn arith_expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.arith_term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::bin(BinOp::Add, lhs, self.arith_term()?);
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::bin(BinOp::Sub, lhs, self.arith_term()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn arith_term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.arith_factor()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::bin(BinOp::Mul, lhs, self.arith_factor()?);
            } else if self.eat(&Tok::Slash) {
                lhs = Expr::bin(BinOp::Div, lhs, self.arith_factor()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn arith_factor(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Tok::Kw(Kw::True) => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Kw(Kw::False) => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Ident(v) => {
                self.bump();
                Ok(Expr::var(v))
            }
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.arith_factor()?)))
            }
            Tok::Bang => {
                self.bump();
                Ok(Expr::Not(Box::new(self.arith_factor()?)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.err("an expression")),
        }
    }

    // ------------------------------------------------------------------
    // Globals
    // ------------------------------------------------------------------

    fn global(
        &mut self,
        path: NodePath,
        map: &mut HashMap<NodePath, Pos>,
    ) -> Result<GlobalAssertion, ParseError> {
        map.insert(path.clone(), self.pos());
        match self.peek().clone() {
            Tok::Kw(Kw::End) => {
                self.bump();
                Ok(GlobalAssertion::End)
            }
            Tok::Kw(Kw::Mu) => self.global_rec(path, map),
            Tok::Ident(name) => {
                let head_pos = self.pos();
                self.bump();
                if self.peek() == &Tok::Arrow {
                    self.bump();
                    let receiver = self.ident("a receiver participant")?;
                    if receiver == name {
                        return Err(ParseError::new(
                            head_pos,
                            ParseErrorKind::SelfInteraction(name),
                        ));
                    }
                    self.expect(Tok::Colon, "`:`")?;
                    let chan_name = self.ident("a channel")?;
                    let channel = Channel::new(chan_name);
                    match self.peek() {
                        Tok::LParen => self.global_interaction(
                            Participant::new(name),
                            Participant::new(receiver),
                            channel,
                            path,
                            map,
                        ),
                        Tok::Amp => self.global_branch(
                            Participant::new(name),
                            Participant::new(receiver),
                            channel,
                            path,
                            map,
                        ),
                        _ => Err(self.err("`(` (interaction) or `&` (branch)")),
                    }
                } else if self.peek() == &Tok::LParen {
                    self.global_call(name, head_pos)
                } else {
                    Err(self.err("`->` or `(`"))
                }
            }
            _ => Err(self.err("a global description")),
        }
    }

    fn global_interaction(
        &mut self,
        sender: Participant,
        receiver: Participant,
        channel: Channel,
        path: NodePath,
        map: &mut HashMap<NodePath, Pos>,
    ) -> Result<GlobalAssertion, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let var_pos = self.pos();
        let payload_var = self.ident("a payload variable")?;
        self.expect(Tok::Colon, "`:`")?;
        let sort = self.sort()?;
        self.expect(Tok::RParen, "`)`")?;
        // Reusing a name already bound on this path would conflate two
        // distinct values in every later rely.
        if self.vars.iter().any(|(v, _)| v == &payload_var) {
            return Err(ParseError::new(
                var_pos,
                ParseErrorKind::Structure(format!(
                    "payload variable `{payload_var}` shadows an earlier one on this path"
                )),
            ));
        }
        let depth = self.vars.len();
        self.vars.push((payload_var.clone(), sort));
        let assertion = self.assertion()?;
        self.expect(Tok::Semi, "`;` after interaction")?;
        let continuation = self.global(path.child(0), map)?;
        self.vars.truncate(depth);
        Ok(GlobalAssertion::Interaction {
            sender,
            receiver,
            channel,
            payload_var,
            sort,
            assertion,
            continuation: Box::new(continuation),
        })
    }

    fn global_branch(
        &mut self,
        sender: Participant,
        receiver: Participant,
        channel: Channel,
        path: NodePath,
        map: &mut HashMap<NodePath, Pos>,
    ) -> Result<GlobalAssertion, ParseError> {
        self.expect(Tok::Amp, "`&`")?;
        let branch_id = self.ident("a branch identifier")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut arms: Vec<GlobalBranchArm> = Vec::new();
        loop {
            let arm_pos = self.pos();
            let assertion = self.assertion()?;
            let label = self.ident("a branch label")?;
            if arms.iter().any(|a| a.label == label) {
                return Err(ParseError::new(arm_pos, ParseErrorKind::DuplicateLabel(label)));
            }
            self.expect(Tok::Colon, "`:`")?;
            let continuation = self.global(path.child(arms.len() as u32), map)?;
            arms.push(GlobalBranchArm { label, assertion, continuation });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace, "`}` after branch arms")?;
        Ok(GlobalAssertion::Branch { sender, receiver, channel, branch_id, arms })
    }

    fn global_rec(
        &mut self,
        path: NodePath,
        map: &mut HashMap<NodePath, Pos>,
    ) -> Result<GlobalAssertion, ParseError> {
        self.expect(Tok::Kw(Kw::Mu), "`mu`")?;
        let var = self.ident("a recursion variable")?;
        let args_pos = self.pos();
        self.expect(Tok::LParen, "`(`")?;
        let inits = self.expr_list(Tok::RParen)?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::LParen, "`(`")?;
        let formals = self.formal_list()?;
        self.expect(Tok::RParen, "`)`")?;
        if inits.len() != formals.len() {
            return Err(ParseError::new(
                args_pos,
                ParseErrorKind::ArityMismatch {
                    var,
                    expected: formals.len(),
                    found: inits.len(),
                },
            ));
        }
        for (init, (_, sort)) in inits.iter().zip(&formals) {
            self.check_expr(init, *sort, args_pos)?;
        }
        let depth = self.vars.len();
        for (name, sort) in &formals {
            if self.vars.iter().any(|(v, _)| v == name) {
                return Err(ParseError::new(
                    args_pos,
                    ParseErrorKind::Structure(format!(
                        "recursion parameter `{name}` shadows an earlier variable"
                    )),
                ));
            }
            self.vars.push((name.clone(), *sort));
        }
        let invariant = self.assertion()?;
        self.expect(Tok::Dot, "`.` after recursion header")?;
        self.recs.push(RecSig {
            var: var.clone(),
            value_sorts: formals.iter().map(|(_, s)| *s).collect(),
            channel_count: 0,
        });
        let body = self.global(path.child(0), map)?;
        self.recs.pop();
        self.vars.truncate(depth);
        let params = formals
            .into_iter()
            .zip(inits)
            .map(|((formal, sort), init)| RecParam { formal, sort, init })
            .collect();
        Ok(GlobalAssertion::Rec { var, params, invariant, body: Box::new(body) })
    }

    fn global_call(&mut self, var: String, pos: Pos) -> Result<GlobalAssertion, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let actuals = self.expr_list(Tok::RParen)?;
        self.expect(Tok::RParen, "`)`")?;
        let sig = self
            .recs
            .iter()
            .rev()
            .find(|r| r.var == var)
            .ok_or_else(|| ParseError::new(pos, ParseErrorKind::UnknownRecursionVariable(var.clone())))?;
        if actuals.len() != sig.value_sorts.len() {
            return Err(ParseError::new(
                pos,
                ParseErrorKind::ArityMismatch {
                    var,
                    expected: sig.value_sorts.len(),
                    found: actuals.len(),
                },
            ));
        }
        let sorts = sig.value_sorts.clone();
        for (actual, sort) in actuals.iter().zip(sorts) {
            self.check_expr(actual, sort, pos)?;
        }
        Ok(GlobalAssertion::Call { var, actuals })
    }

    fn expr_list(&mut self, terminator: Tok) -> Result<Vec<Expr>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == &terminator || self.peek() == &Tok::Semi {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn formal_list(&mut self) -> Result<Vec<(String, Sort)>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek(), Tok::RParen | Tok::Semi) {
            return Ok(out);
        }
        loop {
            let name = self.ident("a parameter name")?;
            self.expect(Tok::Colon, "`:`")?;
            let sort = self.sort()?;
            out.push((name, sort));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn channel_list(&mut self) -> Result<Vec<Channel>, ParseError> {
        let mut out = Vec::new();
        if matches!(self.peek(), Tok::RParen) {
            return Ok(out);
        }
        loop {
            out.push(Channel::new(self.ident("a channel name")?));
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    // ------------------------------------------------------------------
    // Processes
    // ------------------------------------------------------------------

    fn process_top(
        &mut self,
        path: NodePath,
        map: &mut HashMap<NodePath, Pos>,
    ) -> Result<Process, ParseError> {
        map.insert(path.clone(), self.pos());
        match self.peek() {
            Tok::Kw(Kw::Init) => {
                self.bump();
                self.expect(Tok::Colon, "`:` after `init`")?;
                let service = self.ident("a service name")?;
                self.expect(Tok::LBracket, "`[`")?;
                let mut participants = Vec::new();
                loop {
                    participants.push(Participant::new(self.ident("a participant")?));
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::LParen, "`(`")?;
                let channels = self.channel_list()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Dot, "`.` after session header")?;
                self.channels.push(channels.clone());
                let body = self.process_body(path.child(0), map)?;
                self.channels.pop();
                Ok(Process::Init { service, participants, channels, body: Box::new(body) })
            }
            Tok::Kw(Kw::Join) => {
                self.bump();
                self.expect(Tok::Colon, "`:` after `join`")?;
                let service = self.ident("a service name")?;
                self.expect(Tok::LBracket, "`[`")?;
                let participant = Participant::new(self.ident("a participant")?);
                self.expect(Tok::RBracket, "`]`")?;
                self.expect(Tok::LParen, "`(`")?;
                let channels = self.channel_list()?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Dot, "`.` after session header")?;
                self.channels.push(channels.clone());
                let body = self.process_body(path.child(0), map)?;
                self.channels.pop();
                Ok(Process::Join { service, participant, channels, body: Box::new(body) })
            }
            _ => Err(self.err("`init:` or `join:`")),
        }
    }

    fn process_body(
        &mut self,
        path: NodePath,
        map: &mut HashMap<NodePath, Pos>,
    ) -> Result<Process, ParseError> {
        map.insert(path.clone(), self.pos());
        match self.peek().clone() {
            Tok::Kw(Kw::End) => {
                self.bump();
                Ok(Process::Inact)
            }
            Tok::Kw(Kw::If) => {
                self.bump();
                let cond_pos = self.pos();
                let cond = self.expr()?;
                self.check_expr(&cond, Sort::Bool, cond_pos)?;
                self.expect(Tok::Kw(Kw::Then), "`then`")?;
                let then_body = self.process_body(path.child(0), map)?;
                self.expect(Tok::Kw(Kw::Else), "`else`")?;
                let else_body = self.process_body(path.child(1), map)?;
                Ok(Process::IfThenElse {
                    cond,
                    then_body: Box::new(then_body),
                    else_body: Box::new(else_body),
                })
            }
            Tok::Kw(Kw::Mu) => self.process_rec(path, map),
            Tok::Ident(name) => {
                let head_pos = self.pos();
                self.bump();
                match self.peek() {
                    Tok::Bang => {
                        let channel = self.require_channel(&name, head_pos)?;
                        self.bump();
                        self.expect(Tok::LParen, "`(`")?;
                        let expr_pos = self.pos();
                        let expr = self.expr()?;
                        self.expect(Tok::RParen, "`)`")?;
                        self.expect(Tok::LParen, "`(`")?;
                        let payload_var = self.ident("a payload variable")?;
                        self.expect(Tok::Colon, "`:`")?;
                        let sort = self.sort()?;
                        self.expect(Tok::RParen, "`)`")?;
                        self.check_expr(&expr, sort, expr_pos)?;
                        let depth = self.vars.len();
                        self.vars.push((payload_var.clone(), sort));
                        let assertion = self.assertion()?;
                        self.expect(Tok::Semi, "`;` after send")?;
                        let body = self.process_body(path.child(0), map)?;
                        self.vars.truncate(depth);
                        Ok(Process::Send {
                            channel,
                            expr,
                            payload_var,
                            sort,
                            assertion,
                            body: Box::new(body),
                        })
                    }
                    Tok::Quest => {
                        let channel = self.require_channel(&name, head_pos)?;
                        self.bump();
                        self.expect(Tok::LParen, "`(`")?;
                        let payload_var = self.ident("a payload variable")?;
                        self.expect(Tok::Colon, "`:`")?;
                        let sort = self.sort()?;
                        self.expect(Tok::RParen, "`)`")?;
                        let depth = self.vars.len();
                        self.vars.push((payload_var.clone(), sort));
                        let assertion = self.assertion()?;
                        self.expect(Tok::Semi, "`;` after receive")?;
                        let body = self.process_body(path.child(0), map)?;
                        self.vars.truncate(depth);
                        Ok(Process::Receive {
                            channel,
                            payload_var,
                            sort,
                            assertion,
                            body: Box::new(body),
                        })
                    }
                    Tok::Dollar => {
                        let channel = self.require_channel(&name, head_pos)?;
                        self.bump();
                        let assertion = self.assertion()?;
                        let branch_id = self.ident("a branch identifier")?;
                        self.expect(Tok::Dot, "`.`")?;
                        let label = self.ident("a label")?;
                        self.expect(Tok::Semi, "`;` after selection")?;
                        let body = self.process_body(path.child(0), map)?;
                        Ok(Process::Select {
                            channel,
                            assertion,
                            branch_id,
                            label,
                            body: Box::new(body),
                        })
                    }
                    Tok::Amp => {
                        let channel = self.require_channel(&name, head_pos)?;
                        self.bump();
                        let branch_id = self.ident("a branch identifier")?;
                        self.expect(Tok::LBrace, "`{`")?;
                        let mut arms: Vec<ProcessBranchArm> = Vec::new();
                        loop {
                            let arm_pos = self.pos();
                            let assertion = self.assertion()?;
                            let label = self.ident("a branch label")?;
                            if arms.iter().any(|a| a.label == label) {
                                return Err(ParseError::new(
                                    arm_pos,
                                    ParseErrorKind::DuplicateLabel(label),
                                ));
                            }
                            self.expect(Tok::Colon, "`:`")?;
                            let body = self.process_body(path.child(arms.len() as u32), map)?;
                            arms.push(ProcessBranchArm { label, assertion, body });
                            if !self.eat(&Tok::Comma) {
                                break;
                            }
                        }
                        self.expect(Tok::RBrace, "`}` after branch arms")?;
                        Ok(Process::Branch { channel, branch_id, arms })
                    }
                    Tok::LParen => self.process_call(name, head_pos),
                    _ => Err(self.err("`!`, `?`, `$`, `&` or `(`")),
                }
            }
            _ => Err(self.err("a process")),
        }
    }

    fn process_rec(
        &mut self,
        path: NodePath,
        map: &mut HashMap<NodePath, Pos>,
    ) -> Result<Process, ParseError> {
        self.expect(Tok::Kw(Kw::Mu), "`mu`")?;
        let var = self.ident("a recursion variable")?;
        let args_pos = self.pos();
        self.expect(Tok::LParen, "`(`")?;
        let value_args = self.expr_list(Tok::RParen)?;
        let channel_args = if self.eat(&Tok::Semi) { self.channel_list()? } else { Vec::new() };
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::LParen, "`(`")?;
        let value_params = self.formal_list()?;
        let channel_params = if self.eat(&Tok::Semi) { self.channel_list()? } else { Vec::new() };
        self.expect(Tok::RParen, "`)`")?;
        if value_args.len() != value_params.len() {
            return Err(ParseError::new(
                args_pos,
                ParseErrorKind::ArityMismatch {
                    var,
                    expected: value_params.len(),
                    found: value_args.len(),
                },
            ));
        }
        if channel_args.len() != channel_params.len() {
            return Err(ParseError::new(
                args_pos,
                ParseErrorKind::ArityMismatch {
                    var,
                    expected: channel_params.len(),
                    found: channel_args.len(),
                },
            ));
        }
        for arg in &channel_args {
            self.require_channel(arg.name(), args_pos)?;
        }
        for (arg, (_, sort)) in value_args.iter().zip(&value_params) {
            self.check_expr(arg, *sort, args_pos)?;
        }
        // Process recursions carry no invariant of their own; the bracket is
        // required for surface uniformity but must be trivial.
        let inv_pos = self.pos();
        let invariant = self.assertion()?;
        if invariant != Formula::True {
            return Err(ParseError::new(
                inv_pos,
                ParseErrorKind::Structure(
                    "process recursion takes no invariant; write `[-]` or `[true]`".into(),
                ),
            ));
        }
        self.expect(Tok::Dot, "`.` after recursion header")?;
        let depth = self.vars.len();
        for (name, sort) in &value_params {
            self.vars.push((name.clone(), *sort));
        }
        self.channels.push(channel_params.clone());
        self.recs.push(RecSig {
            var: var.clone(),
            value_sorts: value_params.iter().map(|(_, s)| *s).collect(),
            channel_count: channel_params.len(),
        });
        let body = self.process_body(path.child(0), map)?;
        self.recs.pop();
        self.channels.pop();
        self.vars.truncate(depth);
        Ok(Process::Rec {
            var,
            value_args,
            channel_args,
            value_params,
            channel_params,
            body: Box::new(body),
        })
    }

    fn process_call(&mut self, var: String, pos: Pos) -> Result<Process, ParseError> {
        self.expect(Tok::LParen, "`(`")?;
        let value_actuals = self.expr_list(Tok::RParen)?;
        let channel_actuals = if self.eat(&Tok::Semi) { self.channel_list()? } else { Vec::new() };
        self.expect(Tok::RParen, "`)`")?;
        let sig = self
            .recs
            .iter()
            .rev()
            .find(|r| r.var == var)
            .ok_or_else(|| ParseError::new(pos, ParseErrorKind::UnknownRecursionVariable(var.clone())))?;
        if value_actuals.len() != sig.value_sorts.len() {
            return Err(ParseError::new(
                pos,
                ParseErrorKind::ArityMismatch {
                    var,
                    expected: sig.value_sorts.len(),
                    found: value_actuals.len(),
                },
            ));
        }
        if channel_actuals.len() != sig.channel_count {
            return Err(ParseError::new(
                pos,
                ParseErrorKind::ArityMismatch {
                    var,
                    expected: sig.channel_count,
                    found: channel_actuals.len(),
                },
            ));
        }
        let sorts = sig.value_sorts.clone();
        for (actual, sort) in value_actuals.iter().zip(sorts) {
            self.check_expr(actual, sort, pos)?;
        }
        for chan in &channel_actuals {
            self.require_channel(chan.name(), pos)?;
        }
        Ok(Process::Call { var, value_actuals, channel_actuals })
    }

    // ------------------------------------------------------------------
    // Local assertions
    // ------------------------------------------------------------------

    fn local(&mut self) -> Result<LocalAssertion, ParseError> {
        match self.peek().clone() {
            Tok::Kw(Kw::End) => {
                self.bump();
                Ok(LocalAssertion::End)
            }
            Tok::Kw(Kw::Mu) => self.local_rec(),
            Tok::Ident(name) => {
                self.bump();
                match self.peek() {
                    Tok::Bang => self.local_prefix(Channel::new(name), true),
                    Tok::Quest => self.local_prefix(Channel::new(name), false),
                    Tok::Dollar => self.local_menu(Channel::new(name), true),
                    Tok::Amp => self.local_menu(Channel::new(name), false),
                    Tok::LParen => self.local_call(name),
                    _ => Err(self.err("`!`, `?`, `$`, `&` or `(`")),
                }
            }
            _ => Err(self.err("a local assertion")),
        }
    }

    fn local_prefix(&mut self, channel: Channel, send: bool) -> Result<LocalAssertion, ParseError> {
        self.bump(); // ! or ?
        self.expect(Tok::Lt, "`<`")?;
        let payload_var = self.ident("a payload variable")?;
        self.expect(Tok::Colon, "`:`")?;
        let sort = self.sort()?;
        self.expect(Tok::Gt, "`>`")?;
        let depth = self.vars.len();
        self.vars.push((payload_var.clone(), sort));
        let assertion = self.assertion()?;
        self.expect(Tok::Semi, "`;`")?;
        let continuation = self.local()?;
        self.vars.truncate(depth);
        Ok(if send {
            LocalAssertion::send(channel, payload_var, sort, assertion, continuation)
        } else {
            LocalAssertion::receive(channel, payload_var, sort, assertion, continuation)
        })
    }

    fn local_menu(&mut self, channel: Channel, select: bool) -> Result<LocalAssertion, ParseError> {
        self.bump(); // $ or &
        let branch_id = self.ident("a branch identifier")?;
        self.expect(Tok::LBrace, "`{`")?;
        let mut arms: Vec<LocalBranchArm> = Vec::new();
        loop {
            let arm_pos = self.pos();
            let assertion = self.assertion()?;
            let label = self.ident("a label")?;
            if arms.iter().any(|a| a.label == label) {
                return Err(ParseError::new(arm_pos, ParseErrorKind::DuplicateLabel(label)));
            }
            self.expect(Tok::Colon, "`:`")?;
            let continuation = self.local()?;
            arms.push(LocalBranchArm { label, assertion, continuation });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok(if select {
            LocalAssertion::Select { channel, branch_id, arms }
        } else {
            LocalAssertion::Branch { channel, branch_id, arms }
        })
    }

    fn local_rec(&mut self) -> Result<LocalAssertion, ParseError> {
        self.expect(Tok::Kw(Kw::Mu), "`mu`")?;
        let var = self.ident("a recursion variable")?;
        let args_pos = self.pos();
        self.expect(Tok::LParen, "`(`")?;
        let inits = self.expr_list(Tok::RParen)?;
        self.expect(Tok::RParen, "`)`")?;
        self.expect(Tok::LParen, "`(`")?;
        let formals = self.formal_list()?;
        self.expect(Tok::RParen, "`)`")?;
        if inits.len() != formals.len() {
            return Err(ParseError::new(
                args_pos,
                ParseErrorKind::ArityMismatch { var, expected: formals.len(), found: inits.len() },
            ));
        }
        let depth = self.vars.len();
        for (name, sort) in &formals {
            self.vars.push((name.clone(), *sort));
        }
        let invariant = self.assertion()?;
        self.expect(Tok::Dot, "`.`")?;
        self.recs.push(RecSig {
            var: var.clone(),
            value_sorts: formals.iter().map(|(_, s)| *s).collect(),
            channel_count: 0,
        });
        let body = self.local()?;
        self.recs.pop();
        self.vars.truncate(depth);
        let params = formals
            .into_iter()
            .zip(inits)
            .map(|((formal, sort), init)| RecParam { formal, sort, init })
            .collect();
        Ok(LocalAssertion::Rec { var, params, invariant, body: Box::new(body) })
    }

    fn local_call(&mut self, var: String) -> Result<LocalAssertion, ParseError> {
        let pos = self.pos();
        self.expect(Tok::LParen, "`(`")?;
        let actuals = self.expr_list(Tok::RParen)?;
        self.expect(Tok::RParen, "`)`")?;
        let sig = self
            .recs
            .iter()
            .rev()
            .find(|r| r.var == var)
            .ok_or_else(|| ParseError::new(pos, ParseErrorKind::UnknownRecursionVariable(var.clone())))?;
        if actuals.len() != sig.value_sorts.len() {
            return Err(ParseError::new(
                pos,
                ParseErrorKind::ArityMismatch {
                    var,
                    expected: sig.value_sorts.len(),
                    found: actuals.len(),
                },
            ));
        }
        Ok(LocalAssertion::Call { var, actuals })
    }

    // ------------------------------------------------------------------
    // Entry points
    // ------------------------------------------------------------------

    pub(super) fn protocol_file(mut self) -> Result<ProtocolFile, ParseError> {
        let mut source_map = SourceMap::default();
        let global = self.global(NodePath::root(), &mut source_map.global)?;
        let mut participants: Vec<(Participant, Process)> = Vec::new();
        while self.peek() != &Tok::Eof {
            let name_pos = self.pos();
            let name = self.ident("a participant name followed by `::`")?;
            if participants.iter().any(|(p, _)| p.name() == name) {
                return Err(ParseError::new(
                    name_pos,
                    ParseErrorKind::Structure(format!("participant `{name}` implemented twice")),
                ));
            }
            self.expect(Tok::ColonColon, "`::`")?;
            let mut proc_map = HashMap::new();
            self.vars.clear();
            self.recs.clear();
            let process = self.process_top(NodePath::root(), &mut proc_map)?;
            source_map.processes.insert(name.clone(), proc_map);
            participants.push((Participant::new(name), process));
        }
        let file = ProtocolFile { global, participants, source_map };
        validate_file(&file)?;
        Ok(file)
    }

    pub(super) fn global_only(mut self) -> Result<GlobalAssertion, ParseError> {
        let mut map = HashMap::new();
        let g = self.global(NodePath::root(), &mut map)?;
        self.expect(Tok::Eof, "end of input")?;
        Ok(g)
    }

    pub(super) fn process_only(mut self) -> Result<Process, ParseError> {
        let mut map = HashMap::new();
        let p = match self.peek() {
            Tok::Kw(Kw::Init) | Tok::Kw(Kw::Join) => {
                self.process_top(NodePath::root(), &mut map)?
            }
            _ => self.process_body(NodePath::root(), &mut map)?,
        };
        self.expect(Tok::Eof, "end of input")?;
        Ok(p)
    }

    pub(super) fn local_only(mut self) -> Result<LocalAssertion, ParseError> {
        let t = self.local()?;
        self.expect(Tok::Eof, "end of input")?;
        Ok(t)
    }

    pub(super) fn formula_only(mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        let f = self.formula()?;
        self.validate_formula(&f, pos)?;
        self.expect(Tok::Eof, "end of input")?;
        Ok(f)
    }
}

fn is_linear(e: &Expr) -> bool {
    fn constant(e: &Expr) -> bool {
        match e {
            Expr::Int(_) => true,
            Expr::Neg(inner) => constant(inner),
            Expr::Bin(BinOp::Add | BinOp::Sub | BinOp::Mul, l, r) => constant(l) && constant(r),
            _ => false,
        }
    }
    match e {
        Expr::Int(_) | Expr::Var(_) => true,
        Expr::Bool(_) | Expr::Str(_) | Expr::Not(_) | Expr::Cmp(..) => false,
        Expr::Neg(inner) => is_linear(inner),
        Expr::Bin(BinOp::Add | BinOp::Sub, l, r) => is_linear(l) && is_linear(r),
        Expr::Bin(BinOp::Mul, l, r) => {
            (constant(l) && is_linear(r)) || (constant(r) && is_linear(l))
        }
        Expr::Bin(BinOp::Div, l, r) => is_linear(l) && constant(r),
        Expr::Bin(BinOp::And | BinOp::Or, ..) => false,
    }
}

/// File-level invariants: participant/global consistency, a single `init`,
/// matching services and channel tuples.
fn validate_file(file: &ProtocolFile) -> Result<(), ParseError> {
    if file.participants.is_empty() {
        return Ok(());
    }
    let pos_of = |name: &str| {
        file.source_map
            .process_pos(name, &NodePath::root())
            .unwrap_or(Pos::new(1, 1))
    };
    let structure = |name: &str, msg: String| {
        ParseError::new(pos_of(name), ParseErrorKind::Structure(msg))
    };

    let global_parts = file.global.participants();
    let mut inits = Vec::new();
    let mut headers: Vec<(&str, &str, &[Channel])> = Vec::new();
    for (who, process) in &file.participants {
        match process {
            Process::Init { service, participants, channels, .. } => {
                inits.push(who.name());
                if participants.first() != Some(who) {
                    return Err(structure(
                        who.name(),
                        format!(
                            "the first participant of an `init` must be the initiator `{who}`"
                        ),
                    ));
                }
                let mut listed: Vec<&Participant> = participants.iter().collect();
                listed.sort();
                listed.dedup();
                if listed.len() != participants.len() {
                    return Err(structure(who.name(), "duplicate participant in `init`".into()));
                }
                let mut named: Vec<Participant> = participants.clone();
                named.sort();
                if named != global_parts {
                    return Err(structure(
                        who.name(),
                        "the `init` participant list must match the participants of the global description".into(),
                    ));
                }
                headers.push((who.name(), service, channels));
            }
            Process::Join { service, participant, channels, .. } => {
                if participant != who {
                    return Err(structure(
                        who.name(),
                        format!("`{who}` joins as `{participant}`; roles must match"),
                    ));
                }
                headers.push((who.name(), service, channels));
            }
            _ => {
                return Err(structure(
                    who.name(),
                    format!("participant `{who}` must start with `init:` or `join:`"),
                ))
            }
        }
    }
    if inits.len() != 1 {
        let name = file.participants[0].0.name();
        return Err(structure(
            name,
            format!("expected exactly one `init`, found {}", inits.len()),
        ));
    }
    let implemented: Vec<Participant> = {
        let mut v: Vec<Participant> = file.participants.iter().map(|(p, _)| p.clone()).collect();
        v.sort();
        v
    };
    if implemented != global_parts {
        let name = file.participants[0].0.name();
        return Err(structure(
            name,
            "implemented participants must match the participants of the global description"
                .into(),
        ));
    }
    let (first_name, service0, channels0) = headers[0];
    let _ = first_name;
    for (name, service, channels) in &headers[1..] {
        if service != &service0 {
            return Err(structure(name, format!("session service `{service}` differs from `{service0}`")));
        }
        if channels != &channels0 {
            return Err(structure(name, "session channel lists must be identical".into()));
        }
    }
    // Channels of the global description must be declared in the session.
    let mut used = Vec::new();
    collect_global_channels(&file.global, &mut used);
    for chan in used {
        if !channels0.contains(&chan) {
            let name = file.participants[0].0.name();
            return Err(structure(
                name,
                format!("channel `{chan}` is used by the global description but not part of the session"),
            ));
        }
    }
    Ok(())
}

fn collect_global_channels(g: &GlobalAssertion, out: &mut Vec<Channel>) {
    match g {
        GlobalAssertion::Interaction { channel, continuation, .. } => {
            if !out.contains(channel) {
                out.push(channel.clone());
            }
            collect_global_channels(continuation, out);
        }
        GlobalAssertion::Branch { channel, arms, .. } => {
            if !out.contains(channel) {
                out.push(channel.clone());
            }
            for arm in arms {
                collect_global_channels(&arm.continuation, out);
            }
        }
        GlobalAssertion::Rec { body, .. } => collect_global_channels(body, out),
        GlobalAssertion::Call { .. } | GlobalAssertion::End => {}
    }
}
