use crate::diagnostics::Pos;

use super::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    Kw(Kw),
    Arrow,      // ->
    ColonColon, // ::
    Colon,
    Semi,
    Comma,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Bang,   // !
    Quest,  // ?
    Dollar, // $
    Amp,    // &
    AndAnd, // &&
    OrOr,   // ||
    FatArrow, // =>
    Eq,     // = (and ==)
    Ne,     // !=
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kw {
    Init,
    Join,
    Mu,
    End,
    If,
    Then,
    Else,
    Exists,
    Forall,
    True,
    False,
    Int,
    Bool,
    String,
    Date,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Kw(k) => format!("`{}`", k.text()),
            Tok::Arrow => "`->`".into(),
            Tok::ColonColon => "`::`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Quest => "`?`".into(),
            Tok::Dollar => "`$`".into(),
            Tok::Amp => "`&`".into(),
            Tok::AndAnd => "`&&`".into(),
            Tok::OrOr => "`||`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Ne => "`!=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

impl Kw {
    pub fn text(self) -> &'static str {
        match self {
            Kw::Init => "init",
            Kw::Join => "join",
            Kw::Mu => "mu",
            Kw::End => "end",
            Kw::If => "if",
            Kw::Then => "then",
            Kw::Else => "else",
            Kw::Exists => "exists",
            Kw::Forall => "forall",
            Kw::True => "true",
            Kw::False => "false",
            Kw::Int => "int",
            Kw::Bool => "bool",
            Kw::String => "string",
            Kw::Date => "date",
        }
    }

    fn from_ident(s: &str) -> Option<Kw> {
        Some(match s {
            "init" => Kw::Init,
            "join" => Kw::Join,
            "mu" => Kw::Mu,
            "end" => Kw::End,
            "if" => Kw::If,
            "then" => Kw::Then,
            "else" => Kw::Else,
            "exists" => Kw::Exists,
            "forall" => Kw::Forall,
            "true" => Kw::True,
            "false" => Kw::False,
            "int" => Kw::Int,
            "bool" => Kw::Bool,
            "string" => Kw::String,
            "date" => Kw::Date,
            _ => return None,
        })
    }
}

/// Tokenises the input, tracking 1-based line/column positions.
/// `//` starts a comment running to the end of the line.
pub fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else if c.is_some() {
                col += 1;
            }
            c
        }};
    }

    loop {
        let pos = Pos::new(line, col);
        let c = match chars.peek() {
            None => {
                out.push((Tok::Eof, pos));
                return Ok(out);
            }
            Some(c) => *c,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '/' => {
                bump!();
                if chars.peek() == Some(&'/') {
                    while let Some(&c) = chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        bump!();
                    }
                } else {
                    out.push((Tok::Slash, pos));
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        Some('"') => break,
                        Some('\n') | None => {
                            return Err(ParseError::new(
                                pos,
                                ParseErrorKind::Syntax {
                                    expected: "closing `\"`".into(),
                                    found: "end of line".into(),
                                },
                            ))
                        }
                        Some(c) => s.push(c),
                    }
                }
                out.push((Tok::Str(s), pos));
            }
            c if c.is_ascii_digit() => {
                let mut n: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if !d.is_ascii_digit() {
                        break;
                    }
                    bump!();
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add((d as u8 - b'0') as i64))
                        .ok_or_else(|| {
                            ParseError::new(
                                pos,
                                ParseErrorKind::Syntax {
                                    expected: "integer literal in range".into(),
                                    found: "overflowing literal".into(),
                                },
                            )
                        })?;
                }
                out.push((Tok::Int(n), pos));
            }
            c if c.is_ascii_alphabetic() => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if !(d.is_ascii_alphanumeric() || d == '_') {
                        break;
                    }
                    s.push(d);
                    bump!();
                }
                match Kw::from_ident(&s) {
                    Some(kw) => out.push((Tok::Kw(kw), pos)),
                    None => out.push((Tok::Ident(s), pos)),
                }
            }
            _ => {
                bump!();
                macro_rules! two {
                    ($next:expr) => {
                        chars.peek() == Some(&$next)
                    };
                }
                let tok = match c {
                    '-' => {
                        if two!('>') {
                            bump!();
                            Tok::Arrow
                        } else {
                            Tok::Minus
                        }
                    }
                    ':' => {
                        if two!(':') {
                            bump!();
                            Tok::ColonColon
                        } else {
                            Tok::Colon
                        }
                    }
                    ';' => Tok::Semi,
                    ',' => Tok::Comma,
                    '.' => Tok::Dot,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    '?' => Tok::Quest,
                    '$' => Tok::Dollar,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    '!' => {
                        if two!('=') {
                            bump!();
                            Tok::Ne
                        } else {
                            Tok::Bang
                        }
                    }
                    '&' => {
                        if two!('&') {
                            bump!();
                            Tok::AndAnd
                        } else {
                            Tok::Amp
                        }
                    }
                    '|' => {
                        if two!('|') {
                            bump!();
                            Tok::OrOr
                        } else {
                            return Err(ParseError::new(
                                pos,
                                ParseErrorKind::Syntax {
                                    expected: "`||`".into(),
                                    found: "`|`".into(),
                                },
                            ));
                        }
                    }
                    '=' => {
                        if two!('>') {
                            bump!();
                            Tok::FatArrow
                        } else if two!('=') {
                            bump!();
                            Tok::Eq
                        } else {
                            Tok::Eq
                        }
                    }
                    '<' => {
                        if two!('=') {
                            bump!();
                            Tok::Le
                        } else if two!('>') {
                            bump!();
                            Tok::Ne
                        } else {
                            Tok::Lt
                        }
                    }
                    '>' => {
                        if two!('=') {
                            bump!();
                            Tok::Ge
                        } else {
                            Tok::Gt
                        }
                    }
                    other => {
                        return Err(ParseError::new(
                            pos,
                            ParseErrorKind::Syntax {
                                expected: "a token".into(),
                                found: format!("`{other}`"),
                            },
                        ))
                    }
                };
                out.push((tok, pos));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_interaction_line() {
        let toks = lex("B1 -> S : s(t:string)[-];").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|(t, _)| t).collect();
        assert!(matches!(kinds[0], Tok::Ident(s) if s == "B1"));
        assert_eq!(kinds[1], &Tok::Arrow);
        assert!(matches!(kinds[8], Tok::Kw(Kw::String)));
        assert_eq!(*kinds.last().unwrap(), &Tok::Eof);
    }

    #[test]
    fn comments_and_positions() {
        let toks = lex("// header\nend").unwrap();
        assert_eq!(toks[0].0, Tok::Kw(Kw::End));
        assert_eq!(toks[0].1.line, 2);
        assert_eq!(toks[0].1.col, 1);
    }

    #[test]
    fn two_char_operators() {
        let toks = lex("&& || => <= >= != :: ->").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|(t, _)| t).collect();
        assert_eq!(
            &kinds[..8],
            &[
                &Tok::AndAnd,
                &Tok::OrOr,
                &Tok::FatArrow,
                &Tok::Le,
                &Tok::Ge,
                &Tok::Ne,
                &Tok::ColonColon,
                &Tok::Arrow
            ]
        );
    }
}
