//! Recursive-descent parser for the problem language.
//!
//! ```text
//! problem   := (decl | cons)* ;
//! decl      := "var" IDENT "in" "[" BOUND "," BOUND "]" ";" | "var" IDENT ";"
//! cons      := "constraint" expr "=" expr ";"
//! expr      := term (("+"|"-") term)*
//! term      := factor ("*" factor)*
//! factor    := ("-")? atom ("^" INT)?
//! atom      := IDENT | NUM | "(" expr ")"
//! ```
//!
//! `#` starts a comment running to the end of the line.

use std::collections::BTreeSet;

use thiserror::Error;

use super::ast::{Bound, Decimal, Declaration, Equation, Expr, Problem};
use crate::boxes::VarName;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(String),
    Var,
    In,
    Constraint,
    Inf,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Plus,
    Minus,
    Star,
    Caret,
    Le,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Var => "`var`".into(),
            Tok::In => "`in`".into(),
            Tok::Constraint => "`constraint`".into(),
            Tok::Inf => "`inf`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let err = |message: String| ParseError {
            line: tline,
            column: tcol,
            message,
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "var" => Tok::Var,
                "in" => Tok::In,
                "constraint" => Tok::Constraint,
                "inf" => Tok::Inf,
                _ => Tok::Ident(word),
            }
        } else if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            Tok::Num(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '^' => Tok::Caret,
                '<' if chars.get(i) == Some(&'=') => {
                    i += 1;
                    Tok::Le
                }
                other => return Err(err(format!("unexpected character `{other}`"))),
            }
        };
        col += i - start;
        out.push(Token {
            tok,
            line: tline,
            column: tcol,
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    declared: BTreeSet<VarName>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_at(t: &Token, message: impl Into<String>) -> ParseError {
        ParseError {
            line: t.line,
            column: t.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == want {
            Ok(t)
        } else {
            Err(Self::error_at(
                &t,
                format!("expected {}, found {}", want.describe(), t.tok.describe()),
            ))
        }
    }

    fn problem(&mut self) -> Result<Problem, ParseError> {
        let mut problem = Problem::default();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Eof => return Ok(problem),
                Tok::Var => problem.declarations.push(self.declaration()?),
                Tok::Constraint => problem.equations.push(self.constraint()?),
                other => {
                    return Err(Self::error_at(
                        &t,
                        format!("expected `var` or `constraint`, found {}", other.describe()),
                    ))
                }
            }
        }
    }

    fn declaration(&mut self) -> Result<Declaration, ParseError> {
        self.expect(Tok::Var)?;
        let t = self.next();
        let name = match &t.tok {
            Tok::Ident(s) if s.starts_with('_') => {
                return Err(Self::error_at(
                    &t,
                    format!("identifier `{s}` uses the reserved `_` prefix"),
                ))
            }
            Tok::Ident(s) => {
                VarName::new(s.clone()).map_err(|e| Self::error_at(&t, e.to_string()))?
            }
            other => {
                return Err(Self::error_at(
                    &t,
                    format!("expected variable name, found {}", other.describe()),
                ))
            }
        };
        if self.declared.contains(&name) {
            return Err(Self::error_at(
                &t,
                format!("variable `{name}` declared twice"),
            ));
        }
        let bounds = if self.peek().tok == Tok::In {
            self.next();
            let open = self.expect(Tok::LBracket)?;
            let lo = self.bound()?;
            self.expect(Tok::Comma)?;
            let hi = self.bound()?;
            self.expect(Tok::RBracket)?;
            if lo == Bound::PosInf || hi == Bound::NegInf || lo.nearest() > hi.nearest() {
                return Err(Self::error_at(
                    &open,
                    format!("empty interval [{lo}, {hi}] for `{name}`"),
                ));
            }
            Some((lo, hi))
        } else {
            None
        };
        self.expect(Tok::Semi)?;
        self.declared.insert(name.clone());
        Ok(Declaration { name, bounds })
    }

    fn bound(&mut self) -> Result<Bound, ParseError> {
        let negative = if self.peek().tok == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let t = self.next();
        match &t.tok {
            Tok::Inf => Ok(if negative {
                Bound::NegInf
            } else {
                Bound::PosInf
            }),
            Tok::Num(s) => {
                let literal = Decimal::parse(s)
                    .ok_or_else(|| Self::error_at(&t, format!("malformed number `{s}`")))?;
                Ok(Bound::Finite { negative, literal })
            }
            other => Err(Self::error_at(
                &t,
                format!(
                    "malformed interval: expected a bound, found {}",
                    other.describe()
                ),
            )),
        }
    }

    fn constraint(&mut self) -> Result<Equation, ParseError> {
        self.expect(Tok::Constraint)?;
        let lhs = self.expr()?;
        let t = self.next();
        match &t.tok {
            Tok::Eq => {}
            Tok::Le => {
                return Err(Self::error_at(
                    &t,
                    "inequality constraints are not supported",
                ))
            }
            other => {
                return Err(Self::error_at(
                    &t,
                    format!("expected `=`, found {}", other.describe()),
                ))
            }
        }
        let rhs = self.expr()?;
        self.expect(Tok::Semi)?;
        Ok(Equation { lhs, rhs })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.next();
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.next();
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        while self.peek().tok == Tok::Star {
            self.next();
            acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let negate = if self.peek().tok == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let mut e = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            let t = self.next();
            let k = match &t.tok {
                Tok::Num(s) if s.bytes().all(|b| b.is_ascii_digit()) => {
                    s.parse::<u32>().ok().filter(|&k| k >= 1).ok_or_else(|| {
                        Self::error_at(
                            &t,
                            format!("exponent must be a positive integer, found `{s}`"),
                        )
                    })?
                }
                Tok::Num(s) => {
                    return Err(Self::error_at(&t, format!("non-integer exponent `{s}`")))
                }
                other => {
                    return Err(Self::error_at(
                        &t,
                        format!("expected integer exponent, found {}", other.describe()),
                    ))
                }
            };
            e = Expr::Pow(Box::new(e), k);
        }
        Ok(if negate { Expr::Neg(Box::new(e)) } else { e })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => {
                let name =
                    VarName::new(s.clone()).map_err(|e| Self::error_at(&t, e.to_string()))?;
                if !self.declared.contains(&name) {
                    return Err(Self::error_at(&t, format!("unknown identifier `{s}`")));
                }
                Ok(Expr::Var(name))
            }
            Tok::Num(s) => Decimal::parse(s)
                .map(Expr::Const)
                .ok_or_else(|| Self::error_at(&t, format!("malformed number `{s}`"))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(Self::error_at(
                &t,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}

/// Parses problem text into declarations and equations.
pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let tokens = lex(text)?;
    Parser {
        tokens,
        pos: 0,
        declared: BTreeSet::new(),
    }
    .problem()
}
