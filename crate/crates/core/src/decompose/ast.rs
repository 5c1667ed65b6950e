//! Source-level syntax of a problem: declarations and equations.

use std::fmt;

use crate::boxes::VarName;
use crate::interval::Interval;

/// A decimal literal as written, with its nearest `f64` and whether that
/// conversion was exact.
#[derive(Debug, Clone, PartialEq)]
pub struct Decimal {
    text: String,
    value: f64,
    exact: bool,
}

impl Decimal {
    /// Parses an unsigned decimal literal (`12`, `0.5`, `1e-3`, `2.5E+2`).
    /// Returns `None` for malformed literals and values that overflow.
    pub fn parse(text: &str) -> Option<Decimal> {
        let key = decimal_key(text)?;
        let value: f64 = text.parse().ok()?;
        if !value.is_finite() {
            return None;
        }
        let exact = decimal_key(&format!("{value:.800e}")) == Some(key);
        Some(Decimal {
            text: text.to_string(),
            value,
            exact,
        })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Round-to-nearest value.
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Whether [`Decimal::value`] equals the literal exactly.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Tightest float interval containing the literal (one ULP either side
    /// of the nearest value when inexact).
    pub fn enclosure(&self) -> Interval {
        if self.exact {
            Interval::point(self.value)
        } else {
            Interval::new(self.value.next_down(), self.value.next_up())
        }
    }
}

/// Canonical `(significant digits, exponent)` of a decimal literal, or `None`
/// if it is not one. Signs are not accepted.
fn decimal_key(text: &str) -> Option<(String, i64)> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => {
            let e = &text[i + 1..];
            let digits = e.strip_prefix(['+', '-']).unwrap_or(e);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            (&text[..i], e.parse::<i64>().ok()?)
        }
        None => (text, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let mut digits: String = int.chars().chain(frac.chars()).collect();
    let mut exp = exp - frac.len() as i64;
    let lead = digits.len() - digits.trim_start_matches('0').len();
    digits.drain(..lead);
    if digits.is_empty() {
        return Some(("0".to_string(), 0));
    }
    while digits.ends_with('0') {
        digits.pop();
        exp += 1;
    }
    Some((digits, exp))
}

/// Arithmetic expression over declared variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Var(VarName),
    Const(Decimal),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Positive integer power.
    Pow(Box<Expr>, u32),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(..) | Expr::Pow(..) => 3,
            Expr::Var(_) | Expr::Const(_) => 4,
        }
    }

    /// Variables in first-occurrence order.
    pub fn variables(&self) -> Vec<VarName> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<VarName>) {
        match self {
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Const(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
    if e.precedence() < min_prec {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Const(d) => f.write_str(d.text()),
            Expr::Add(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" + ")?;
                write_operand(f, b, 2)
            }
            Expr::Sub(a, b) => {
                write_operand(f, a, 1)?;
                f.write_str(" - ")?;
                write_operand(f, b, 2)
            }
            Expr::Mul(a, b) => {
                write_operand(f, a, 2)?;
                f.write_str(" * ")?;
                write_operand(f, b, 3)
            }
            // the grammar only allows `-` in front of an atom or atom^k
            Expr::Neg(a) => {
                f.write_str("-")?;
                match **a {
                    Expr::Var(_) | Expr::Const(_) | Expr::Pow(..) => write!(f, "{a}"),
                    _ => write!(f, "({a})"),
                }
            }
            Expr::Pow(a, k) => {
                write_operand(f, a, 4)?;
                write!(f, "^{k}")
            }
        }
    }
}

/// `lhs = rhs`
#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// A declared bound as written.
#[derive(Debug, Clone, PartialEq)]
pub enum Bound {
    NegInf,
    PosInf,
    Finite { negative: bool, literal: Decimal },
}

impl Bound {
    fn lower(&self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
            Bound::Finite { negative, literal } => {
                let e = literal.enclosure();
                if *negative {
                    -e.hi()
                } else {
                    e.lo()
                }
            }
        }
    }

    fn upper(&self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
            Bound::Finite { negative, literal } => {
                let e = literal.enclosure();
                if *negative {
                    -e.lo()
                } else {
                    e.hi()
                }
            }
        }
    }

    /// Nearest value, used for the inverted-bounds check.
    pub(crate) fn nearest(&self) -> f64 {
        match self {
            Bound::NegInf => f64::NEG_INFINITY,
            Bound::PosInf => f64::INFINITY,
            Bound::Finite { negative, literal } => {
                if *negative {
                    -literal.value()
                } else {
                    literal.value()
                }
            }
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::NegInf => f.write_str("-inf"),
            Bound::PosInf => f.write_str("inf"),
            Bound::Finite { negative, literal } => {
                if *negative {
                    f.write_str("-")?;
                }
                f.write_str(literal.text())
            }
        }
    }
}

/// `var name in [lo, hi];` or `var name;`
#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub name: VarName,
    pub bounds: Option<(Bound, Bound)>,
}

impl Declaration {
    /// Declared domain, widened outward where a literal is inexact.
    pub fn domain(&self) -> Interval {
        match &self.bounds {
            None => Interval::ENTIRE,
            Some((lo, hi)) => Interval::new(lo.lower(), hi.upper()),
        }
    }
}

impl fmt::Display for Declaration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.bounds {
            None => write!(f, "var {};", self.name),
            Some((lo, hi)) => write!(f, "var {} in [{lo}, {hi}];", self.name),
        }
    }
}

/// A parsed problem file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Problem {
    pub declarations: Vec<Declaration>,
    pub equations: Vec<Equation>,
}

impl Problem {
    /// Canonical source text; parsing it yields an equal `Problem`.
    pub fn to_canonical(&self) -> String {
        let mut out = String::new();
        for d in &self.declarations {
            out.push_str(&d.to_string());
            out.push('\n');
        }
        for e in &self.equations {
            out.push_str(&format!("constraint {e};\n"));
        }
        out
    }
}
