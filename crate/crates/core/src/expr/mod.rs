//! Closed-form scalar expressions.
//!
//! Grammar (EBNF), whitespace-insensitive:
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = "-" unary | power ;
//! power   = primary [ "^" unary ] ;          (* exponent must be constant *)
//! primary = number | "pi" | ident | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" ;
//! number  = digit { digit } [ "." { digit } ] [ ("e" | "E") [ "+" | "-" ] digit { digit } ] ;
//! ident   = letter { letter | digit | "_" } ;
//! ```
//!
//! Precedence from tightest: `^` (right associative), unary `-`, `* /`,
//! `+ -` (left associative). `log` is the natural logarithm.

mod build;
mod diff;
mod parse;
mod profile;
mod program;

use std::collections::BTreeSet;
use std::fmt;

pub use parse::parse;
pub use profile::{validate_profile, ProfileOptions, ProfileViolation};
pub use program::{eval_dual, Program};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

/// Abstract syntax tree of a scalar expression.
///
/// Numeric literals are finite and nonnegative; negative constants are
/// represented as `Neg(Num(..))` so printing and re-parsing is lossless.
#[derive(Clone, Debug, PartialEq)]
pub enum Expression {
    Num(f64),
    Pi,
    Var(String),
    Neg(Box<Expression>),
    Binary(BinOp, Box<Expression>, Box<Expression>),
    /// Base raised to a constant exponent.
    Pow(Box<Expression>, Box<Expression>),
    Call(Func, Box<Expression>),
}

impl Expression {
    pub fn var(name: &str) -> Self {
        Expression::Var(name.to_string())
    }

    /// A literal; negative values are wrapped in `Neg`.
    pub fn num(value: f64) -> Self {
        assert!(value.is_finite(), "non-finite literal {value}");
        if value < 0.0 {
            Expression::Neg(Box::new(Expression::Num(-value)))
        } else {
            Expression::Num(value)
        }
    }

    /// Collects the free variable names.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expression::Num(_) | Expression::Pi => {}
            Expression::Var(v) => {
                out.insert(v.clone());
            }
            Expression::Neg(a) | Expression::Call(_, a) => a.collect_vars(out),
            Expression::Binary(_, a, b) | Expression::Pow(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        self.variables().is_empty()
    }

    /// Value of a variable-free expression.
    pub fn constant_value(&self) -> Option<f64> {
        if !self.is_constant() {
            return None;
        }
        Program::compile::<&str>(self, &[])
            .ok()?
            .eval::<f64>(&[])
            .ok()
    }

    /// Literal value when the node is a (possibly negated) number.
    pub(crate) fn as_literal(&self) -> Option<f64> {
        match self {
            Expression::Num(v) => Some(*v),
            Expression::Neg(a) => match a.as_ref() {
                Expression::Num(v) => Some(-*v),
                _ => None,
            },
            _ => None,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expression::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expression::Neg(_) => 3,
            Expression::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expression, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Num(v) => write!(f, "{v}"),
            Expression::Pi => f.write_str("pi"),
            Expression::Var(v) => f.write_str(v),
            Expression::Neg(a) => {
                f.write_str("-")?;
                write_child(f, a, a.precedence() < 3)
            }
            Expression::Binary(op, a, b) => {
                let p = self.precedence();
                write_child(f, a, a.precedence() < p)?;
                f.write_str(match op {
                    BinOp::Add => " + ",
                    BinOp::Sub => " - ",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                })?;
                write_child(f, b, b.precedence() <= p)
            }
            Expression::Pow(a, b) => {
                write_child(f, a, a.precedence() < 5)?;
                f.write_str("^")?;
                write_child(f, b, b.precedence() < 3)
            }
            Expression::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expression {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

impl serde::Serialize for Expression {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expression {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse(&s).map_err(serde::de::Error::custom)
    }
}
