//! Symbolic first derivatives and variable substitution.
//!
//! These are used to materialize pullback metrics and composed maps as
//! ordinary expressions, so that every field in the crate can be
//! differentiated with first-order dual numbers alone.

use std::collections::HashMap;

use super::{BinOp, Expression, Func};

impl Expression {
    /// Partial derivative with respect to `var`.
    pub fn derivative(&self, var: &str) -> Expression {
        use Expression as E;
        match self {
            E::Num(_) | E::Pi => E::Num(0.0),
            E::Var(v) => E::Num(if v == var { 1.0 } else { 0.0 }),
            E::Neg(a) => E::neg(a.derivative(var)),
            E::Binary(op, a, b) => {
                let (da, db) = (a.derivative(var), b.derivative(var));
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => E::add(da, db),
                    BinOp::Sub => E::sub(da, db),
                    BinOp::Mul => E::add(E::mul(da, b), E::mul(a, db)),
                    BinOp::Div => {
                        // a'/b - a*b'/b^2
                        let second = E::div(E::mul(a, db), E::mul(b.clone(), b.clone()));
                        E::sub(E::div(da, b), second)
                    }
                }
            }
            E::Pow(a, e) => {
                let da = a.derivative(var);
                if da.as_literal() == Some(0.0) {
                    return E::Num(0.0);
                }
                let exponent = e.constant_value().expect("constant exponent");
                let outer = E::mul(E::num(exponent), E::powi(a.as_ref().clone(), exponent - 1.0));
                E::mul(outer, da)
            }
            E::Call(func, a) => {
                let da = a.derivative(var);
                if da.as_literal() == Some(0.0) {
                    return E::Num(0.0);
                }
                let a = a.as_ref().clone();
                let outer = match func {
                    Func::Sin => E::call(Func::Cos, a),
                    Func::Cos => E::neg(E::call(Func::Sin, a)),
                    Func::Exp => E::call(Func::Exp, a),
                    Func::Log => return E::div(da, a),
                    Func::Sqrt => {
                        return E::div(da, E::mul(E::Num(2.0), E::call(Func::Sqrt, a)))
                    }
                    // Undefined at the kink, where evaluation reports division by zero.
                    Func::Abs => E::div(a.clone(), E::call(Func::Abs, a)),
                };
                E::mul(outer, da)
            }
        }
    }

    /// Replaces free variables by expressions, simultaneously.
    pub fn substitute(&self, map: &HashMap<String, Expression>) -> Expression {
        use Expression as E;
        match self {
            E::Num(_) | E::Pi => self.clone(),
            E::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            E::Neg(a) => E::Neg(Box::new(a.substitute(map))),
            E::Binary(op, a, b) => E::Binary(*op, Box::new(a.substitute(map)), Box::new(b.substitute(map))),
            E::Pow(a, e) => E::Pow(Box::new(a.substitute(map)), e.clone()),
            E::Call(f, a) => E::Call(*f, Box::new(a.substitute(map))),
        }
    }
}
