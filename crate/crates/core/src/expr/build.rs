//! Expression constructors with light constant folding, used when
//! expressions are generated programmatically (derivatives, pullbacks).

use super::{BinOp, Expression, Func};

fn lit(e: &Expression) -> Option<f64> {
    e.as_literal()
}

#[allow(clippy::should_implement_trait, clippy::redundant_guards)]
impl Expression {
    pub fn add(a: Expression, b: Expression) -> Expression {
        match (lit(&a), lit(&b)) {
            (Some(x), Some(y)) => Expression::num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            (_, Some(y)) if y < 0.0 => Expression::Binary(BinOp::Sub, Box::new(a), Box::new(Expression::num(-y))),
            _ => Expression::Binary(BinOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expression, b: Expression) -> Expression {
        match (lit(&a), lit(&b)) {
            (Some(x), Some(y)) => Expression::num(x - y),
            (Some(x), _) if x == 0.0 => Expression::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expression::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expression, b: Expression) -> Expression {
        match (lit(&a), lit(&b)) {
            (Some(x), Some(y)) => Expression::num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expression::Num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            (Some(x), _) if x == -1.0 => Expression::neg(b),
            (_, Some(y)) if y == -1.0 => Expression::neg(a),
            _ => Expression::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expression, b: Expression) -> Expression {
        match (lit(&a), lit(&b)) {
            (Some(x), _) if x == 0.0 => Expression::Num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expression::Binary(BinOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expression) -> Expression {
        match a {
            Expression::Neg(inner) => *inner,
            Expression::Num(v) if v == 0.0 => Expression::Num(0.0),
            other => Expression::Neg(Box::new(other)),
        }
    }

    pub fn powi(a: Expression, exponent: f64) -> Expression {
        if exponent == 0.0 {
            return Expression::Num(1.0);
        }
        if exponent == 1.0 {
            return a;
        }
        Expression::Pow(Box::new(a), Box::new(Expression::num(exponent)))
    }

    pub fn call(func: Func, a: Expression) -> Expression {
        Expression::Call(func, Box::new(a))
    }

    /// Sum of terms, `0` when empty.
    pub fn sum(terms: impl IntoIterator<Item = Expression>) -> Expression {
        terms
            .into_iter()
            .fold(Expression::Num(0.0), Expression::add)
    }
}
