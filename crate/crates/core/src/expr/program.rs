use std::collections::HashMap;

use super::{BinOp, Expression, Func};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Debug, PartialEq)]
enum Op {
    Const(f64),
    Var(usize),
    Neg,
    Bin(BinOp),
    /// Constant exponent, already folded.
    Pow(f64),
    Call(Func),
}

/// An expression compiled against an ordered list of variable names into a
/// postfix program. Evaluation is pure, so a `Program` can be shared freely.
#[derive(Clone, Debug, PartialEq)]
pub struct Program {
    ops: Vec<Op>,
    arity: usize,
    max_stack: usize,
}

impl Program {
    /// Compiles `expr`; each variable must appear in `vars`.
    pub fn compile<S: AsRef<str>>(expr: &Expression, vars: &[S]) -> Result<Program> {
        let mut ops = Vec::new();
        emit(expr, vars, &mut ops)?;
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) => depth += 1,
                Op::Bin(_) => depth -= 1,
                _ => {}
            }
            max_stack = max_stack.max(depth);
        }
        Ok(Program {
            ops,
            arity: vars.len(),
            max_stack,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Plain real evaluation.
    pub fn eval<T: Real>(&self, args: &[T]) -> Result<T> {
        let duals: Vec<Dual<T>> = args.iter().map(|&a| Dual::constant(a, 0)).collect();
        Ok(self.eval_dual(&duals)?.value())
    }

    /// Evaluates value and partials together.
    pub fn eval_dual<T: Real>(&self, args: &[Dual<T>]) -> Result<Dual<T>> {
        if args.len() != self.arity {
            return Err(Error::Dimension {
                expected: self.arity,
                got: args.len(),
            });
        }
        let width = args.iter().map(Dual::width).max().unwrap_or(0);
        let mut stack: Vec<Dual<T>> = Vec::with_capacity(self.max_stack);
        for op in &self.ops {
            match op {
                Op::Const(c) => stack.push(Dual::constant(T::lit(*c), width)),
                Op::Var(i) => stack.push(args[*i]),
                Op::Neg => {
                    let a = stack.pop().expect("stack");
                    stack.push(-a);
                }
                Op::Bin(bin) => {
                    let b = stack.pop().expect("stack");
                    let a = stack.pop().expect("stack");
                    stack.push(match bin {
                        BinOp::Add => a + b,
                        BinOp::Sub => a - b,
                        BinOp::Mul => a * b,
                        BinOp::Div => {
                            if b.value() == T::zero() {
                                return Err(Error::Domain(format!(
                                    "division by zero ({} / 0)",
                                    a.value()
                                )));
                            }
                            a / b
                        }
                    });
                }
                Op::Pow(e) => {
                    let a = stack.pop().expect("stack");
                    stack.push(pow(a, *e)?);
                }
                Op::Call(func) => {
                    let a = stack.pop().expect("stack");
                    stack.push(call(*func, a)?);
                }
            }
        }
        let out = stack.pop().expect("program leaves one value");
        if !out.is_finite() {
            return Err(Error::NonFinite(format!(
                "expression evaluated to {}",
                out.value()
            )));
        }
        Ok(out)
    }
}

fn pow<T: Real>(a: Dual<T>, e: f64) -> Result<Dual<T>> {
    let v = a.value();
    let integral = e.fract() == 0.0;
    if v < T::zero() && !integral {
        return Err(Error::Domain(format!("{v}^{e} with non-integer exponent")));
    }
    if v == T::zero() && e < 0.0 {
        return Err(Error::Domain(format!("0^{e}")));
    }
    if integral && e.abs() <= 64.0 {
        // Exact repeated multiplication keeps negative bases well defined.
        let n = e.abs() as u32;
        let mut acc = Dual::constant(T::one(), a.width());
        for _ in 0..n {
            acc = acc * a;
        }
        if e < 0.0 {
            acc = Dual::constant(T::one(), a.width()) / acc;
        }
        return Ok(acc);
    }
    Ok(a.powf(T::lit(e)))
}

fn call<T: Real>(func: Func, a: Dual<T>) -> Result<Dual<T>> {
    let v = a.value();
    Ok(match func {
        Func::Sin => a.sin(),
        Func::Cos => a.cos(),
        Func::Exp => a.exp(),
        Func::Abs => a.abs(),
        Func::Log => {
            if v <= T::zero() {
                return Err(Error::Domain(format!("log of nonpositive value {v}")));
            }
            a.ln()
        }
        Func::Sqrt => {
            if v <= T::zero() {
                return Err(Error::Domain(format!("sqrt of nonpositive value {v}")));
            }
            a.sqrt()
        }
    })
}

fn emit<S: AsRef<str>>(expr: &Expression, vars: &[S], ops: &mut Vec<Op>) -> Result<()> {
    match expr {
        Expression::Num(v) => ops.push(Op::Const(*v)),
        Expression::Pi => ops.push(Op::Const(std::f64::consts::PI)),
        Expression::Var(name) => {
            let idx = vars
                .iter()
                .position(|v| v.as_ref() == name)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            ops.push(Op::Var(idx));
        }
        Expression::Neg(a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Neg);
        }
        Expression::Binary(op, a, b) => {
            emit(a, vars, ops)?;
            emit(b, vars, ops)?;
            ops.push(Op::Bin(*op));
        }
        Expression::Pow(a, e) => {
            let exponent = e
                .constant_value()
                .ok_or_else(|| Error::Domain(format!("exponent `{e}` is not a finite constant")))?;
            emit(a, vars, ops)?;
            ops.push(Op::Pow(exponent));
        }
        Expression::Call(func, a) => {
            emit(a, vars, ops)?;
            ops.push(Op::Call(*func));
        }
    }
    Ok(())
}

/// Evaluates `expr` with named dual bindings; every free variable must be bound.
pub fn eval_dual<T: Real>(
    expr: &Expression,
    bindings: &HashMap<String, Dual<T>>,
) -> Result<Dual<T>> {
    let names: Vec<&String> = bindings.keys().collect();
    let program = Program::compile(expr, &names)?;
    let args: Vec<Dual<T>> = names.iter().map(|n| bindings[*n]).collect();
    program.eval_dual(&args)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn bind(x: f64) -> HashMap<String, Dual<f64>> {
        HashMap::from([("x".to_string(), Dual::variable(x, 0, 1))])
    }

    #[test]
    fn identity_function() {
        let d = eval_dual(&parse("x").unwrap(), &bind(3.0)).unwrap();
        assert_eq!((d.value(), d.partial(0)), (3.0, 1.0));
    }

    #[test]
    fn profile_at_zero_and_quarter() {
        let e = parse("2+0.5*cos(2*pi*x)").unwrap();
        let d = eval_dual(&e, &bind(0.0)).unwrap();
        assert_eq!(d.value(), 2.5);
        assert_eq!(d.partial(0), 0.0);
        let d = eval_dual(&e, &bind(0.25)).unwrap();
        assert!((d.value() - 2.0).abs() < 1e-15);
        assert!((d.partial(0) + PI).abs() < 1e-12);
    }

    #[test]
    fn unbound_and_domain_errors() {
        let e = parse("x + y").unwrap();
        assert!(matches!(eval_dual(&e, &bind(1.0)), Err(Error::UnboundVariable(v)) if v == "y"));
        assert!(matches!(eval_dual(&parse("log(x)").unwrap(), &bind(0.0)), Err(Error::Domain(_))));
        assert!(matches!(eval_dual(&parse("sqrt(x)").unwrap(), &bind(-1.0)), Err(Error::Domain(_))));
        assert!(matches!(eval_dual(&parse("1/x").unwrap(), &bind(0.0)), Err(Error::Domain(_))));
        assert!(matches!(eval_dual(&parse("x^0.5").unwrap(), &bind(-2.0)), Err(Error::Domain(_))));
        assert!(matches!(eval_dual(&parse("exp(x)").unwrap(), &bind(1e4)), Err(Error::NonFinite(_))));
    }

    #[test]
    fn integer_powers_of_negative_base() {
        let p = Program::compile(&parse("x^3 + x^-2").unwrap(), &["x"]).unwrap();
        let d = p.eval_dual(&[Dual::variable(-2.0_f64, 0, 1)]).unwrap();
        assert!((d.value() - (-8.0 + 0.25)).abs() < 1e-15);
        assert!((d.partial(0) - (12.0 + 0.25)).abs() < 1e-14);
    }

    #[test]
    fn single_precision_evaluation() {
        let p = Program::compile(&parse("2+0.5*cos(2*pi*x)").unwrap(), &["x"]).unwrap();
        let v: f32 = p.eval(&[0.5f32]).unwrap();
        assert!((v - 1.5).abs() < 1e-6);
    }

    const SUITE: &[&str] = &[
        "2 + 0.5*cos(2*pi*x)",
        "sin(x)*exp(y) - x^3/y",
        "log(1 + x*x + y*y)",
        "sqrt(2 + sin(x*y))",
        "abs(x - 10)*cos(y)^2",
        "(x + y)^-1.5*exp(-x)",
        "(2 + sin(2*pi*x) - 1/(2 + cos(2*pi*y)))*(x - y/3)",
    ];

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn dual_matches_central_differences(idx in 0..SUITE.len(), x in 0.1..2.0f64, y in 0.1..2.0f64) {
            let p = Program::compile(&parse(SUITE[idx]).unwrap(), &["x", "y"]).unwrap();
            let d = p.eval_dual(&[Dual::variable(x, 0, 2), Dual::variable(y, 1, 2)]).unwrap();
            let h = 1e-6;
            for slot in 0..2 {
                let mut hi = [x, y];
                let mut lo = [x, y];
                hi[slot] += h;
                lo[slot] -= h;
                let fd = (p.eval(&hi).unwrap() - p.eval(&lo).unwrap()) / (2.0 * h);
                let ad = d.partial(slot);
                let scale = ad.abs().max(1.0);
                prop_assert!((fd - ad).abs() <= 1e-6 * scale, "{} slot {}: fd {} ad {}", SUITE[idx], slot, fd, ad);
            }
        }
    }
}
