use super::{BinOp, Expression, Func};
use crate::error::{Error, Result};

/// Parses `source` into an [`Expression`].
pub fn parse(source: &str) -> Result<Expression> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    if p.at_end() {
        return Err(p.error("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let message = message.into();
        let message = if self.at_end() && !message.contains("end of input") {
            format!("{message} at end of input")
        } else {
            message
        };
        Error::Syntax {
            offset: self.pos,
            message,
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expression> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expression> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expression::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expression> {
        if self.eat(b'-') {
            return Ok(Expression::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expression> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exponent = self.unary()?;
            if !exponent.is_constant() {
                return Err(Error::Syntax {
                    offset: at,
                    message: "exponent must be a constant expression".into(),
                });
            }
            return Ok(Expression::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expression> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.error("expected operand at end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expression> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while matches!(p.peek(), Some(c) if c.is_ascii_digit()) {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        if !value.is_finite() {
            return Err(Error::Syntax {
                offset: start,
                message: format!("number `{text}` overflows"),
            });
        }
        Ok(Expression::Num(value))
    }

    fn identifier(&mut self) -> Result<Expression> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        self.skip_ws();
        if self.peek() == Some(b'(') {
            let func = Func::from_name(name).ok_or_else(|| Error::UnknownIdentifier {
                name: name.to_string(),
                offset: start,
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.error("expected `)`"));
            }
            return Ok(Expression::Call(func, Box::new(arg)));
        }
        if Func::from_name(name).is_some() {
            return Err(Error::Syntax {
                offset: self.pos,
                message: format!("function `{name}` requires `(`"),
            });
        }
        Ok(match name {
            "pi" => Expression::Pi,
            _ => Expression::Var(name.to_string()),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::BinOp::*;

    fn b(e: Expression) -> Box<Expression> {
        Box::new(e)
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse("x").unwrap(), Expression::var("x"));
    }

    #[test]
    fn profile_function_tree() {
        let e = parse("2 + 0.5*cos(2*pi*x)").unwrap();
        let inner = Expression::Binary(
            Mul,
            b(Expression::Binary(Mul, b(Expression::Num(2.0)), b(Expression::Pi))),
            b(Expression::var("x")),
        );
        let expected = Expression::Binary(
            Add,
            b(Expression::Num(2.0)),
            b(Expression::Binary(
                Mul,
                b(Expression::Num(0.5)),
                b(Expression::Call(Func::Cos, b(inner))),
            )),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn unbalanced_call_errors_at_end() {
        let src = "2 + 0.5*cos(2*pi*";
        match parse(src) {
            Err(Error::Syntax { offset, message }) => {
                assert_eq!(offset, src.len());
                assert!(message.contains("end of input"), "{message}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_function() {
        assert!(matches!(
            parse("1 + foo(x)"),
            Err(Error::UnknownIdentifier { offset: 4, .. })
        ));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("-x^2").unwrap(), Expression::Neg(b(parse("x^2").unwrap())));
        assert_eq!(parse("a-b-c").unwrap(), parse("(a-b)-c").unwrap());
        assert_eq!(parse("a/b/c").unwrap(), parse("(a/b)/c").unwrap());
        assert_eq!(parse("2^3^2").unwrap(), parse("2^(3^2)").unwrap());
        assert_eq!(parse("a+b*c").unwrap(), parse("a+(b*c)").unwrap());
        assert_eq!(parse("-a*b").unwrap(), parse("(-a)*b").unwrap());
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expression::Num(1.5e-3));
        assert_eq!(parse(".25").unwrap(), Expression::Num(0.25));
    }

    #[test]
    fn rejects_variable_exponent_and_garbage() {
        assert!(matches!(parse("x^y"), Err(Error::Syntax { .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
        assert!(matches!(parse("1 +"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("(x"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x y"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("sin x"), Err(Error::Syntax { .. })));
    }
}
