//! Arithmetic expressions in `x` and `y` for right-hand sides, boundary data
//! and coefficients.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("-" | "+") unary | power ;
//! power   = primary [ "^" unary ] ;
//! primary = number | "x" | "y" | "pi" | "e" | func "(" expr ")" | "(" expr ")" ;
//! func    = "sin" | "cos" | "exp" | "log" | "sqrt" | "abs" ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^3^2` is `512`.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Some(match s {
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

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Const(Constant::Pi) => std::f64::consts::PI,
            Expr::Const(Constant::E) => std::f64::consts::E,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Neg(a) => -a.eval(x, y)?,
            Expr::Bin(op, a, b) => {
                let (u, v) = (a.eval(x, y)?, b.eval(x, y)?);
                match op {
                    BinOp::Add => u + v,
                    BinOp::Sub => u - v,
                    BinOp::Mul => u * v,
                    BinOp::Div => u / v,
                    BinOp::Pow => {
                        let r = u.powf(v);
                        if r.is_nan() && !u.is_nan() && !v.is_nan() {
                            return Err(Error::Domain {
                                expr: self.to_string(),
                                arg: u,
                            });
                        }
                        r
                    }
                }
            }
            Expr::Call(f, a) => {
                let u = a.eval(x, y)?;
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Exp => u.exp(),
                    Func::Abs => u.abs(),
                    Func::Log | Func::Sqrt => {
                        let bad = if *f == Func::Log { u <= 0.0 } else { u < 0.0 };
                        if bad {
                            return Err(Error::Domain {
                                expr: self.to_string(),
                                arg: u,
                            });
                        }
                        if *f == Func::Log {
                            u.ln()
                        } else {
                            u.sqrt()
                        }
                    }
                }
            }
        })
    }

    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Var(w) => *w == v,
            Expr::Num(_) | Expr::Const(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(v),
            Expr::Bin(_, a, b) => a.uses(v) || b.uses(v),
        }
    }

    /// True for a literal zero (possibly negated).
    pub fn is_zero(&self) -> bool {
        match self {
            Expr::Num(v) => *v == 0.0,
            Expr::Neg(a) => a.is_zero(),
            _ => false,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Const(Constant::Pi) => write!(f, "pi"),
            Expr::Const(Constant::E) => write!(f, "e"),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;
    fn from_str(s: &str) -> Result<Expr> {
        parse(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    /// Next token and its starting byte offset.
    fn next(&mut self) -> Result<(Tok, usize)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || c == '.' {
            let bytes = rest.as_bytes();
            let mut i = 0;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut k = i + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    i = k;
                }
            }
            let text = &rest[..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            self.pos += i;
            return Ok((Tok::Num(v), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(rest.len());
            self.pos += len;
            return Ok((Tok::Ident(rest[..len].to_string()), start));
        }
        self.pos += c.len_utf8();
        match c {
            '+' | '-' | '*' | '/' | '^' => Ok((Tok::Op(c), start)),
            '(' => Ok((Tok::LParen, start)),
            ')' => Ok((Tok::RParen, start)),
            _ => Err(Error::Syntax {
                offset: start,
                message: format!("unexpected character '{c}'"),
            }),
        }
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<()> {
        let (t, at) = self.lex.next()?;
        self.tok = t;
        self.at = at;
        Ok(())
    }

    fn expect_err(&self, what: &str) -> Error {
        let found = match &self.tok {
            Tok::End => "end of input".to_string(),
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Op(c) => format!("'{c}'"),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
        };
        Error::Syntax {
            offset: self.at,
            message: format!("expected {what}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Tok::Op(c @ ('+' | '-')) = self.tok {
            self.bump()?;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = self.tok {
            self.bump()?;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.tok {
            Tok::Op('-') => {
                self.bump()?;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Op('+') => {
                self.bump()?;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.tok == Tok::Op('^') {
            self.bump()?;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.expect_err("')'"));
                }
                self.bump()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                match name.as_str() {
                    "x" => return Ok(Expr::Var(Var::X)),
                    "y" => return Ok(Expr::Var(Var::Y)),
                    "pi" => return Ok(Expr::Const(Constant::Pi)),
                    "e" => return Ok(Expr::Const(Constant::E)),
                    _ => {}
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::UnknownIdentifier { offset: at, name });
                };
                if self.tok != Tok::LParen {
                    return Err(self.expect_err("'(' after function name"));
                }
                self.bump()?;
                let arg = self.expr()?;
                if self.tok != Tok::RParen {
                    return Err(self.expect_err("')'"));
                }
                self.bump()?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.expect_err("a number, variable, function or '('")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        lex: Lexer { src, pos: 0 },
        tok: Tok::End,
        at: 0,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return Err(p.expect_err("end of input"));
    }
    Ok(e)
}

/// Evaluate `e` at `(x, y)`.
pub fn eval(e: &Expr, x: f64, y: f64) -> Result<f64> {
    e.eval(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const EX1: &str = "-100*x*sin(20*pi*x^2*y)*cos(4*pi*(x+y))";
    const EX2_SOL: &str = "10*exp(2*x)*cos(2*y)";
    const EX3_COEF: &str = "-100*x^2 + cos(pi*y)";

    #[test]
    fn ex1_matches_closure() {
        let e = parse(EX1).unwrap();
        let f = |x: f64, y: f64| -100.0 * x * (20.0 * PI * x * x * y).sin() * (4.0 * PI * (x + y)).cos();
        assert_eq!(e.eval(0.5, 0.5).unwrap(), f(0.5, 0.5));
    }

    #[test]
    fn precedence_rules() {
        assert_eq!(parse("2^3^2").unwrap().eval(0.0, 0.0).unwrap(), 512.0);
        assert_eq!(parse("-x^2").unwrap().eval(3.0, 0.0).unwrap(), -9.0);
        assert_eq!(parse("2^-1").unwrap().eval(0.0, 0.0).unwrap(), 0.5);
        assert_eq!(parse("1 - 2 - 3").unwrap().eval(0.0, 0.0).unwrap(), -4.0);
        assert_eq!(parse("8 / 2 / 2").unwrap().eval(0.0, 0.0).unwrap(), 2.0);
        assert_eq!(parse("2 + 3 * 4").unwrap().eval(0.0, 0.0).unwrap(), 14.0);
        assert_eq!(parse(" ( 2+3 )*4 ").unwrap().eval(0.0, 0.0).unwrap(), 20.0);
        assert_eq!(parse("1.5e2 + .5").unwrap().eval(0.0, 0.0).unwrap(), 150.5);
        assert_eq!(parse("e").unwrap().eval(0.0, 0.0).unwrap(), std::f64::consts::E);
        assert_eq!(parse("2*e^x").unwrap().eval(0.0, 0.0).unwrap(), 2.0);
    }

    #[test]
    fn syntax_errors() {
        match parse("sin(x").unwrap_err() {
            Error::Syntax { offset, message } => {
                assert_eq!(offset, 5);
                assert!(message.contains("end of input"));
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(parse("x +"), Err(Error::Syntax { offset: 3, .. })));
        assert!(matches!(parse("x $ y"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x y"), Err(Error::Syntax { offset: 2, .. })));
        assert_eq!(
            parse("2*tan(x)").unwrap_err(),
            Error::UnknownIdentifier { offset: 2, name: "tan".into() }
        );
        assert!(matches!(parse("sin x"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn evaluation_examples() {
        assert_eq!(parse("x*y").unwrap().eval(0.5, -0.25).unwrap(), -0.125);
        assert_eq!(parse(EX2_SOL).unwrap().eval(0.0, 0.0).unwrap(), 10.0);
        match parse("sqrt(-1+x)").unwrap().eval(0.0, 0.0).unwrap_err() {
            Error::Domain { expr, arg } => {
                assert_eq!(expr, "sqrt(((-1) + x))");
                assert_eq!(arg, -1.0);
            }
            e => panic!("{e:?}"),
        }
        assert!(parse("log(x)").unwrap().eval(0.0, 0.0).is_err());
        assert!(parse("(-8)^(1/3)").unwrap().eval(0.0, 0.0).is_err());
    }

    #[test]
    fn uses_and_zero() {
        let e = parse(EX3_COEF).unwrap();
        assert!(e.uses(Var::X) && e.uses(Var::Y));
        assert!(!parse("cos(pi*y)").unwrap().uses(Var::X));
        assert!(parse("0").unwrap().is_zero());
        assert!(parse("-0.0").unwrap().is_zero());
        assert!(!parse("x*0").unwrap().is_zero());
    }

    /// Reference values computed independently with a separate evaluator.
    #[test]
    fn table_of_paper_expressions() {
        let pts = [
            (0.5, 0.5),
            (-0.3, 0.7),
            (0.9, -0.1),
            (0.0, 0.0),
            (0.31, -0.82),
            (-0.75, -0.25),
            (0.123, 0.456),
        ];
        #[rustfmt::skip]
        let table: [(&str, [f64; 7]); 3] = [
            (EX1, [
                -50.0,
                -6.757910827181852,
                67.69844802484323,
                0.0,
                -29.882159650360478,
                -41.66776747647017,
                -2.822798689973811,
            ]),
            (EX2_SOL, [
                14.686939399158852,
                0.9327994577730847,
                59.29057287593141,
                10.0,
                -1.285419902532077,
                1.9581513757806819,
                7.828982168007272,
            ]),
            (EX3_COEF, [
                -25.0,
                -9.587785252292472,
                -80.04894348370485,
                1.0,
                -10.454327925502016,
                -55.542893218813454,
                -1.375109709315362,
            ]),
        ];
        for (src, vals) in table {
            let e = parse(src).unwrap();
            for (&(x, y), v) in pts.iter().zip(vals) {
                let got = e.eval(x, y).unwrap();
                assert!((got - v).abs() <= 1e-14 * v.abs().max(1.0), "{src} at ({x},{y}): {got} vs {v}");
            }
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..1e3).prop_map(Expr::Num),
            Just(Expr::Var(Var::X)),
            Just(Expr::Var(Var::Y)),
            Just(Expr::Const(Constant::Pi)),
            Just(Expr::Const(Constant::E)),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            let op = prop_oneof![
                Just(BinOp::Add),
                Just(BinOp::Sub),
                Just(BinOp::Mul),
                Just(BinOp::Div),
                Just(BinOp::Pow),
            ];
            let func = prop_oneof![
                Just(Func::Sin),
                Just(Func::Cos),
                Just(Func::Exp),
                Just(Func::Log),
                Just(Func::Sqrt),
                Just(Func::Abs),
            ];
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (op, inner.clone(), inner.clone())
                    .prop_map(|(o, a, b)| Expr::Bin(o, Box::new(a), Box::new(b))),
                (func, inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn prop_print_parse_idempotent(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e);
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}
