//! Arithmetic expressions in the single variable `t`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 't' | 'pi' | 'e' | func '(' sum ')' | '(' sum ')'
//! func    := sin | cos | exp | log | sqrt
//! ```
//!
//! Unary minus binds looser than `^`, so `-2^2` is `-(2^2) = -4`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("unexpected character '{ch}' at position {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected {found} at position {pos}, expected {expected}")]
    UnexpectedToken {
        found: String,
        expected: &'static str,
        pos: usize,
    },
    #[error("malformed number '{text}' at position {pos}")]
    BadNumber { text: String, pos: usize },
    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { name: String, pos: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in '{node}' at t = {t}")]
    DivisionByZero { node: String, t: f64 },
    #[error("log of non-positive value in '{node}' at t = {t}")]
    LogDomain { node: String, t: f64 },
    #[error("sqrt of negative value in '{node}' at t = {t}")]
    SqrtDomain { node: String, t: f64 },
    #[error("non-finite result in '{node}' at t = {t}")]
    NonFinite { node: String, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => 1,
            BinaryOp::Mul | BinaryOp::Div => 2,
            BinaryOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Function {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "exp" => Function::Exp,
            "log" => Function::Log,
            "sqrt" => Function::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Exp => "exp",
            Function::Log => "log",
            Function::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Const(Constant),
    Var,
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Function, Box<Expr>),
}

const NEG_PRECEDENCE: u8 = 3;
const ATOM_PRECEDENCE: u8 = 5;

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            end: text.chars().count(),
        };
        let expr = parser.sum()?;
        match parser.peek() {
            None => Ok(expr),
            Some((tok, pos)) => Err(ParseError::UnexpectedToken {
                found: tok.describe(),
                expected: "end of input",
                pos,
            }),
        }
    }

    pub fn constant(value: f64) -> Expr {
        Expr::Number(value)
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Number(v) => *v,
            Expr::Const(Constant::Pi) => std::f64::consts::PI,
            Expr::Const(Constant::E) => std::f64::consts::E,
            Expr::Var => t,
            Expr::Neg(inner) => -inner.eval(t)?,
            Expr::Binary(op, lhs, rhs) => {
                let a = lhs.eval(t)?;
                let b = rhs.eval(t)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero {
                                node: self.to_string(),
                                t,
                            });
                        }
                        a / b
                    }
                    BinaryOp::Pow => a.powf(b),
                }
            }
            Expr::Call(func, arg) => {
                let x = arg.eval(t)?;
                match func {
                    Function::Sin => x.sin(),
                    Function::Cos => x.cos(),
                    Function::Exp => x.exp(),
                    Function::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::LogDomain {
                                node: self.to_string(),
                                t,
                            });
                        }
                        x.ln()
                    }
                    Function::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::SqrtDomain {
                                node: self.to_string(),
                                t,
                            });
                        }
                        x.sqrt()
                    }
                }
            }
        };
        if value.is_finite() {
            Ok(value)
        } else {
            Err(EvalError::NonFinite {
                node: self.to_string(),
                t,
            })
        }
    }

    /// True when the tree does not mention `t`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Var => false,
            Expr::Number(_) | Expr::Const(_) => true,
            Expr::Neg(e) | Expr::Call(_, e) => e.is_constant(),
            Expr::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.precedence(),
            Expr::Neg(_) => NEG_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

/// Canonical form: minimal parentheses, single spaces around `+` and `-`.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Var => f.write_str("t"),
            Expr::Neg(inner) => {
                f.write_str("-")?;
                write_operand(f, inner, inner.precedence() < NEG_PRECEDENCE)
            }
            Expr::Binary(op, lhs, rhs) => {
                let p = op.precedence();
                let left_parens = match op {
                    BinaryOp::Pow => lhs.precedence() <= p,
                    _ => lhs.precedence() < p,
                };
                let right_parens = match op {
                    BinaryOp::Pow => rhs.precedence() < p,
                    _ => rhs.precedence() <= p || matches!(**rhs, Expr::Neg(_)),
                };
                write_operand(f, lhs, left_parens)?;
                match op {
                    BinaryOp::Add | BinaryOp::Sub => write!(f, " {} ", op.symbol())?,
                    _ => write!(f, "{}", op.symbol())?,
                }
                write_operand(f, rhs, right_parens)
            }
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), arg),
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier '{s}'"),
            Token::Op(c) => format!("'{c}'"),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == '.' {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // Exponent only when digits follow, so `2*e` style input is untouched.
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
            let literal: String = chars[start..i].iter().collect();
            let value: f64 = literal.parse().map_err(|_| ParseError::BadNumber {
                text: literal.clone(),
                pos: start,
            })?;
            if !value.is_finite() {
                return Err(ParseError::BadNumber {
                    text: literal,
                    pos: start,
                });
            }
            tokens.push((Token::Number(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push((Token::Ident(chars[start..i].iter().collect()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                _ => return Err(ParseError::UnexpectedChar { ch: c, pos: start }),
            };
            tokens.push((tok, start));
            i += 1;
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<(Token, usize)> {
        self.tokens.get(self.pos).cloned()
    }

    fn next(&mut self, expected: &'static str) -> Result<(Token, usize), ParseError> {
        let tok = self.tokens.get(self.pos).cloned().ok_or(ParseError::UnexpectedToken {
            found: "end of input".into(),
            expected,
            pos: self.end,
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((Token::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            let op = if c == '+' { BinaryOp::Add } else { BinaryOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinaryOp::Mul } else { BinaryOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek_op() {
            Some('-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some('+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.next("a number, identifier or '('")?;
        match tok {
            Token::Number(v) => Ok(Expr::Number(v)),
            Token::LParen => {
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => match name.as_str() {
                "t" => Ok(Expr::Var),
                "pi" => Ok(Expr::Const(Constant::Pi)),
                "e" => Ok(Expr::Const(Constant::E)),
                _ => {
                    let func = Function::from_name(&name)
                        .ok_or(ParseError::UnknownIdentifier { name, pos })?;
                    match self.next("'('")? {
                        (Token::LParen, _) => {}
                        (other, pos) => {
                            return Err(ParseError::UnexpectedToken {
                                found: other.describe(),
                                expected: "'('",
                                pos,
                            })
                        }
                    }
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            other => Err(ParseError::UnexpectedToken {
                found: other.describe(),
                expected: "a number, identifier or '('",
                pos,
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.next("')'")? {
            (Token::RParen, _) => Ok(()),
            (other, pos) => Err(ParseError::UnexpectedToken {
                found: other.describe(),
                expected: "')'",
                pos,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(s: &str, t: f64) -> f64 {
        Expr::parse(s).unwrap().eval(t).unwrap()
    }

    #[test]
    fn forcing_terms() {
        assert_eq!(eval("4*t - 6", 2.0), 2.0);
        assert_eq!(eval("47 - 8*t^2", 2.0), 15.0);
        assert_eq!(eval("sin(4*t)", 0.0), 0.0);
        assert_eq!(eval("-3", 7.0), -3.0);
        assert!((eval("e^t", 1.0) - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn precedence() {
        assert_eq!(eval("2+3*4", 0.0), 14.0);
        assert_eq!(eval("2*3^2", 0.0), 18.0);
        assert_eq!(eval("-2^2", 0.0), -4.0);
        assert_eq!(eval("2^3^2", 0.0), 512.0);
        assert_eq!(eval("(2+3)*4", 0.0), 20.0);
        assert_eq!(eval("8/4/2", 0.0), 1.0);
        assert_eq!(eval("8-4-2", 0.0), 2.0);
        assert_eq!(eval("2^-1", 0.0), 0.5);
        assert_eq!(eval("--t", 3.0), 3.0);
    }

    #[test]
    fn literals_and_whitespace() {
        assert_eq!(eval("1.5e2", 0.0), 150.0);
        assert_eq!(eval("2E-1", 0.0), 0.2);
        assert_eq!(eval(" 2 * e ", 0.0), 2.0 * std::f64::consts::E);
        assert_eq!(eval("pi", 0.0), std::f64::consts::PI);
        assert_eq!(eval(".5", 0.0), 0.5);
        assert!((eval("sqrt(t) * log(exp(2))", 4.0) - 4.0).abs() < 1e-15);
        assert!((eval("cos(pi*t)", 1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        assert_eq!(
            Expr::parse("2 + $"),
            Err(ParseError::UnexpectedChar { ch: '$', pos: 4 })
        );
        assert_eq!(
            Expr::parse("3*x"),
            Err(ParseError::UnknownIdentifier {
                name: "x".into(),
                pos: 2
            })
        );
        assert!(matches!(
            Expr::parse("(t + 1"),
            Err(ParseError::UnexpectedToken { pos: 6, .. })
        ));
        assert!(matches!(
            Expr::parse("t t"),
            Err(ParseError::UnexpectedToken { pos: 2, .. })
        ));
        assert!(matches!(
            Expr::parse("sin t"),
            Err(ParseError::UnexpectedToken { pos: 4, .. })
        ));
        assert!(matches!(Expr::parse(""), Err(ParseError::UnexpectedToken { .. })));
        assert!(matches!(Expr::parse("1.2.3"), Err(ParseError::BadNumber { .. })));
        assert!(matches!(Expr::parse("1e999"), Err(ParseError::BadNumber { .. })));
    }

    #[test]
    fn evaluation_errors() {
        let e = Expr::parse("1/(t-1)").unwrap();
        match e.eval(1.0) {
            Err(EvalError::DivisionByZero { node, t }) => {
                assert_eq!(node, "1/(t - 1)");
                assert_eq!(t, 1.0);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            Expr::parse("log(t)").unwrap().eval(0.0),
            Err(EvalError::LogDomain { .. })
        ));
        assert!(matches!(
            Expr::parse("sqrt(t)").unwrap().eval(-1.0),
            Err(EvalError::SqrtDomain { .. })
        ));
        assert!(matches!(
            Expr::parse("exp(t)").unwrap().eval(1000.0),
            Err(EvalError::NonFinite { .. })
        ));
    }

    #[test]
    fn canonical_printing() {
        let cases = [
            ("4*t-6", "4*t - 6"),
            ("-2^2", "-2^2"),
            ("(-2)^2", "(-2)^2"),
            ("(2^3)^2", "(2^3)^2"),
            ("2^3^2", "2^3^2"),
        ];
        for (src, want) in cases {
            assert_eq!(Expr::parse(src).unwrap().to_string(), want);
        }
        assert_eq!(Expr::parse("2-(3-4)").unwrap().to_string(), "2 - (3 - 4)");
        assert_eq!(Expr::parse("2*-t").unwrap().to_string(), "2*(-t)");
        assert_eq!(Expr::parse("-(t+1)").unwrap().to_string(), "-(t + 1)");
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (-100.0..100.0f64).prop_map(|v| Expr::Number(v.abs())),
            (0u32..1000).prop_map(|v| Expr::Number(v as f64 / 8.0)),
            Just(Expr::Var),
            Just(Expr::Const(Constant::Pi)),
            Just(Expr::Const(Constant::E)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (
                    prop_oneof![
                        Just(BinaryOp::Add),
                        Just(BinaryOp::Sub),
                        Just(BinaryOp::Mul),
                        Just(BinaryOp::Div),
                        Just(BinaryOp::Pow),
                    ],
                    inner.clone(),
                    inner.clone()
                )
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
                (
                    prop_oneof![
                        Just(Function::Sin),
                        Just(Function::Cos),
                        Just(Function::Exp),
                        Just(Function::Log),
                        Just(Function::Sqrt),
                    ],
                    inner
                )
                    .prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printer_round_trip(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = Expr::parse(&printed).unwrap();
            prop_assert_eq!(&reparsed, &e, "printed as {}", printed);
            for i in 0..100 {
                let t = -3.0 + 0.0617 * i as f64;
                let a = e.eval(t);
                let b = reparsed.eval(t);
                match (a, b) {
                    (Ok(x), Ok(y)) => prop_assert_eq!(x.to_bits(), y.to_bits()),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
                }
            }
        }
    }
}
