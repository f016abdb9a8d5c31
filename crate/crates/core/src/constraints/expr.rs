//! Constraint expressions such as `x^2 + y^2 <= 25`.
//!
//! ```text
//! comparison := expr ("<=" | ">=" | "<" | ">") expr
//! expr       := term (("+" | "-") term)*
//! term       := unary (("*" | "/") unary)*
//! unary      := "-" unary | power
//! power      := primary (("^" | "**") unary)?      right associative
//! primary    := number | var | func "(" expr ")" | "(" expr ")"
//! var        := "x" | "y" | "z"
//! func       := "sin" | "cos" | "sqrt" | "abs" | "exp" | "log"
//! ```
//!
//! Unary minus binds looser than `^`, so `-x^2` is `-(x^2)`.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::shapes::Shape;
use super::{ConstraintRegion, Loc};
use crate::error::{Error, ParseError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
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
    Sqrt,
    Abs,
    Exp,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Ge,
    Lt,
    Gt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::X) => x,
            Expr::Var(Var::Y) => y,
            Expr::Var(Var::Z) => z,
            Expr::Neg(e) => -e.eval(x, y, z),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x, y, z), b.eval(x, y, z));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => libm::pow(a, b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(x, y, z);
                match f {
                    Func::Sin => libm::sin(v),
                    Func::Cos => libm::cos(v),
                    Func::Sqrt => libm::sqrt(v),
                    Func::Abs => libm::fabs(v),
                    Func::Exp => libm::exp(v),
                    Func::Log => libm::log(v),
                }
            }
        }
    }

    fn uses_z(&self) -> bool {
        match self {
            Expr::Var(v) => *v == Var::Z,
            Expr::Num(_) => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.uses_z(),
            Expr::Bin(_, a, b) => a.uses_z() || b.uses_z(),
        }
    }
}

/// Fully parenthesized; re-parses to an identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(Var::X) => f.write_str("x"),
            Expr::Var(Var::Y) => f.write_str("y"),
            Expr::Var(Var::Z) => f.write_str("z"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {sym} {b})")
            }
            Expr::Call(func, e) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Sqrt => "sqrt",
                    Func::Abs => "abs",
                    Func::Exp => "exp",
                    Func::Log => "log",
                };
                write!(f, "{name}({e})")
            }
        }
    }
}

/// `lhs op rhs`; NaN on either side makes the comparison false.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

impl Comparison {
    pub fn holds(&self, x: f64, y: f64, z: f64) -> bool {
        let (a, b) = (self.lhs.eval(x, y, z), self.rhs.eval(x, y, z));
        match self.op {
            CmpOp::Le => a <= b,
            CmpOp::Ge => a >= b,
            CmpOp::Lt => a < b,
            CmpOp::Gt => a > b,
        }
    }

    pub fn uses_z(&self) -> bool {
        self.lhs.uses_z() || self.rhs.uses_z()
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = match self.op {
            CmpOp::Le => "<=",
            CmpOp::Ge => ">=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
        };
        write!(f, "{} {op} {}", self.lhs, self.rhs)
    }
}

/// Parse `text` into a user-defined region selecting where the comparison holds.
pub fn parse_constraint_expression(text: &str) -> Result<ConstraintRegion> {
    ConstraintRegion::new(Shape::UserDefined(parse_comparison(text)?), Loc::In)
}

pub fn parse_comparison(text: &str) -> Result<Comparison> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let lhs = p.expr()?;
    let op = match p.peek().kind {
        Tok::Le => CmpOp::Le,
        Tok::Ge => CmpOp::Ge,
        Tok::Lt => CmpOp::Lt,
        Tok::Gt => CmpOp::Gt,
        _ => return Err(p.unexpected(&["'+'", "'-'", "'*'", "'/'", "'^'", "'<='", "'>='", "'<'", "'>'"])),
    };
    p.pos += 1;
    let rhs = p.expr()?;
    if p.peek().kind != Tok::Eof {
        return Err(p.unexpected(&["'+'", "'-'", "'*'", "'/'", "'^'", "end of input"]));
    }
    Ok(Comparison { lhs, op, rhs })
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Le,
    Ge,
    Lt,
    Gt,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    kind: Tok,
    offset: usize,
    text: String,
}

const OPERAND: &[&str] = &["number", "identifier", "'('", "'-'"];

fn lex(src: &str) -> Result<Vec<Token>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let two = bytes.get(i + 1).copied();
        let kind = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' if two == Some(b'*') => {
                i += 1;
                Tok::Caret
            }
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'<' if two == Some(b'=') => {
                i += 1;
                Tok::Le
            }
            b'>' if two == Some(b'=') => {
                i += 1;
                Tok::Ge
            }
            b'<' => Tok::Lt,
            b'>' => Tok::Gt,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["number"],
                    found: alloc::format!("`{text}`"),
                })?;
                out.push(Token {
                    kind: Tok::Num(value),
                    offset: start,
                    text: text.to_string(),
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let text = &src[start..i];
                out.push(Token {
                    kind: Tok::Ident(text.to_string()),
                    offset: start,
                    text: text.to_string(),
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["number", "identifier", "operator", "'('", "')'"],
                    found: alloc::format!("`{ch}`"),
                }
                .into());
            }
        };
        i += 1;
        out.push(Token {
            kind,
            offset: start,
            text: src[start..i].to_string(),
        });
    }
    out.push(Token {
        kind: Tok::Eof,
        offset: src.len(),
        text: String::new(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn unexpected(&self, expected: &[&'static str]) -> Error {
        let t = self.peek();
        let found = if t.kind == Tok::Eof {
            "end of input".to_string()
        } else {
            alloc::format!("`{}`", t.text)
        };
        ParseError {
            offset: t.offset,
            expected: expected.to_vec(),
            found,
        }
        .into()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().kind == Tok::Minus {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek().kind == Tok::Caret {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = self.peek().clone();
        match tok.kind {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if self.peek().kind == Tok::LParen {
                    let func = match name.as_str() {
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        "sqrt" => Func::Sqrt,
                        "abs" => Func::Abs,
                        "exp" => Func::Exp,
                        "log" => Func::Log,
                        _ => {
                            return Err(Error::UnknownVariable {
                                name,
                                offset: tok.offset,
                            })
                        }
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match name.as_str() {
                    "x" => Ok(Expr::Var(Var::X)),
                    "y" => Ok(Expr::Var(Var::Y)),
                    "z" => Ok(Expr::Var(Var::Z)),
                    "sin" | "cos" | "sqrt" | "abs" | "exp" | "log" => Err(self.unexpected(&["'('"])),
                    _ => Err(Error::UnknownVariable {
                        name,
                        offset: tok.offset,
                    }),
                }
            }
            _ => Err(self.unexpected(OPERAND)),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek().kind == Tok::RParen {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&["')'", "operator"]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Point;

    #[test]
    fn half_plane() {
        let r = parse_constraint_expression("y >= 0").unwrap();
        assert!(r.contains(&Point::xy(0.0, 1.0)).unwrap());
        assert!(!r.contains(&Point::xy(0.0, -1.0)).unwrap());
    }

    #[test]
    fn dangling_operator() {
        match parse_comparison("x^2 + <= 3") {
            Err(Error::Parse(e)) => {
                assert_eq!(e.offset, 6);
                assert_eq!(e.expected, OPERAND);
                assert_eq!(e.found, "`<=`");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence() {
        let c = parse_comparison("-2^2 + 3*4/2 - 2**3 >= 0").unwrap();
        assert_eq!(c.lhs.eval(0.0, 0.0, 0.0), -4.0 + 6.0 - 8.0);
        let right_assoc = parse_comparison("2^3^2 > 0").unwrap();
        assert_eq!(right_assoc.lhs.eval(0.0, 0.0, 0.0), 512.0);
    }

    #[test]
    fn unknown_identifiers() {
        assert_eq!(
            parse_comparison("x + w < 1"),
            Err(Error::UnknownVariable {
                name: "w".into(),
                offset: 4
            })
        );
        assert!(matches!(
            parse_comparison("tan(x) < 1"),
            Err(Error::UnknownVariable { .. })
        ));
    }

    #[test]
    fn display_reparses() {
        let c = parse_comparison("sqrt(x^2 + y^2) - 3 * cos(z) < -1.5e-3").unwrap();
        let again = parse_comparison(&c.to_string()).unwrap();
        assert_eq!(c, again);
        assert!(c.uses_z());
    }
}
