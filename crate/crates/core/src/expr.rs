//! Coefficient-function expressions over `x1..xn`, `y1..yn`.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! base     := number | ident | func '(' expr ')' | '(' expr ')'
//! func     := 'sqrt' | 'exp' | 'sin' | 'cos'
//! ident    := ('x' | 'y') digit+
//! exponent := ['-'] integer | '(' ['-'] integer '/' integer ')'
//! ```
//!
//! Unary minus is accepted as an extension of the core grammar. Evaluation is
//! generic over an [`Algebra`], so the same tree drives plain `f64`
//! evaluation, truncated Taylor jets and the double-double stencil oracle.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A coordinate variable, zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Var {
    X(usize),
    Y(usize),
}

impl Var {
    /// Position in the `(x1..xn, y1..yn)` jet variable ordering.
    pub fn slot(self, n: usize) -> usize {
        match self {
            Var::X(i) => i,
            Var::Y(i) => n + i,
        }
    }

    pub fn from_slot(slot: usize, n: usize) -> Self {
        if slot < n {
            Var::X(slot)
        } else {
            Var::Y(slot - n)
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{}", i + 1),
            Var::Y(i) => write!(f, "y{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Sin,
    Cos,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

/// Exponent of a power node: an integer or a reduced rational `num/den`, `den > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Exponent {
    Int(i32),
    Ratio(i32, i32),
}

impl Exponent {
    fn new(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let (mut num, mut den) = if den < 0 { (-num, -den) } else { (num, den) };
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        if g > 1 {
            num /= g;
            den /= g;
        }
        let num = i32::try_from(num).ok()?;
        let den = i32::try_from(den).ok()?;
        Some(if den == 1 { Exponent::Int(num) } else { Exponent::Ratio(num, den) })
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Int(k) => k as f64,
            Exponent::Ratio(p, q) => p as f64 / q as f64,
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("identifier `{name}` at offset {offset} is out of range for dimension {n}")]
    IndexOutOfRange { name: String, offset: usize, n: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::IndexOutOfRange { offset, .. } => *offset,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    NegativeSqrt,
    NonPositivePowerBase,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::NegativeSqrt => "square root of a non-positive value",
            DomainKind::NonPositivePowerBase => "fractional power of a non-positive base",
            DomainKind::NonFinite => "non-finite value",
        };
        f.write_str(s)
    }
}

/// Evaluation left the domain of the expression.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} in `{subexpr}`")]
pub struct DomainError {
    pub kind: DomainKind,
    pub subexpr: String,
}

/// Number system an [`Expr`] can be evaluated in.
///
/// The fallible operations return `Err(kind)` when the operand is outside
/// the domain; [`Expr::evaluate`] attaches the offending subexpression.
pub trait Algebra {
    type Value: Clone;

    fn constant(&self, c: f64) -> Self::Value;
    fn variable(&self, v: Var) -> Self::Value;
    fn neg(&self, a: &Self::Value) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn sub(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn div(&self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value, DomainKind>;
    fn powi(&self, a: &Self::Value, k: i32) -> Result<Self::Value, DomainKind>;
    fn powr(&self, a: &Self::Value, num: i32, den: i32) -> Result<Self::Value, DomainKind>;
    fn call(&self, f: Func, a: &Self::Value) -> Result<Self::Value, DomainKind>;
}

impl Expr {
    pub fn num(c: f64) -> Self {
        Expr::Num(c)
    }

    pub fn var(v: Var) -> Self {
        Expr::Var(v)
    }

    /// Evaluate in the given number system.
    pub fn evaluate<A: Algebra>(&self, alg: &A) -> Result<A::Value, DomainError> {
        let fail = |kind, node: &Expr| DomainError { kind, subexpr: node.to_string() };
        Ok(match self {
            Expr::Num(c) => alg.constant(*c),
            Expr::Var(v) => alg.variable(*v),
            Expr::Neg(a) => alg.neg(&a.evaluate(alg)?),
            Expr::Add(a, b) => alg.add(&a.evaluate(alg)?, &b.evaluate(alg)?),
            Expr::Sub(a, b) => alg.sub(&a.evaluate(alg)?, &b.evaluate(alg)?),
            Expr::Mul(a, b) => alg.mul(&a.evaluate(alg)?, &b.evaluate(alg)?),
            Expr::Div(a, b) => {
                let (a, b) = (a.evaluate(alg)?, b.evaluate(alg)?);
                alg.div(&a, &b).map_err(|k| fail(k, self))?
            }
            Expr::Pow(a, e) => {
                let a = a.evaluate(alg)?;
                match *e {
                    Exponent::Int(k) => alg.powi(&a, k),
                    Exponent::Ratio(p, q) => alg.powr(&a, p, q),
                }
                .map_err(|k| fail(k, self))?
            }
            Expr::Call(f, a) => {
                let a = a.evaluate(alg)?;
                alg.call(*f, &a).map_err(|k| fail(k, self))?
            }
        })
    }

    /// Plain double-precision evaluation.
    pub fn eval_f64(&self, x: &[f64], y: &[f64]) -> Result<f64, DomainError> {
        self.evaluate(&F64Algebra { x, y })
    }

    /// Calls `f` on every variable occurring in the tree.
    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.visit_vars(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_vars(f);
                b.visit_vars(f);
            }
        }
    }

    pub fn depends_on_x(&self) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= matches!(v, Var::X(_)));
        found
    }

    pub fn depends_on_y(&self) -> bool {
        let mut found = false;
        self.visit_vars(&mut |v| found |= matches!(v, Var::Y(_)));
        found
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(c) if *c < 0.0 || c.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

/// `f64` evaluation at a fixed point.
pub struct F64Algebra<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
}

fn check(v: f64) -> Result<f64, DomainKind> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DomainKind::NonFinite)
    }
}

impl Algebra for F64Algebra<'_> {
    type Value = f64;

    fn constant(&self, c: f64) -> f64 {
        c
    }
    fn variable(&self, v: Var) -> f64 {
        match v {
            Var::X(i) => self.x[i],
            Var::Y(i) => self.y[i],
        }
    }
    fn neg(&self, a: &f64) -> f64 {
        -a
    }
    fn add(&self, a: &f64, b: &f64) -> f64 {
        a + b
    }
    fn sub(&self, a: &f64, b: &f64) -> f64 {
        a - b
    }
    fn mul(&self, a: &f64, b: &f64) -> f64 {
        a * b
    }
    fn div(&self, a: &f64, b: &f64) -> Result<f64, DomainKind> {
        if *b == 0.0 {
            return Err(DomainKind::DivisionByZero);
        }
        check(a / b)
    }
    fn powi(&self, a: &f64, k: i32) -> Result<f64, DomainKind> {
        if k < 0 && *a == 0.0 {
            return Err(DomainKind::DivisionByZero);
        }
        check(a.powi(k))
    }
    fn powr(&self, a: &f64, num: i32, den: i32) -> Result<f64, DomainKind> {
        if *a < 0.0 || (*a == 0.0 && num < 0) {
            return Err(DomainKind::NonPositivePowerBase);
        }
        check(a.powf(num as f64 / den as f64))
    }
    fn call(&self, f: Func, a: &f64) -> Result<f64, DomainKind> {
        match f {
            Func::Sqrt if *a < 0.0 => Err(DomainKind::NegativeSqrt),
            Func::Sqrt => Ok(a.sqrt()),
            Func::Exp => check(a.exp()),
            Func::Sin => Ok(a.sin()),
            Func::Cos => Ok(a.cos()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Minimal parentheses; the output re-parses to the same tree.
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, paren: bool| {
            if paren {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(c) => {
                if c.is_sign_negative() {
                    write!(f, "-{:?}", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                f.write_str("-")?;
                wrap(f, a, a.precedence() < 3)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let (op, prec) = match self {
                    Expr::Add(..) => (" + ", 1),
                    Expr::Sub(..) => (" - ", 1),
                    Expr::Mul(..) => (" * ", 2),
                    _ => (" / ", 2),
                };
                wrap(f, a, a.precedence() < prec)?;
                f.write_str(op)?;
                wrap(f, b, b.precedence() <= prec)
            }
            Expr::Pow(a, e) => {
                wrap(f, a, a.precedence() < 5)?;
                match e {
                    Exponent::Int(k) => write!(f, "^{k}"),
                    Exponent::Ratio(p, q) => write!(f, "^({p}/{q})"),
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Parse `source` for a metric of dimension `n`.
pub fn parse_expr(source: &str, n: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { src: source.as_bytes(), pos: 0, n };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let e = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let neg = self.eat(b'-');
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.syntax("expected integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        let v: i64 =
            text.parse().map_err(|_| ParseError::Syntax { offset: start, message: "exponent too large".into() })?;
        Ok(if neg { -v } else { v })
    }

    fn exponent(&mut self) -> Result<Exponent, ParseError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let e = if self.eat(b'(') {
            let num = self.integer()?;
            let den = if self.eat(b'/') { self.integer()? } else { 1 };
            self.expect(b')')?;
            Exponent::new(num, den)
        } else {
            let k = self.integer()?;
            Exponent::new(k, 1)
        };
        e.ok_or(ParseError::Syntax { offset: start, message: "invalid exponent".into() })
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return Err(self.syntax("unexpected end of input"));
        };
        if c == b'(' {
            self.pos += 1;
            let e = self.expr()?;
            self.expect(b')')?;
            return Ok(e);
        }
        if c.is_ascii_digit() || c == b'.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            return self.word();
        }
        Err(self.syntax(&format!("unexpected character `{}`", c as char)))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && s[i].is_ascii_digit() {
            i += 1;
        }
        if i < s.len() && s[i] == b'.' {
            i += 1;
            while i < s.len() && s[i].is_ascii_digit() {
                i += 1;
            }
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            if j < s.len() && s[j].is_ascii_digit() {
                while j < s.len() && s[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).expect("ascii number");
        let v: f64 = text
            .parse()
            .map_err(|_| ParseError::Syntax { offset: start, message: format!("malformed number `{text}`") })?;
        self.pos = i;
        Ok(Expr::Num(v))
    }

    fn word(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        while i < s.len() && s[i].is_ascii_alphanumeric() {
            i += 1;
        }
        let name = std::str::from_utf8(&s[start..i]).expect("ascii word").to_string();
        self.pos = i;
        let func = match name.as_str() {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        };
        if let Some(func) = func {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        let (head, digits) = name.split_at(1);
        if (head == "x" || head == "y") && !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            let idx: usize = digits.parse().unwrap_or(0);
            if idx == 0 || idx > self.n {
                return Err(ParseError::IndexOutOfRange { name, offset: start, n: self.n });
            }
            let v = if head == "x" { Var::X(idx - 1) } else { Var::Y(idx - 1) };
            return Ok(Expr::Var(v));
        }
        Err(ParseError::UnknownIdentifier { name, offset: start })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sphere_conformal_factor_has_division_root() {
        let e = parse_expr("4/(1+x1^2+x2^2+x3^2)^2", 3).unwrap();
        assert!(matches!(e, Expr::Div(..)));
        let v = e.eval_f64(&[1.0, 0.0, 0.0], &[0.0; 3]).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn dangling_operator_reports_offset() {
        let err = parse_expr("x1 +", 3).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 4, .. }), "{err:?}");
    }

    #[test]
    fn out_of_range_index() {
        let err = parse_expr("y4", 3).unwrap_err();
        assert!(matches!(err, ParseError::IndexOutOfRange { offset: 0, n: 3, .. }));
        assert!(matches!(parse_expr("x0", 3), Err(ParseError::IndexOutOfRange { .. })));
    }

    #[test]
    fn unknown_identifier() {
        assert!(matches!(parse_expr("1 + z2", 3), Err(ParseError::UnknownIdentifier { offset: 4, .. })));
        assert!(matches!(parse_expr("tan(x1)", 3), Err(ParseError::UnknownIdentifier { .. })));
    }

    #[test]
    fn rational_exponent_and_functions() {
        let e = parse_expr("(y1^4 + y2^4)^(1/4)", 2).unwrap();
        let v = e.eval_f64(&[0.0; 2], &[1.0, 1.0]).unwrap();
        assert!((v - 2f64.powf(0.25)).abs() < 1e-15);
        let e = parse_expr("exp(x1) * sin(x2) - cos(0) + sqrt(4)", 2).unwrap();
        let v = e.eval_f64(&[0.0, std::f64::consts::FRAC_PI_2], &[0.0; 2]).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
        assert_eq!(parse_expr("x1^(2/4)", 1).unwrap(), parse_expr("x1^(1/2)", 1).unwrap());
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expr("2 - 3 - 4 * 2 / 4 ^ 2", 1).unwrap();
        assert_eq!(e.eval_f64(&[0.0], &[0.0]).unwrap(), 2.0 - 3.0 - 4.0 * 2.0 / 16.0);
        let e = parse_expr("-x1^2", 1).unwrap();
        assert_eq!(e.eval_f64(&[3.0], &[0.0]).unwrap(), -9.0);
    }

    #[test]
    fn domain_error_names_subexpression() {
        let e = parse_expr("1 + 1/(x1 - 1)", 1).unwrap();
        let err = e.eval_f64(&[1.0], &[0.0]).unwrap_err();
        assert_eq!(err.kind, DomainKind::DivisionByZero);
        assert_eq!(err.subexpr, "1.0 / (x1 - 1.0)");
        let err = parse_expr("sqrt(x1)", 1).unwrap().eval_f64(&[-1.0], &[0.0]).unwrap_err();
        assert_eq!(err.kind, DomainKind::NegativeSqrt);
    }

    #[test]
    fn print_reparse_fixed_point_examples() {
        for src in [
            "4/(1+x1^2+x2^2+x3^2)^2",
            "-(x1 - y2)^(-1/3) * -y1",
            "x1 - (y1 - x2) / (y2 / x3)",
            "(-x1)^2 + 1e-7 * sqrt(y3)",
            "1.5e20 - 0.25",
        ] {
            let e = parse_expr(src, 3).unwrap();
            let printed = e.to_string();
            let again = parse_expr(&printed, 3).unwrap();
            assert_eq!(e, again, "{src} -> {printed}");
            assert_eq!(printed, again.to_string());
        }
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0.0f64..100.0).prop_map(Expr::Num),
            (0usize..3).prop_map(|i| Expr::Var(Var::X(i))),
            (0usize..3).prop_map(|i| Expr::Var(Var::Y(i))),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
                (inner.clone(), -3i32..4).prop_map(|(a, k)| Expr::Pow(Box::new(a), Exponent::Int(k))),
                (inner.clone(), 1i32..5).prop_map(|(a, p)| Expr::Pow(Box::new(a), Exponent::new(p as i64, 7).unwrap())),
                inner.prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
            ]
        })
    }

    proptest! {
        #[test]
        fn printing_is_a_parse_fixed_point(e in arb_expr()) {
            let printed = e.to_string();
            let reparsed = parse_expr(&printed, 3).unwrap();
            prop_assert_eq!(&reparsed, &e);
            prop_assert_eq!(reparsed.to_string(), printed);
        }
    }
}
