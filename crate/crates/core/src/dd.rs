//! Double-double evaluation for the finite-difference oracle.

use std::cell::RefCell;

use twofloat::TwoFloat;

use crate::expr::{Algebra, DomainKind, Exponent, Expr, Func, Var};
use crate::jet::JetError;
use crate::metric::EvalPoint;

const LN2_HI: f64 = std::f64::consts::LN_2;
const LN2_LO: f64 = 2.319_046_813_846_299_6e-17;

fn dd(v: f64) -> TwoFloat {
    TwoFloat::from(v)
}

pub(crate) fn exp(x: TwoFloat) -> TwoFloat {
    let k = (x.hi() / LN2_HI).round();
    let ln2 = TwoFloat::new_add(LN2_HI, LN2_LO);
    // |r| <= ln2/2, then scaled by 2^-10 so a short series converges.
    let r = (x - ln2 * k) / 1024.0;
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    for i in 1..=14 {
        term = term * r / i as f64;
        sum += term;
    }
    for _ in 0..10 {
        sum = sum * sum;
    }
    sum * 2f64.powi(k as i32)
}

/// Long division; `TwoFloat`'s own quotient is only double accurate.
pub(crate) fn div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    TwoFloat::new_add(q1, q2) + q3
}

fn powi(a: TwoFloat, k: i32) -> TwoFloat {
    let mut acc = dd(1.0);
    let mut base = a;
    let mut e = k.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base;
        }
        base = base * base;
        e >>= 1;
    }
    if k < 0 {
        div(dd(1.0), acc)
    } else {
        acc
    }
}

const PI_2_HI: f64 = std::f64::consts::FRAC_PI_2;
const PI_2_LO: f64 = 6.123_233_995_736_766e-17;

/// `(sin, cos)` by reduction modulo `π/2` and Taylor series.
pub(crate) fn sin_cos(x: TwoFloat) -> (TwoFloat, TwoFloat) {
    let k = (x.hi() / PI_2_HI).round();
    let r = x - TwoFloat::new_add(PI_2_HI, PI_2_LO) * k;
    let r2 = r * r;
    let mut s = dd(0.0);
    let mut c = dd(0.0);
    let mut ts = r;
    let mut tc = dd(1.0);
    for i in 0..20 {
        s += ts;
        c += tc;
        let m = 2.0 * i as f64;
        ts = -(ts * r2) / ((m + 2.0) * (m + 3.0));
        tc = -(tc * r2) / ((m + 1.0) * (m + 2.0));
    }
    match (k as i64).rem_euclid(4) {
        0 => (s, c),
        1 => (c, -s),
        2 => (-s, -c),
        _ => (-c, s),
    }
}

/// `a^(num/den)` for `a > 0` via a Newton-refined `den`-th root.
pub(crate) fn powr(a: TwoFloat, num: i32, den: i32) -> TwoFloat {
    let v = powi(a, num.abs());
    let target: f64 = v.into();
    let mut x = dd(target.powf(1.0 / den as f64));
    for _ in 0..3 {
        let xq1 = powi(x, den - 1);
        x -= (xq1 * x - v) / (xq1 * den as f64);
    }
    if num < 0 {
        div(dd(1.0), x)
    } else {
        x
    }
}

/// Evaluates an expression at `p + offset·h` and records the sign of every
/// guarded operand (denominators, radicands, power bases).
pub(crate) struct DdStencil<'a> {
    point: &'a EvalPoint,
    h: f64,
    guards: Option<Vec<String>>,
}

struct DdAlgebra {
    x: Vec<TwoFloat>,
    y: Vec<TwoFloat>,
    signs: RefCell<Vec<i8>>,
}

fn sign(v: TwoFloat) -> i8 {
    if v.hi() > 0.0 {
        1
    } else if v.hi() < 0.0 {
        -1
    } else {
        0
    }
}

impl DdAlgebra {
    fn guard(&self, v: TwoFloat) -> i8 {
        let s = sign(v);
        self.signs.borrow_mut().push(s);
        s
    }
}

impl Algebra for DdAlgebra {
    type Value = TwoFloat;

    fn constant(&self, c: f64) -> TwoFloat {
        dd(c)
    }
    fn variable(&self, v: Var) -> TwoFloat {
        match v {
            Var::X(i) => self.x[i],
            Var::Y(i) => self.y[i],
        }
    }
    fn neg(&self, a: &TwoFloat) -> TwoFloat {
        -*a
    }
    fn add(&self, a: &TwoFloat, b: &TwoFloat) -> TwoFloat {
        *a + *b
    }
    fn sub(&self, a: &TwoFloat, b: &TwoFloat) -> TwoFloat {
        *a - *b
    }
    fn mul(&self, a: &TwoFloat, b: &TwoFloat) -> TwoFloat {
        *a * *b
    }
    fn div(&self, a: &TwoFloat, b: &TwoFloat) -> Result<TwoFloat, DomainKind> {
        if self.guard(*b) == 0 {
            return Err(DomainKind::DivisionByZero);
        }
        Ok(div(*a, *b))
    }
    fn powi(&self, a: &TwoFloat, k: i32) -> Result<TwoFloat, DomainKind> {
        if k < 0 && self.guard(*a) == 0 {
            return Err(DomainKind::DivisionByZero);
        }
        Ok(powi(*a, k))
    }
    fn powr(&self, a: &TwoFloat, num: i32, den: i32) -> Result<TwoFloat, DomainKind> {
        if self.guard(*a) <= 0 {
            return Err(DomainKind::NonPositivePowerBase);
        }
        Ok(powr(*a, num, den))
    }
    fn call(&self, f: Func, a: &TwoFloat) -> Result<TwoFloat, DomainKind> {
        Ok(match f {
            Func::Sqrt => {
                if self.guard(*a) < 0 {
                    return Err(DomainKind::NegativeSqrt);
                }
                if sign(*a) == 0 {
                    dd(0.0)
                } else {
                    a.sqrt()
                }
            }
            Func::Exp => exp(*a),
            Func::Sin => sin_cos(*a).0,
            Func::Cos => sin_cos(*a).1,
        })
    }
}

/// Guarded nodes in the order [`DdAlgebra`] records them (post-order).
fn guarded_nodes(e: &Expr, out: &mut Vec<String>) {
    match e {
        Expr::Num(_) | Expr::Var(_) => {}
        Expr::Neg(a) => guarded_nodes(a, out),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            guarded_nodes(a, out);
            guarded_nodes(b, out);
        }
        Expr::Div(a, b) => {
            guarded_nodes(a, out);
            guarded_nodes(b, out);
            out.push(e.to_string());
        }
        Expr::Pow(a, k) => {
            guarded_nodes(a, out);
            if !matches!(k, Exponent::Int(k) if *k >= 0) {
                out.push(e.to_string());
            }
        }
        Expr::Call(f, a) => {
            guarded_nodes(a, out);
            if *f == Func::Sqrt {
                out.push(e.to_string());
            }
        }
    }
}

impl<'a> DdStencil<'a> {
    pub(crate) fn new(point: &'a EvalPoint, h: f64) -> Self {
        DdStencil { point, h, guards: None }
    }

    /// Value at the stencil point plus `(sign, node)` for each guarded node.
    pub(crate) fn evaluate(&mut self, e: &Expr, offset: &[f64]) -> Result<(TwoFloat, Vec<(i8, String)>), JetError> {
        let n = self.point.dim();
        let shift = |base: f64, k: f64| dd(base) + dd(self.h) * k;
        let alg = DdAlgebra {
            x: (0..n).map(|i| shift(self.point.x[i], offset[i])).collect(),
            y: (0..n).map(|i| shift(self.point.y[i], offset[n + i])).collect(),
            signs: RefCell::new(Vec::new()),
        };
        let value = e.evaluate(&alg)?;
        let guards = self.guards.get_or_insert_with(|| {
            let mut g = Vec::new();
            guarded_nodes(e, &mut g);
            g
        });
        let signs = alg.signs.into_inner();
        Ok((value, signs.into_iter().zip(guards.iter().cloned()).collect()))
    }
}
