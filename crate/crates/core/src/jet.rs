//! Exact partial derivatives via truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function
//! of the `2n` variables `(x1..xn, y1..yn)` up to total order `k`. Monomials
//! are kept in degree-graded order, so a jet of lower order is a prefix of
//! one of higher order and multiplication is a precomputed convolution.
//! Mixed partials are addressed through the sorted multi-index, which makes
//! their symmetry structural.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

use crate::dd::DdStencil;
use crate::expr::{Algebra, DomainError, DomainKind, Expr, Func, Var};
use crate::metric::EvalPoint;

/// Largest supported jet order. Curvature needs 4, its h-covariant
/// derivative 5 and the second h-derivative of a scalar 6.
pub const MAX_JET_ORDER: usize = 6;

/// Default finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet order {0} exceeds the supported maximum {MAX_JET_ORDER}")]
    OrderTooHigh(usize),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("finite differences support total order 1..=3, got {0}")]
    StencilOrder(usize),
    #[error("finite-difference step must be positive, got {0}")]
    BadStep(f64),
    #[error("stencil crosses a singularity of `{subexpr}`")]
    StencilCrossesPole { subexpr: String },
    #[error("variable {0} is out of range")]
    VariableOutOfRange(String),
}

/// Monomial tables shared by every jet with the same variable count.
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<Vec<u8>>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `degree_end[d]` = number of monomials of degree `<= d`.
    degree_end: Vec<usize>,
    /// Convolution triples `(a, b, target)` sorted by target degree.
    mul: Vec<(u32, u32, u32)>,
    mul_end: Vec<usize>,
    /// Per variable: `(dst, src, factor)` with `dst + e_i = src`.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    /// `α!` per monomial.
    factorial: Vec<f64>,
}

impl JetSpace {
    /// Shared tables for `nvars` variables up to `order`.
    pub fn get(nvars: usize, order: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut map = cache.lock().expect("jet space cache poisoned");
        map.entry((nvars, order)).or_insert_with(|| Arc::new(JetSpace::build(nvars, order))).clone()
    }

    fn build(nvars: usize, order: usize) -> Self {
        let mut monomials = Vec::new();
        let mut degree_end = Vec::with_capacity(order + 1);
        for d in 0..=order {
            let mut current = vec![0u8; nvars];
            push_degree(&mut monomials, &mut current, 0, d);
            degree_end.push(monomials.len());
        }
        let lookup: HashMap<Vec<u8>, usize> = monomials.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();

        let mut mul = Vec::new();
        let mut mul_end = Vec::with_capacity(order + 1);
        let mut sub = vec![0u8; nvars];
        let mut t = 0;
        for d in 0..=order {
            while t < degree_end[d] {
                let target = &monomials[t];
                sub_monomials(target, &mut sub, 0, &mut |a| {
                    let b: Vec<u8> = target.iter().zip(a).map(|(t, a)| t - a).collect();
                    mul.push((lookup[a] as u32, lookup[&b] as u32, t as u32));
                });
                t += 1;
            }
            mul_end.push(mul.len());
        }

        let mut deriv = vec![Vec::new(); nvars];
        let limit = if order == 0 { 0 } else { degree_end[order - 1] };
        for (dst, m) in monomials.iter().enumerate().take(limit) {
            for (var, table) in deriv.iter_mut().enumerate() {
                let mut src = m.clone();
                src[var] += 1;
                table.push((dst as u32, lookup[&src] as u32, src[var] as f64));
            }
        }

        let factorial =
            monomials.iter().map(|m| m.iter().map(|&k| (1..=k as u32).product::<u32>() as f64).product()).collect();

        JetSpace { nvars, order, monomials, lookup, degree_end, mul, mul_end, deriv, factorial }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_order(&self) -> usize {
        self.order
    }

    fn len(&self, order: usize) -> usize {
        self.degree_end[order]
    }

    fn index_of(&self, slots: &[usize]) -> Option<usize> {
        let mut m = vec![0u8; self.nvars];
        for &s in slots {
            *m.get_mut(s)? += 1;
        }
        self.lookup.get(&m).copied()
    }
}

fn push_degree(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, var: usize, remaining: usize) {
    if var + 1 == cur.len() {
        cur[var] = remaining as u8;
        out.push(cur.clone());
        cur[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_degree(out, cur, var + 1, remaining - k);
    }
    cur[var] = 0;
}

fn sub_monomials(target: &[u8], cur: &mut Vec<u8>, var: usize, f: &mut impl FnMut(&Vec<u8>)) {
    if var == target.len() {
        f(cur);
        return;
    }
    for k in 0..=target[var] {
        cur[var] = k;
        sub_monomials(target, cur, var + 1, f);
    }
    cur[var] = 0;
}

/// Truncated Taylor expansion at a point.
#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, order: usize, c: f64) -> Self {
        let mut coeffs = vec![0.0; space.len(order)];
        coeffs[0] = c;
        Jet { space: space.clone(), order, coeffs }
    }

    /// The coordinate function `slot` expanded at `value`.
    pub fn variable(space: &Arc<JetSpace>, order: usize, slot: usize, value: f64) -> Self {
        let mut j = Jet::constant(space, order, value);
        if order > 0 {
            // Degree-one monomials follow the constant, in slot order.
            j.coeffs[1 + slot] = 1.0;
        }
        j
    }

    pub fn zero_like(&self) -> Self {
        Jet::constant(&self.space, self.order, 0.0)
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Mixed partial derivative with respect to the listed jet slots (any order).
    pub fn partial_slots(&self, slots: &[usize]) -> f64 {
        if slots.len() > self.order {
            panic!("partial of order {} requested from a jet of order {}", slots.len(), self.order);
        }
        let idx = self.space.index_of(slots).expect("jet slot out of range");
        self.coeffs[idx] * self.space.factorial[idx]
    }

    /// Mixed partial derivative with respect to the listed variables.
    pub fn partial(&self, vars: &[Var]) -> f64 {
        let n = self.space.nvars / 2;
        let slots: Vec<usize> = vars.iter().map(|v| v.slot(n)).collect();
        self.partial_slots(&slots)
    }

    /// All stored partials as `(multi-index, value)` pairs.
    pub fn partials(&self) -> impl Iterator<Item = (&[u8], f64)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, c)| (self.space.monomials[i].as_slice(), c * self.space.factorial[i]))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        Jet { space: self.space.clone(), order, coeffs: self.coeffs[..self.space.len(order)].to_vec() }
    }

    fn binary(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space));
        let order = self.order.min(other.order);
        let len = self.space.len(order);
        let coeffs = self.coeffs[..len].iter().zip(&other.coeffs[..len]).map(|(a, b)| f(*a, *b)).collect();
        Jet { space: self.space.clone(), order, coeffs }
    }

    pub fn add(&self, other: &Jet) -> Jet {
        self.binary(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet) -> Jet {
        self.binary(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Jet) -> Jet {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space));
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; self.space.len(order)];
        for &(a, b, t) in &self.space.mul[..self.space.mul_end[order]] {
            coeffs[t as usize] += self.coeffs[a as usize] * other.coeffs[b as usize];
        }
        Jet { space: self.space.clone(), order, coeffs }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { space: self.space.clone(), order: self.order, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    /// `self += s * other`, truncating to the lower order.
    pub fn axpy(&mut self, s: f64, other: &Jet) {
        if other.order < self.order {
            *self = self.truncate(other.order);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// Derivative with respect to jet slot `var`; the order drops by one.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order > 0, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let len = self.space.len(order);
        let mut coeffs = vec![0.0; len];
        for &(dst, src, factor) in &self.space.deriv[var][..len] {
            coeffs[dst as usize] = factor * self.coeffs[src as usize];
        }
        Jet { space: self.space.clone(), order, coeffs }
    }

    /// `f(self)` given `derivs[k] = f^(k)(self.value())` for `k = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Jet {
        let order = self.order;
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut fact = 1.0;
        let taylor: Vec<f64> = (0..=order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                derivs[k] / fact
            })
            .collect();
        let mut acc = Jet::constant(&self.space, order, taylor[order]);
        for k in (0..order).rev() {
            acc = acc.mul(&h);
            acc.coeffs[0] += taylor[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Jet, DomainKind> {
        let a = self.value();
        if a == 0.0 || !a.is_finite() {
            return Err(DomainKind::DivisionByZero);
        }
        let mut d = Vec::with_capacity(self.order + 1);
        let mut v = 1.0 / a;
        for k in 0..=self.order {
            d.push(v);
            v *= -((k + 1) as f64) / a;
        }
        Ok(self.compose(&d))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, DomainKind> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, k: i32) -> Result<Jet, DomainKind> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut result = Jet::constant(&self.space, self.order, 1.0);
        let mut base = self.clone();
        let mut e = k as u32;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    /// Real power with exponent `p`, defined for a positive base.
    pub fn powf(&self, p: f64) -> Result<Jet, DomainKind> {
        let a = self.value();
        if !(a > 0.0) {
            if a == 0.0 && self.order == 0 && p > 0.0 {
                return Ok(Jet::constant(&self.space, 0, 0.0));
            }
            return Err(DomainKind::NonPositivePowerBase);
        }
        let mut d = Vec::with_capacity(self.order + 1);
        let mut coef = 1.0;
        for k in 0..=self.order {
            d.push(coef * a.powf(p - k as f64));
            coef *= p - k as f64;
        }
        Ok(self.compose(&d))
    }

    pub fn sqrt(&self) -> Result<Jet, DomainKind> {
        if self.value() < 0.0 || (self.value() == 0.0 && self.order > 0) {
            return Err(DomainKind::NegativeSqrt);
        }
        if self.value() == 0.0 {
            return Ok(self.clone());
        }
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&vec![e; self.order + 1])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let d: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let d: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4]).collect();
        self.compose(&d)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

/// Jet evaluation of an expression at a point.
pub struct JetAlgebra<'a> {
    space: Arc<JetSpace>,
    order: usize,
    point: &'a EvalPoint,
}

impl<'a> JetAlgebra<'a> {
    pub fn new(point: &'a EvalPoint, order: usize) -> Result<Self, JetError> {
        if order > MAX_JET_ORDER {
            return Err(JetError::OrderTooHigh(order));
        }
        Ok(JetAlgebra { space: JetSpace::get(2 * point.dim(), order), order, point })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }
}

fn finite(j: Jet) -> Result<Jet, DomainKind> {
    if j.is_finite() {
        Ok(j)
    } else {
        Err(DomainKind::NonFinite)
    }
}

impl Algebra for JetAlgebra<'_> {
    type Value = Jet;

    fn constant(&self, c: f64) -> Jet {
        Jet::constant(&self.space, self.order, c)
    }
    fn variable(&self, v: Var) -> Jet {
        let n = self.point.dim();
        let value = match v {
            Var::X(i) => self.point.x[i],
            Var::Y(i) => self.point.y[i],
        };
        Jet::variable(&self.space, self.order, v.slot(n), value)
    }
    fn neg(&self, a: &Jet) -> Jet {
        a.neg()
    }
    fn add(&self, a: &Jet, b: &Jet) -> Jet {
        a.add(b)
    }
    fn sub(&self, a: &Jet, b: &Jet) -> Jet {
        a.sub(b)
    }
    fn mul(&self, a: &Jet, b: &Jet) -> Jet {
        a.mul(b)
    }
    fn div(&self, a: &Jet, b: &Jet) -> Result<Jet, DomainKind> {
        finite(a.div(b)?)
    }
    fn powi(&self, a: &Jet, k: i32) -> Result<Jet, DomainKind> {
        finite(a.powi(k)?)
    }
    fn powr(&self, a: &Jet, num: i32, den: i32) -> Result<Jet, DomainKind> {
        finite(a.powf(num as f64 / den as f64)?)
    }
    fn call(&self, f: Func, a: &Jet) -> Result<Jet, DomainKind> {
        finite(match f {
            Func::Sqrt => a.sqrt()?,
            Func::Exp => a.exp(),
            Func::Sin => a.sin(),
            Func::Cos => a.cos(),
        })
    }
}

/// All partials of `e` at `p` up to total order `order`.
pub fn eval_jet(e: &Expr, p: &EvalPoint, order: usize) -> Result<Jet, JetError> {
    let alg = JetAlgebra::new(p, order)?;
    Ok(e.evaluate(&alg)?)
}

/// Central-difference estimate of the mixed partial `∂^vars e` at `p`.
///
/// Each distinct variable of multiplicity `m` gets the standard
/// second-order-accurate central stencil for the `m`-th derivative, and the
/// stencils are combined as a tensor product, so the truncation error is
/// `O(h²)`. Stencil points are evaluated in double-double arithmetic to keep
/// rounding well below the `h^-3` amplification of third-order stencils.
/// A denominator or radicand changing sign across the stencil is reported as
/// [`JetError::StencilCrossesPole`].
pub fn finite_difference(e: &Expr, p: &EvalPoint, vars: &[Var], h: f64) -> Result<f64, JetError> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(JetError::BadStep(h));
    }
    if vars.is_empty() || vars.len() > 3 {
        return Err(JetError::StencilOrder(vars.len()));
    }
    let n = p.dim();
    for v in vars {
        let i = match v {
            Var::X(i) | Var::Y(i) => *i,
        };
        if i >= n {
            return Err(JetError::VariableOutOfRange(v.to_string()));
        }
    }
    let mut distinct: Vec<(Var, usize)> = Vec::new();
    for v in vars {
        match distinct.iter_mut().find(|(w, _)| w == v) {
            Some((_, m)) => *m += 1,
            None => distinct.push((*v, 1)),
        }
    }
    // (offset in units of h, weight) per multiplicity.
    let stencil = |m: usize| -> (&'static [(f64, f64)], i32) {
        match m {
            1 => (&[(1.0, 0.5), (-1.0, -0.5)], 1),
            2 => (&[(1.0, 1.0), (0.0, -2.0), (-1.0, 1.0)], 2),
            _ => (&[(2.0, 0.5), (1.0, -1.0), (-1.0, 1.0), (-2.0, -0.5)], 3),
        }
    };

    let mut points: Vec<(Vec<f64>, f64)> = vec![(vec![0.0; 2 * n], 1.0)];
    let mut power = 0;
    for (v, m) in &distinct {
        let (taps, pw) = stencil(*m);
        power += pw;
        let slot = v.slot(n);
        points = points
            .into_iter()
            .flat_map(|(off, w)| {
                taps.iter().map(move |(o, tw)| {
                    let mut off = off.clone();
                    off[slot] = *o;
                    (off, w * tw)
                })
            })
            .collect();
    }

    let mut oracle = DdStencil::new(p, h);
    let mut signature: Option<Vec<i8>> = None;
    let mut total = twofloat::TwoFloat::from(0.0);
    for (offset, weight) in &points {
        let (value, signs) = oracle.evaluate(e, offset)?;
        match &signature {
            None => signature = Some(signs.iter().map(|s| s.0).collect()),
            Some(sig) => {
                if let Some(k) = sig.iter().zip(&signs).position(|(a, b)| *a != b.0) {
                    return Err(JetError::StencilCrossesPole { subexpr: signs[k].1.clone() });
                }
            }
        }
        total += value * *weight;
    }
    let total: f64 = total.into();
    Ok(total / h.powi(power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;
    use std::f64::consts::FRAC_PI_2;

    fn point(x: &[f64], y: &[f64]) -> EvalPoint {
        EvalPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    #[test]
    fn bilinear_monomial() {
        let e = parse_expr("x1*y2", 2).unwrap();
        let j = eval_jet(&e, &point(&[0.3, -0.7], &[1.1, 2.0]), 2).unwrap();
        let vars = [Var::X(0), Var::X(1), Var::Y(0), Var::Y(1)];
        for a in vars {
            for b in vars {
                let expect =
                    if (a, b) == (Var::X(0), Var::Y(1)) || (a, b) == (Var::Y(1), Var::X(0)) { 1.0 } else { 0.0 };
                assert_eq!(j.partial(&[a, b]), expect, "{a} {b}");
            }
        }
    }

    #[test]
    fn norm_gradient() {
        let e = parse_expr("sqrt(y1^2+y2^2)", 2).unwrap();
        let j = eval_jet(&e, &point(&[0.0, 0.0], &[3.0, 4.0]), 1).unwrap();
        assert!((j.partial(&[Var::Y(0)]) - 0.6).abs() < 1e-15);
        assert_eq!(j.value(), 5.0);
    }

    #[test]
    fn exp_sin_mixed() {
        let e = parse_expr("exp(x1)*sin(x2)", 3).unwrap();
        let j = eval_jet(&e, &point(&[0.0, FRAC_PI_2, 0.0], &[1.0, 0.0, 0.0]), 2).unwrap();
        assert!(j.partial(&[Var::X(0), Var::X(1)]).abs() < 1e-16);
        assert!((j.partial(&[Var::X(0), Var::X(0)]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_storage_is_bit_identical() {
        let e = parse_expr("sin(x1*y2) / (2 + x2^2 * y1)", 2).unwrap();
        let j = eval_jet(&e, &point(&[0.4, 0.1], &[0.5, -0.3]), 4).unwrap();
        let a = j.partial(&[Var::X(0), Var::Y(1), Var::X(0), Var::Y(0)]);
        let b = j.partial(&[Var::Y(0), Var::X(0), Var::X(0), Var::Y(1)]);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rejects_excessive_order() {
        let e = parse_expr("x1", 1).unwrap();
        assert!(matches!(eval_jet(&e, &point(&[0.0], &[1.0]), MAX_JET_ORDER + 1), Err(JetError::OrderTooHigh(_))));
    }

    #[test]
    fn domain_error_carries_subexpression() {
        let e = parse_expr("x1 + 1/(x1 - x1)", 1).unwrap();
        let err = eval_jet(&e, &point(&[0.5], &[1.0]), 2).unwrap_err();
        match err {
            JetError::Domain(d) => {
                assert_eq!(d.kind, DomainKind::DivisionByZero);
                assert!(d.subexpr.contains("x1 - x1"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fd_square() {
        let e = parse_expr("x1^2", 1).unwrap();
        let d = finite_difference(&e, &point(&[3.0], &[1.0]), &[Var::X(0)], 1e-5).unwrap();
        assert!((d - 6.0).abs() < 1e-9);
    }

    #[test]
    fn fd_matches_jet_on_norm() {
        let e = parse_expr("sqrt(y1^2+y2^2+y3^2)", 3).unwrap();
        let p = point(&[0.0; 3], &[0.3, -1.2, 0.8]);
        let j = eval_jet(&e, &p, 1).unwrap();
        for i in 0..3 {
            let fd = finite_difference(&e, &p, &[Var::Y(i)], 1e-5).unwrap();
            assert!((fd - j.partial(&[Var::Y(i)])).abs() < 1e-6);
        }
    }

    #[test]
    fn fd_third_order_mixed() {
        let e = parse_expr("exp(x1) * sin(x2) * (1 + y1^2)^(1/4)", 2).unwrap();
        let p = point(&[0.2, 0.7], &[0.9, 0.1]);
        let j = eval_jet(&e, &p, 3).unwrap();
        for vars in
            [[Var::X(0), Var::X(1), Var::Y(0)], [Var::Y(0), Var::Y(0), Var::Y(0)], [Var::X(1), Var::X(1), Var::Y(0)]]
        {
            let fd = finite_difference(&e, &p, &vars, 1e-5).unwrap();
            let exact = j.partial(&vars);
            assert!((fd - exact).abs() / (1.0 + exact.abs()) < 1e-7, "{vars:?}: {fd} vs {exact}");
        }
    }

    #[test]
    fn fd_stencil_crossing_pole() {
        let e = parse_expr("1/x1", 1).unwrap();
        let err = finite_difference(&e, &point(&[0.5e-5], &[1.0]), &[Var::X(0)], 1e-5).unwrap_err();
        assert!(matches!(err, JetError::StencilCrossesPole { .. }), "{err:?}");
    }

    #[test]
    fn fd_rejects_bad_arguments() {
        let e = parse_expr("x1", 1).unwrap();
        let p = point(&[0.0], &[1.0]);
        assert!(matches!(finite_difference(&e, &p, &[Var::X(0)], 0.0), Err(JetError::BadStep(_))));
        assert!(matches!(finite_difference(&e, &p, &[Var::X(0); 4], 1e-5), Err(JetError::StencilOrder(4))));
    }
}
