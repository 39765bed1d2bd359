//! Finsler metric families, evaluation points and the fundamental tensors.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse_expr, Algebra, DomainError, Expr, ParseError, Var};
use crate::jet::{Jet, JetAlgebra, JetError};
use crate::tensor::{Symmetry, TensorAtPoint};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("{field}: {error}")]
    Parse { field: String, error: ParseError },
    #[error("{field}: expected {expected} entries, got {got}")]
    Shape { field: String, expected: usize, got: usize },
    #[error("a[{i}][{j}] and a[{j}][{i}] differ as written")]
    AsymmetricA { i: usize, j: usize },
    #[error("minkowski L must depend on y only")]
    MinkowskiDependsOnX,
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("L = {0} is not positive")]
    NonPositiveL(f64),
    #[error("fundamental tensor is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
}

/// A point `x` of the chart together with a nonzero direction `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl EvalPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, MetricError> {
        if x.len() != y.len() || x.is_empty() {
            return Err(MetricError::InvalidPoint(format!("x has {} components, y has {}", x.len(), y.len())));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(MetricError::InvalidPoint("non-finite component".into()));
        }
        if y.iter().all(|v| *v == 0.0) {
            return Err(MetricError::InvalidPoint("y must be nonzero".into()));
        }
        Ok(EvalPoint { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Same `x`, direction scaled by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        EvalPoint { x: self.x.clone(), y: self.y.iter().map(|v| v * lambda).collect() }
    }
}

/// Serialized metric: expression strings per family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSource {
    pub name: String,
    pub n: usize,
    #[serde(flatten)]
    pub family: FamilySource,
    /// Per-coordinate sampling bounds, when the chart needs something other
    /// than the default box.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_box: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySource {
    Riemannian { a: Vec<Vec<String>> },
    Randers { a: Vec<Vec<String>>, b: Vec<String> },
    Minkowski { l: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Riemannian { a: Vec<Vec<Expr>> },
    Randers { a: Vec<Vec<Expr>>, b: Vec<Expr> },
    Minkowski { l: Expr },
}

/// A parsed, structurally checked metric. Immutable and cheap to share.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpec {
    inner: Arc<SpecInner>,
}

#[derive(Debug, PartialEq)]
struct SpecInner {
    source: MetricSource,
    family: Family,
}

fn parse_field(src: &str, n: usize, field: String) -> Result<Expr, MetricError> {
    parse_expr(src, n).map_err(|error| MetricError::Parse { field, error })
}

fn parse_matrix(rows: &[Vec<String>], n: usize) -> Result<Vec<Vec<Expr>>, MetricError> {
    if rows.len() != n {
        return Err(MetricError::Shape { field: "a".into(), expected: n, got: rows.len() });
    }
    let mut a = Vec::with_capacity(n);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(MetricError::Shape { field: format!("a[{i}]"), expected: n, got: row.len() });
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(j, s)| parse_field(s, n, format!("a[{i}][{j}]")))
            .collect::<Result<Vec<_>, _>>()?;
        a.push(parsed);
    }
    for i in 0..n {
        for j in i + 1..n {
            if a[i][j] != a[j][i] {
                return Err(MetricError::AsymmetricA { i, j });
            }
        }
    }
    Ok(a)
}

impl MetricSpec {
    pub fn from_source(source: MetricSource) -> Result<Self, MetricError> {
        let n = source.n;
        if n < 2 {
            return Err(MetricError::Dimension(n));
        }
        let family = match &source.family {
            FamilySource::Riemannian { a } => Family::Riemannian { a: parse_matrix(a, n)? },
            FamilySource::Randers { a, b } => {
                if b.len() != n {
                    return Err(MetricError::Shape { field: "b".into(), expected: n, got: b.len() });
                }
                let b = b
                    .iter()
                    .enumerate()
                    .map(|(i, s)| parse_field(s, n, format!("b[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                Family::Randers { a: parse_matrix(a, n)?, b }
            }
            FamilySource::Minkowski { l } => {
                let l = parse_field(l, n, "l".into())?;
                if l.depends_on_x() {
                    return Err(MetricError::MinkowskiDependsOnX);
                }
                Family::Minkowski { l }
            }
        };
        if let Some(b) = &source.sample_box {
            if b.len() != n {
                return Err(MetricError::Shape { field: "sample_box".into(), expected: n, got: b.len() });
            }
        }
        Ok(MetricSpec { inner: Arc::new(SpecInner { source, family }) })
    }

    pub fn name(&self) -> &str {
        &self.inner.source.name
    }

    pub fn dim(&self) -> usize {
        self.inner.source.n
    }

    pub fn family(&self) -> &Family {
        &self.inner.family
    }

    pub fn source(&self) -> &MetricSource {
        &self.inner.source
    }

    pub fn is_riemannian(&self) -> bool {
        matches!(self.inner.family, Family::Riemannian { .. })
    }

    fn check_point(&self, p: &EvalPoint) -> Result<(), MetricError> {
        if p.dim() != self.dim() {
            return Err(MetricError::InvalidPoint(format!(
                "point has dimension {}, metric has {}",
                p.dim(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Jet of `L²` at `p` up to total order `order` in `(x, y)`.
    pub fn l2_jet(&self, p: &EvalPoint, order: usize) -> Result<Jet, MetricError> {
        self.check_point(p)?;
        let n = self.dim();
        let alg = JetAlgebra::new(p, order)?;
        let y: Vec<Jet> = (0..n).map(|i| alg.variable(Var::Y(i))).collect();
        let quad = |a: &[Vec<Expr>]| -> Result<Jet, MetricError> {
            let mut acc = alg.constant(0.0);
            for i in 0..n {
                for j in i..n {
                    let aij = a[i][j].evaluate(&alg)?;
                    let w = if i == j { 1.0 } else { 2.0 };
                    acc.axpy(w, &aij.mul(&y[i]).mul(&y[j]));
                }
            }
            Ok(acc)
        };
        let jet = match &self.inner.family {
            Family::Riemannian { a } => quad(a)?,
            Family::Randers { a, b } => {
                let alpha =
                    quad(a)?.sqrt().map_err(|kind| DomainError { kind, subexpr: "sqrt(a_ij y^i y^j)".into() })?;
                let mut beta = alg.constant(0.0);
                for (bi, yi) in b.iter().zip(&y) {
                    beta.axpy(1.0, &bi.evaluate(&alg)?.mul(yi));
                }
                let l = alpha.add(&beta);
                l.mul(&l)
            }
            Family::Minkowski { l } => {
                let l = l.evaluate(&alg)?;
                l.mul(&l)
            }
        };
        if jet.value() <= 0.0 || !jet.is_finite() {
            return Err(MetricError::NonPositiveL(jet.value().max(0.0).sqrt()));
        }
        Ok(jet)
    }

    /// The Finsler function `L(x, y)`.
    pub fn eval_l(&self, p: &EvalPoint) -> Result<f64, MetricError> {
        self.check_point(p)?;
        let n = self.dim();
        let quad = |a: &[Vec<Expr>]| -> Result<f64, MetricError> {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    acc += a[i][j].eval_f64(&p.x, &p.y)? * p.y[i] * p.y[j];
                }
            }
            Ok(acc)
        };
        let l = match &self.inner.family {
            Family::Riemannian { a } => {
                let q = quad(a)?;
                if q <= 0.0 {
                    return Err(MetricError::NonPositiveL(q));
                }
                q.sqrt()
            }
            Family::Randers { a, b } => {
                let q = quad(a)?;
                if q <= 0.0 {
                    return Err(MetricError::NonPositiveL(q));
                }
                let mut beta = 0.0;
                for (bi, yi) in b.iter().zip(&p.y) {
                    beta += bi.eval_f64(&p.x, &p.y)? * yi;
                }
                q.sqrt() + beta
            }
            Family::Minkowski { l } => l.eval_f64(&p.x, &p.y)?,
        };
        if !(l > 0.0) || !l.is_finite() {
            return Err(MetricError::NonPositiveL(l));
        }
        Ok(l)
    }

    /// `g_ij = ½ ∂²L²/∂yⁱ∂yʲ`, rejected unless positive definite.
    pub fn fundamental_tensor(&self, p: &EvalPoint) -> Result<TensorAtPoint, MetricError> {
        let g = self.fundamental_tensor_unchecked(p)?;
        let min = min_eigenvalue(&g);
        if !(min > 0.0) {
            return Err(MetricError::NotPositiveDefinite(min));
        }
        Ok(g)
    }

    /// `g_ij` without the positive-definiteness check.
    pub fn fundamental_tensor_unchecked(&self, p: &EvalPoint) -> Result<TensorAtPoint, MetricError> {
        let n = self.dim();
        let jet = self.l2_jet(p, 2)?;
        let g = TensorAtPoint::from_fn(n, 2, |i| 0.5 * jet.partial(&[Var::Y(i[0].min(i[1])), Var::Y(i[0].max(i[1]))]));
        Ok(g.with_symmetries(&[Symmetry::Sym(0, 1)]).expect("mixed partials are symmetric by storage"))
    }

    /// `T_ijk = ¼ ∂³L²/∂yⁱ∂yʲ∂yᵏ`.
    pub fn cartan_tensor(&self, p: &EvalPoint) -> Result<TensorAtPoint, MetricError> {
        let n = self.dim();
        let jet = self.l2_jet(p, 3)?;
        let t = TensorAtPoint::from_fn(n, 3, |i| 0.25 * jet.partial(&[Var::Y(i[0]), Var::Y(i[1]), Var::Y(i[2])]));
        Ok(t.with_symmetries(&[Symmetry::TotallySym]).expect("mixed partials are symmetric by storage"))
    }

    /// `a_ij(x)` and `b_i(x)` of a Randers metric, `None` for other families.
    pub fn randers_parts(&self, x: &[f64]) -> Option<Result<(TensorAtPoint, Vec<f64>), MetricError>> {
        let Family::Randers { a, b } = &self.inner.family else {
            return None;
        };
        let n = self.dim();
        let zero = vec![0.0; n];
        let eval = || -> Result<(TensorAtPoint, Vec<f64>), MetricError> {
            let mut am = TensorAtPoint::zeros(n, 2);
            for i in 0..n {
                for j in 0..n {
                    am.set(&[i, j], a[i][j].eval_f64(x, &zero)?);
                }
            }
            let bv = b.iter().map(|e| e.eval_f64(x, &zero)).collect::<Result<Vec<_>, _>>()?;
            Ok((am, bv))
        };
        Some(eval())
    }

    /// Default sampling bounds for `x`.
    pub fn sample_box(&self) -> Vec<[f64; 2]> {
        self.inner.source.sample_box.clone().unwrap_or_else(|| vec![[-0.5, 0.5]; self.dim()])
    }
}

pub fn min_eigenvalue(g: &TensorAtPoint) -> f64 {
    let m: DMatrix<f64> = g.symmetrized().to_matrix();
    m.symmetric_eigen().eigenvalues.min()
}

/// `count` seeded points: `x` uniform in `bounds`, `y` uniform on the unit sphere.
pub fn sample_points(bounds: &[[f64; 2]], count: usize, seed: u64) -> Vec<EvalPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = bounds.len();
    (0..count)
        .map(|_| {
            let x = bounds.iter().map(|[lo, hi]| rng.gen_range(*lo..=*hi)).collect();
            let y = loop {
                // Normal components keep the direction distribution isotropic.
                let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-3 {
                    break y.iter().map(|v| v / norm).collect();
                }
            };
            EvalPoint { x, y }
        })
        .collect()
}

/// Homogeneity factors probed by validation.
pub const HOMOGENEITY_LAMBDAS: [f64; 3] = [0.5, 2.0, 3.0];
pub const HOMOGENEITY_TOL: f64 = 1e-12;
pub const EULER_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleValidation {
    pub index: usize,
    pub homogeneity_residual: f64,
    pub euler_residual: f64,
    pub min_eigenvalue: f64,
    pub positive_definite: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub randers_b_norm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ValidationFailure {
    Evaluation { index: usize, message: String },
    Homogeneity { index: usize, lambda: f64, residual: f64 },
    Euler { index: usize, residual: f64 },
    NotPositiveDefinite { index: usize, min_eigenvalue: f64 },
    StrongConvexity { index: usize, b_norm: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub pass: bool,
    pub min_eigenvalue: f64,
    pub max_homogeneity_residual: f64,
    pub samples: Vec<SampleValidation>,
    pub failures: Vec<ValidationFailure>,
}

fn validate_sample(
    spec: &MetricSpec,
    index: usize,
    p: &EvalPoint,
    failures: &mut Vec<ValidationFailure>,
) -> Result<SampleValidation, MetricError> {
    let l = spec.eval_l(p)?;
    let mut homogeneity_residual: f64 = 0.0;
    for lambda in HOMOGENEITY_LAMBDAS {
        let ls = spec.eval_l(&p.scaled(lambda))?;
        let r = (ls - lambda * l).abs() / (lambda * l);
        homogeneity_residual = homogeneity_residual.max(r);
        if r > HOMOGENEITY_TOL {
            failures.push(ValidationFailure::Homogeneity { index, lambda, residual: r });
        }
    }

    let g = spec.fundamental_tensor_unchecked(p)?;
    let n = spec.dim();
    let mut gyy = 0.0;
    for i in 0..n {
        for j in 0..n {
            gyy += g.get(&[i, j]) * p.y[i] * p.y[j];
        }
    }
    let euler_residual = (gyy - l * l).abs() / (l * l).max(1.0);
    if euler_residual > EULER_TOL {
        failures.push(ValidationFailure::Euler { index, residual: euler_residual });
    }

    let min = min_eigenvalue(&g);
    let positive_definite = min > 0.0;
    if !positive_definite {
        failures.push(ValidationFailure::NotPositiveDefinite { index, min_eigenvalue: min });
    }

    let randers_b_norm = match spec.randers_parts(&p.x) {
        None => None,
        Some(parts) => {
            let (a, b) = parts?;
            let b_norm = crate::tensor::OneForm(b).g_norm(&a).map_err(|e| MetricError::InvalidPoint(e.to_string()))?;
            if !(b_norm < 1.0) {
                failures.push(ValidationFailure::StrongConvexity { index, b_norm });
            }
            Some(b_norm)
        }
    };

    Ok(SampleValidation {
        index,
        homogeneity_residual,
        euler_residual,
        min_eigenvalue: min,
        positive_definite,
        randers_b_norm,
    })
}

/// Sample-based admissibility report. Never aborts: every problem becomes a
/// [`ValidationFailure`].
pub fn validate_metric(spec: &MetricSpec, samples: &[EvalPoint]) -> ValidationReport {
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for (index, p) in samples.iter().enumerate() {
        match validate_sample(spec, index, p, &mut failures) {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(ValidationFailure::Evaluation { index, message: e.to_string() }),
        }
    }
    if samples.is_empty() {
        failures.push(ValidationFailure::Evaluation { index: 0, message: "empty sample list".into() });
    }
    let min_eigenvalue = rows.iter().map(|r| r.min_eigenvalue).fold(f64::INFINITY, f64::min);
    let max_homogeneity_residual = rows.iter().map(|r| r.homogeneity_residual).fold(0.0, f64::max);
    ValidationReport { pass: failures.is_empty(), min_eigenvalue, max_homogeneity_residual, samples: rows, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn pt(x: &[f64], y: &[f64]) -> EvalPoint {
        EvalPoint::new(x.to_vec(), y.to_vec()).unwrap()
    }

    fn randers_const(b1: f64) -> MetricSpec {
        let s = |v: &str| v.to_string();
        MetricSpec::from_source(MetricSource {
            name: "randers".into(),
            n: 3,
            family: FamilySource::Randers {
                a: vec![vec![s("1"), s("0"), s("0")], vec![s("0"), s("1"), s("0")], vec![s("0"), s("0"), s("1")]],
                b: vec![b1.to_string(), s("0"), s("0")],
            },
            sample_box: None,
        })
        .unwrap()
    }

    #[test]
    fn point_rejects_zero_direction() {
        assert!(EvalPoint::new(vec![0.0; 3], vec![0.0; 3]).is_err());
        assert!(EvalPoint::new(vec![0.0; 3], vec![1.0; 2]).is_err());
    }

    #[test]
    fn euclidean_and_randers_values() {
        let e = corpus::euclidean(3);
        assert_eq!(e.eval_l(&pt(&[0.1, 0.2, 0.3], &[3.0, 4.0, 0.0])).unwrap(), 5.0);
        let r = randers_const(0.3);
        let l = r.eval_l(&pt(&[0.0; 3], &[1.0, 0.0, 0.0])).unwrap();
        assert!((l - 1.3).abs() < 1e-15);
    }

    #[test]
    fn riemannian_g_is_a() {
        let s = corpus::sphere(3);
        let p = pt(&[0.1, -0.2, 0.3], &[0.3, 1.0, -2.0]);
        let g = s.fundamental_tensor(&p).unwrap();
        let conf = 4.0 / (1.0f64 + 0.01 + 0.04 + 0.09).powi(2);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { conf } else { 0.0 };
                assert!((g.get(&[i, j]) - want).abs() < 1e-14);
            }
        }
        assert!(s.cartan_tensor(&p).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn randers_g_contracts_to_l2() {
        let r = randers_const(0.3);
        let y = [0.4, -0.7, 1.1];
        let p = pt(&[0.0; 3], &y);
        let g = r.fundamental_tensor(&p).unwrap();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let l2 = (norm + 0.3 * y[0]).powi(2);
        let mut gyy = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                gyy += g.get(&[i, j]) * y[i] * y[j];
            }
        }
        assert!((gyy - l2).abs() < 1e-10);
        let t = r.cartan_tensor(&p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let c: f64 = (0..3).map(|k| t.get(&[i, j, k]) * y[k]).sum();
                assert!(c.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn validation_flags_strong_convexity() {
        let good = validate_metric(&corpus::euclidean(3), &sample_points(&[[-0.5, 0.5]; 3], 5, 1));
        assert!(good.pass);
        assert!((good.min_eigenvalue - 1.0).abs() < 1e-14);
        let bad = validate_metric(&randers_const(1.2), &sample_points(&[[-0.5, 0.5]; 3], 5, 1));
        assert!(!bad.pass);
        assert!(bad.failures.iter().any(|f| matches!(f, ValidationFailure::StrongConvexity { .. })));
    }

    #[test]
    fn structural_checks() {
        let s = |v: &str| v.to_string();
        let asym = MetricSource {
            name: "asym".into(),
            n: 2,
            family: FamilySource::Riemannian { a: vec![vec![s("1"), s("x1")], vec![s("x2"), s("1")]] },
            sample_box: None,
        };
        assert!(matches!(MetricSpec::from_source(asym), Err(MetricError::AsymmetricA { i: 0, j: 1 })));
        let mink = MetricSource {
            name: "m".into(),
            n: 2,
            family: FamilySource::Minkowski { l: s("sqrt(y1^2 + x1^2)") },
            sample_box: None,
        };
        assert_eq!(MetricSpec::from_source(mink).unwrap_err(), MetricError::MinkowskiDependsOnX);
    }

    #[test]
    fn source_round_trips_through_json() {
        let src = corpus::randers_varying(3).source().clone();
        let text = serde_json::to_string(&src).unwrap();
        let back: MetricSource = serde_json::from_str(&text).unwrap();
        assert_eq!(src, back);
    }
}
