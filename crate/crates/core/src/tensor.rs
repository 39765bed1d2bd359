//! Dense small tensors with index-variance and symmetry metadata.
//!
//! Components are stored row-major in an `n^rank` array. The element type is
//! generic so the same code builds tensors of plain numbers and tensor
//! fields whose components are [`Jet`]s.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::Jet;

/// Commutative ring operations needed by tensor algebra.
pub trait Ring: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl Ring for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
}

impl Ring for Jet {
    fn zero_like(&self) -> Self {
        Jet::zero_like(self)
    }
    fn add(&self, other: &Self) -> Self {
        Jet::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Jet::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Jet::mul(self, other)
    }
    fn scale(&self, s: f64) -> Self {
        Jet::scale(self, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Co,
    Contra,
}

/// Declared index symmetry (zero-based slots).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Antisym(usize, usize),
    Sym(usize, usize),
    /// `T(a,b,c,d) = T(c,d,a,b)`.
    PairSym,
    TotallySym,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("declared symmetry {symmetry:?} violated by {residual:e}")]
    SymmetryViolated { symmetry: Symmetry, residual: f64 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("Kulkarni-Nomizu product needs symmetric rank-2 inputs (asymmetry {0:e})")]
    AsymmetricInput(f64),
    #[error("metric is singular")]
    SingularMetric,
}

/// Relative tolerance for declared symmetries.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    n: usize,
    variance: Vec<Variance>,
    symmetries: Vec<Symmetry>,
    data: Vec<T>,
}

/// A tensor of numbers at one point.
pub type TensorAtPoint = Tensor<f64>;
/// A tensor field given by jet-valued components.
pub type JetField = Tensor<Jet>;

fn covariant(rank: usize) -> Vec<Variance> {
    vec![Variance::Co; rank]
}

/// Iterates all multi-indices of `rank` slots over `0..n` in row-major order.
pub fn multi_indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(rank as u32);
    (0..total).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in (0..rank).rev() {
            idx[slot] = flat % n;
            flat /= n;
        }
        idx
    })
}

impl<T: Clone> Tensor<T> {
    pub fn from_fn_with(n: usize, variance: Vec<Variance>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let rank = variance.len();
        let data = multi_indices(n, rank).map(|i| f(&i)).collect();
        Tensor { n, variance, symmetries: Vec::new(), data }
    }

    /// Covariant tensor of the given rank.
    pub fn from_fn(n: usize, rank: usize, f: impl FnMut(&[usize]) -> T) -> Self {
        Self::from_fn_with(n, covariant(rank), f)
    }

    pub fn from_data(n: usize, variance: Vec<Variance>, data: Vec<T>) -> Result<Self, TensorError> {
        let expected = n.pow(variance.len() as u32);
        if data.len() != expected {
            return Err(TensorError::Shape(format!(
                "{} components for rank {} in dimension {n}",
                data.len(),
                variance.len()
            )));
        }
        Ok(Tensor { n, variance, symmetries: Vec::new(), data })
    }

    /// Records symmetries without checking them; for tensors symmetric by construction.
    pub fn declare(&mut self, symmetries: &[Symmetry]) {
        self.symmetries = symmetries.to_vec();
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn symmetries(&self) -> &[Symmetry] {
        &self.symmetries
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: T) {
        let k = self.flat_index(idx);
        self.data[k] = value;
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Tensor<U> {
        Tensor {
            n: self.n,
            variance: self.variance.clone(),
            symmetries: self.symmetries.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    /// Reorders slots: output slot `k` is input slot `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let rank = self.rank();
        assert_eq!(perm.len(), rank);
        let variance = perm.iter().map(|&p| self.variance[p]).collect();
        Tensor::from_fn_with(self.n, variance, |idx| {
            let mut src = vec![0; rank];
            for (k, &p) in perm.iter().enumerate() {
                src[p] = idx[k];
            }
            self.get(&src).clone()
        })
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.n == other.n && self.rank() == other.rank()
    }
}

impl<T: Ring> Tensor<T> {
    pub fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert!(self.same_shape(other), "tensor shape mismatch");
        Tensor {
            n: self.n,
            variance: self.variance.clone(),
            symmetries: Vec::new(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut t = self.map(|a| a.scale(s));
        t.symmetries = self.symmetries.clone();
        t
    }

    /// Multiplies every component by the scalar `s`.
    pub fn scale_by(&self, s: &T) -> Self {
        self.map(|a| a.mul(s))
    }

    /// `A ⊗ T` with the form's slot first.
    pub fn outer_form(form: &[T], t: &Self) -> Self {
        assert_eq!(form.len(), t.n);
        let mut variance = vec![Variance::Co];
        variance.extend(&t.variance);
        Tensor::from_fn_with(t.n, variance, |idx| form[idx[0]].mul(t.get(&idx[1..])))
    }

    /// `S ⊗ T`, slots of `S` first.
    pub fn outer(s: &Self, t: &Self) -> Self {
        assert_eq!(s.n, t.n);
        let k = s.rank();
        let mut variance = s.variance.clone();
        variance.extend(&t.variance);
        Tensor::from_fn_with(t.n, variance, |idx| s.get(&idx[..k]).mul(t.get(&idx[k..])))
    }

    /// Metric trace of slots `a < b` with the inverse metric `ginv`.
    pub fn contract(&self, a: usize, b: usize, ginv: &Self) -> Self {
        assert!(a < b && b < self.rank(), "invalid contraction slots");
        let n = self.n;
        let variance: Vec<Variance> =
            self.variance.iter().enumerate().filter(|(k, _)| *k != a && *k != b).map(|(_, v)| *v).collect();
        let mut full = vec![0; self.rank()];
        Tensor::from_fn_with(n, variance, |idx| {
            let mut it = idx.iter();
            for (k, slot) in full.iter_mut().enumerate() {
                if k != a && k != b {
                    *slot = *it.next().expect("index length");
                }
            }
            let mut acc: Option<T> = None;
            for i in 0..n {
                for j in 0..n {
                    full[a] = i;
                    full[b] = j;
                    let term = ginv.get(&[i, j]).mul(self.get(&full));
                    acc = Some(match acc {
                        None => term,
                        Some(s) => s.add(&term),
                    });
                }
            }
            acc.expect("n >= 1")
        })
    }

    /// Plain trace of slots `a < b` (one contravariant, one covariant).
    pub fn trace(&self, a: usize, b: usize) -> Self {
        assert!(a < b && b < self.rank(), "invalid trace slots");
        let n = self.n;
        let variance: Vec<Variance> =
            self.variance.iter().enumerate().filter(|(k, _)| *k != a && *k != b).map(|(_, v)| *v).collect();
        let mut full = vec![0; self.rank()];
        Tensor::from_fn_with(n, variance, |idx| {
            let mut it = idx.iter();
            for (k, slot) in full.iter_mut().enumerate() {
                if k != a && k != b {
                    *slot = *it.next().expect("index length");
                }
            }
            full[a] = 0;
            full[b] = 0;
            let mut acc = self.get(&full).clone();
            for i in 1..n {
                full[a] = i;
                full[b] = i;
                acc = acc.add(self.get(&full));
            }
            acc
        })
    }

    /// `(s ∧ t)(X,Y,Z,W) = s(X,Z)t(Y,W) + s(Y,W)t(X,Z) − s(X,W)t(Y,Z) − s(Y,Z)t(X,W)`.
    pub fn kulkarni_nomizu_unchecked(s: &Self, t: &Self) -> Self {
        assert!(s.rank() == 2 && t.rank() == 2 && s.n == t.n);
        let mut out = Tensor::from_fn(s.n, 4, |i| {
            let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
            s.get(&[x, z])
                .mul(t.get(&[y, w]))
                .add(&s.get(&[y, w]).mul(t.get(&[x, z])))
                .sub(&s.get(&[x, w]).mul(t.get(&[y, z])))
                .sub(&s.get(&[y, z]).mul(t.get(&[x, w])))
        });
        out.symmetries = vec![Symmetry::Antisym(0, 1), Symmetry::Antisym(2, 3), Symmetry::PairSym];
        out
    }

    /// `G(X,Y,Z,W) = g(X,Z)g(Y,W) − g(Y,Z)g(X,W)`.
    pub fn big_g(g: &Self) -> Self {
        assert!(g.rank() == 2);
        let mut out = Tensor::from_fn(g.n, 4, |i| {
            let (x, y, z, w) = (i[0], i[1], i[2], i[3]);
            g.get(&[x, z]).mul(g.get(&[y, w])).sub(&g.get(&[y, z]).mul(g.get(&[x, w])))
        });
        out.symmetries = vec![Symmetry::Antisym(0, 1), Symmetry::Antisym(2, 3), Symmetry::PairSym];
        out
    }
}

impl Tensor<f64> {
    pub fn zeros(n: usize, rank: usize) -> Self {
        Tensor::from_fn(n, rank, |_| 0.0)
    }

    /// Attaches symmetries after checking each within [`SYMMETRY_TOL`]
    /// relative to the largest component.
    pub fn with_symmetries(mut self, symmetries: &[Symmetry]) -> Result<Self, TensorError> {
        let scale = self.max_abs().max(1.0);
        for s in symmetries {
            let r = self.symmetry_residual(*s);
            if r > SYMMETRY_TOL * scale {
                return Err(TensorError::SymmetryViolated { symmetry: *s, residual: r });
            }
        }
        self.symmetries = symmetries.to_vec();
        Ok(self)
    }

    /// Largest violation of `s` over all components.
    pub fn symmetry_residual(&self, s: Symmetry) -> f64 {
        let rank = self.rank();
        let swap = |idx: &[usize], a: usize, b: usize| {
            let mut j = idx.to_vec();
            j.swap(a, b);
            j
        };
        multi_indices(self.n, rank)
            .map(|idx| {
                let v = self.get(&idx);
                match s {
                    Symmetry::Antisym(a, b) => (v + self.get(&swap(&idx, a, b))).abs(),
                    Symmetry::Sym(a, b) => (v - self.get(&swap(&idx, a, b))).abs(),
                    Symmetry::PairSym => {
                        let j = [idx[2], idx[3], idx[0], idx[1]];
                        (v - self.get(&j)).abs()
                    }
                    Symmetry::TotallySym => (1..rank)
                        .map(|k| (v - self.get(&swap(&idx, 0, k))).abs())
                        .chain((2..rank).map(|k| (v - self.get(&swap(&idx, 1, k))).abs()))
                        .fold(0.0, f64::max),
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest componentwise difference.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "tensor shape mismatch");
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "tensor shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn axpy(&mut self, s: f64, other: &Self) {
        assert!(self.same_shape(other), "tensor shape mismatch");
        self.symmetries.clear();
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Kulkarni-Nomizu product; both inputs must be symmetric.
    pub fn kulkarni_nomizu(s: &Self, t: &Self) -> Result<Self, TensorError> {
        if s.rank() != 2 || t.rank() != 2 || s.n != t.n {
            return Err(TensorError::Shape("Kulkarni-Nomizu needs two rank-2 tensors".into()));
        }
        for m in [s, t] {
            let r = m.symmetry_residual(Symmetry::Sym(0, 1));
            if r > SYMMETRY_TOL * m.max_abs().max(1.0) {
                return Err(TensorError::AsymmetricInput(r));
            }
        }
        Ok(Self::kulkarni_nomizu_unchecked(s, t))
    }

    /// Symmetric part of a rank-2 tensor.
    pub fn symmetrized(&self) -> Self {
        assert_eq!(self.rank(), 2);
        Tensor::from_fn_with(self.n, self.variance.clone(), |i| {
            0.5 * (self.get(&[i[0], i[1]]) + self.get(&[i[1], i[0]]))
        })
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        assert_eq!(self.rank(), 2);
        DMatrix::from_fn(self.n, self.n, |i, j| *self.get(&[i, j]))
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Tensor::from_fn(m.nrows(), 2, |i| m[(i[0], i[1])])
    }

    /// Inverse of a rank-2 tensor, as a contravariant tensor.
    pub fn inverse(&self) -> Result<Self, TensorError> {
        let inv = self.to_matrix().try_inverse().ok_or(TensorError::SingularMetric)?;
        let mut t = Self::from_matrix(&inv);
        t.variance = vec![Variance::Contra; 2];
        Ok(t)
    }

    pub fn dump(&self) -> TensorDump {
        TensorDump { shape: vec![self.n; self.rank()], variance: self.variance.clone(), data: self.data.clone() }
    }

    pub fn from_dump(dump: &TensorDump) -> Result<Self, TensorError> {
        let n = dump.shape.first().copied().unwrap_or(1);
        if dump.shape.iter().any(|&s| s != n) || dump.variance.len() != dump.shape.len() {
            return Err(TensorError::Shape(format!("unsupported shape {:?}", dump.shape)));
        }
        Tensor::from_data(n, dump.variance.clone(), dump.data.clone())
    }
}

/// Serialized tensor: shape header and flat row-major components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDump {
    pub shape: Vec<usize>,
    pub variance: Vec<Variance>,
    pub data: Vec<f64>,
}

/// Covariant 1-form at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OneForm(pub Vec<f64>);

impl OneForm {
    pub fn zeros(n: usize) -> Self {
        OneForm(vec![0.0; n])
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        OneForm(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> OneForm {
        OneForm(self.0.iter().map(|a| a * s).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_diff(&self, other: &OneForm) -> f64 {
        self.0.iter().zip(&other.0).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `sqrt(g^{ij} A_i A_j)`.
    pub fn g_norm(&self, g: &TensorAtPoint) -> Result<f64, TensorError> {
        let v = sharp(self, g)?;
        Ok(v.iter().zip(&self.0).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
    }
}

/// The vector `v` with `g(v, ·) = A`.
pub fn sharp(form: &OneForm, g: &TensorAtPoint) -> Result<Vec<f64>, TensorError> {
    let m = g.to_matrix();
    let lu = m.lu();
    let rhs = nalgebra::DVector::from_column_slice(&form.0);
    let v = lu.solve(&rhs).ok_or(TensorError::SingularMetric)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(TensorError::SingularMetric);
    }
    Ok(v.iter().copied().collect())
}

/// The 1-form `g(v, ·)`.
pub fn flat(v: &[f64], g: &TensorAtPoint) -> OneForm {
    let n = g.dim();
    OneForm((0..n).map(|j| (0..n).map(|i| g.get(&[i, j]) * v[i]).sum()).collect())
}
