//! h-curvature of the Cartan connection and the tensors built from it.
//!
//! Conventions: the mixed tensor `Rⁱⱼₖₗ` is stored at `[i, j, k, l]` with
//! `R(e_k, e_l)e_j = Rⁱⱼₖₗ e_i`, and `𝐑(X,Y,Z,W) = g(R(X,Y)Z, W)`, so
//! `𝐑_abcd = g_dm Rᵐ_cab`. The sign makes `𝐑 = κ𝐆` on a space of constant
//! curvature `κ`. Ricci traces the second and fourth slots of `𝐑`.

use serde::{Deserialize, Serialize};

use crate::connection::{Pipeline, PipelineError};
use crate::jet::Jet;
use crate::metric::{EvalPoint, MetricSpec};
use crate::tensor::{JetField, Ring, Symmetry, Tensor, TensorAtPoint, TensorError, Variance};

/// Curvature-level objects whose h-covariant derivative can be requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureId {
    Curvature,
    Ricci,
    Scalar,
    Concircular,
    Conharmonic,
}

/// Tolerance for the horizontal-integrability flag.
pub const INTEGRABILITY_TOL: f64 = 1e-9;

fn require_n3(n: usize) -> Result<(), PipelineError> {
    if n < 3 {
        Err(PipelineError::DimensionTooSmall { n, need: 3 })
    } else {
        Ok(())
    }
}

/// `𝐆(X,Y,Z,W) = g(X,Z)g(Y,W) − g(Y,Z)g(X,W)`.
pub fn big_g<T: Ring>(g: &Tensor<T>) -> Tensor<T> {
    Tensor::big_g(g)
}

/// `𝐂 = 𝐑 − r/(n(n−1)) 𝐆`.
pub fn concircular<T: Ring>(riem: &Tensor<T>, g: &Tensor<T>, r: &T) -> Tensor<T> {
    let n = g.dim() as f64;
    riem.sub(&big_g(g).scale_by(r).scale(1.0 / (n * (n - 1.0))))
}

/// `ℂ = 𝐑 − 1/(n−2) (g ∧ Ric)`.
pub fn conharmonic<T: Ring>(riem: &Tensor<T>, g: &Tensor<T>, ric: &Tensor<T>) -> Result<Tensor<T>, PipelineError> {
    let n = g.dim();
    require_n3(n)?;
    Ok(riem.sub(&Tensor::kulkarni_nomizu_unchecked(g, ric).scale(1.0 / (n as f64 - 2.0))))
}

/// `ℋ = 𝐑 − 1/(2(n−1)) (g ∧ Ric)`.
pub fn h_tensor<T: Ring>(riem: &Tensor<T>, g: &Tensor<T>, ric: &Tensor<T>) -> Result<Tensor<T>, PipelineError> {
    let n = g.dim();
    require_n3(n)?;
    Ok(riem.sub(&Tensor::kulkarni_nomizu_unchecked(g, ric).scale(1.0 / (2.0 * (n as f64 - 1.0)))))
}

/// `Ric(X,Z) = g^{YW} 𝐑(X,Y,Z,W)`.
pub fn ricci<T: Ring>(riem: &Tensor<T>, ginv: &Tensor<T>) -> Tensor<T> {
    riem.contract(1, 3, ginv)
}

/// `(Ric_o)ⁱⱼ = gⁱᵏ Ric_jk`, stored at `[i, j]`.
pub fn ricci_operator<T: Ring>(ric: &Tensor<T>, ginv: &Tensor<T>) -> Tensor<T> {
    let n = ric.dim();
    Tensor::from_fn_with(n, vec![Variance::Contra, Variance::Co], |idx| {
        let mut acc = ginv.get(&[idx[0], 0]).mul(ric.get(&[idx[1], 0]));
        for k in 1..n {
            acc = acc.add(&ginv.get(&[idx[0], k]).mul(ric.get(&[idx[1], k])));
        }
        acc
    })
}

/// `r = g^{ac} Ric_ac`.
pub fn scalar_r<T: Ring>(ric: &Tensor<T>, ginv: &Tensor<T>) -> T {
    ric.contract(0, 1, ginv).data()[0].clone()
}

/// `(g ∧ t_m)` for each leading slot `m` of a rank-3 tensor, as a rank-5 tensor.
pub fn kn_slotwise(g: &TensorAtPoint, t: &TensorAtPoint) -> TensorAtPoint {
    let n = g.dim();
    assert_eq!(t.rank(), 3);
    let parts: Vec<TensorAtPoint> = (0..n)
        .map(|m| {
            let tm = TensorAtPoint::from_fn(n, 2, |i| *t.get(&[m, i[0], i[1]]));
            Tensor::kulkarni_nomizu_unchecked(g, &tm)
        })
        .collect();
    TensorAtPoint::from_fn(n, 5, |i| *parts[i[0]].get(&i[1..]))
}

/// Jet-valued curvature fields at one point.
#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub pipe: Pipeline,
    /// Mixed `Rⁱⱼₖₗ`.
    pub mixed: JetField,
    /// Lowered `𝐑_abcd`.
    pub riem: JetField,
    pub ric: JetField,
    /// Rank-0 field holding `r`.
    pub scalar: JetField,
}

impl CurvatureJets {
    /// Curvature from an order-`order` jet of `L²`; `order ≥ 4`, and 5 for
    /// first h-derivatives.
    pub fn new(spec: &MetricSpec, p: &EvalPoint, order: usize) -> Result<Self, PipelineError> {
        if order < 4 {
            return Err(PipelineError::OrderTooLow { got: order, need: 4 });
        }
        let pipe = Pipeline::new(spec, p, order)?;
        let n = pipe.dim();
        let f = &pipe.f;
        // df[i][j][l][k] = δ_k Fⁱⱼₗ
        let mut df = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    let v: Vec<Jet> = (0..n).map(|k| pipe.delta(f.get(&[i, j, l]), k)).collect();
                    df.push(v);
                }
            }
        }
        let dfi = |i: usize, j: usize, l: usize, k: usize| &df[(i * n + j) * n + l][k];
        // omega[m][k][l] = δ_l Nᵐₖ − δ_k Nᵐₗ
        let mut omega = vec![vec![Vec::new(); n]; n];
        for (m, om) in omega.iter_mut().enumerate() {
            let dn: Vec<Vec<Jet>> =
                (0..n).map(|k| (0..n).map(|l| pipe.delta(&pipe.nonlinear[m][k], l)).collect()).collect();
            for (k, row) in om.iter_mut().enumerate() {
                for l in 0..n {
                    row.push(dn[k][l].sub(&dn[l][k]));
                }
            }
        }
        let zero = dfi(0, 0, 0, 0).zero_like();
        let variance = vec![Variance::Contra, Variance::Co, Variance::Co, Variance::Co];
        let mut mixed = JetField::from_fn_with(n, variance, |_| zero.clone());
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in k + 1..n {
                        // Curvature of ∇ along (δ_k, δ_l) on ∂_j, negated.
                        let mut acc = dfi(i, j, l, k).sub(dfi(i, j, k, l));
                        for m in 0..n {
                            acc = acc
                                .add(&f.get(&[m, j, l]).mul(f.get(&[i, m, k])))
                                .sub(&f.get(&[m, j, k]).mul(f.get(&[i, m, l])))
                                .sub(&pipe.cv.get(&[i, j, m]).mul(&omega[m][k][l]));
                        }
                        mixed.set(&[i, j, l, k], acc.clone());
                        mixed.set(&[i, j, k, l], acc.neg());
                    }
                }
            }
        }
        mixed.declare(&[Symmetry::Antisym(2, 3)]);
        let mut riem = JetField::from_fn(n, 4, |idx| {
            let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = zero.clone();
            for m in 0..n {
                acc = acc.add(&pipe.g.get(&[d, m]).mul(mixed.get(&[m, c, a, b])));
            }
            acc
        });
        riem.declare(&[Symmetry::Antisym(0, 1)]);
        let ric = ricci(&riem, &pipe.ginv);
        let scalar = ric.contract(0, 1, &pipe.ginv);
        Ok(CurvatureJets { pipe, mixed, riem, ric, scalar })
    }

    pub fn dim(&self) -> usize {
        self.pipe.dim()
    }

    pub fn r(&self) -> &Jet {
        &self.scalar.data()[0]
    }

    /// The requested object as a jet field.
    pub fn field(&self, id: CurvatureId) -> Result<JetField, PipelineError> {
        let g = &self.pipe.g;
        Ok(match id {
            CurvatureId::Curvature => self.riem.clone(),
            CurvatureId::Ricci => self.ric.clone(),
            CurvatureId::Scalar => self.scalar.clone(),
            CurvatureId::Concircular => concircular(&self.riem, g, self.r()),
            CurvatureId::Conharmonic => conharmonic(&self.riem, g, &self.ric)?,
        })
    }

    /// `∇ʰ` of the requested object at the point (derivative slot first).
    pub fn nabla(&self, id: CurvatureId) -> Result<TensorAtPoint, PipelineError> {
        if self.pipe.order() < 5 {
            return Err(PipelineError::OrderTooLow { got: self.pipe.order(), need: 5 });
        }
        let field = self.field(id)?;
        Ok(self.pipe.h_covariant_derivative(&field).map(|j| j.value()))
    }

    pub fn at_point(&self) -> CurvatureAtPoint {
        let val = |j: &Jet| j.value();
        let g = self.pipe.g.map(val);
        let ginv = self.pipe.ginv.map(val);
        let ric = self.ric.map(val);
        CurvatureAtPoint {
            ric_o: ricci_operator(&ric, &ginv),
            r: self.r().value(),
            big_g: big_g(&g),
            mixed: self.mixed.map(val),
            riem: self.riem.map(val),
            y: self.pipe.point().y.clone(),
            g,
            ginv,
            ric,
        }
    }
}

/// Curvature values at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureAtPoint {
    pub y: Vec<f64>,
    pub g: TensorAtPoint,
    pub ginv: TensorAtPoint,
    pub mixed: TensorAtPoint,
    pub riem: TensorAtPoint,
    pub ric: TensorAtPoint,
    pub ric_o: TensorAtPoint,
    pub r: f64,
    pub big_g: TensorAtPoint,
}

/// `R̂ⁱₖₗ = yʲ Rⁱⱼₖₗ` and the horizontal-integrability verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct VhTorsion {
    pub tensor: TensorAtPoint,
    pub max_abs: f64,
    pub horizontally_integrable: bool,
}

impl CurvatureAtPoint {
    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn concircular(&self) -> TensorAtPoint {
        concircular(&self.riem, &self.g, &self.r)
    }

    pub fn conharmonic(&self) -> Result<TensorAtPoint, PipelineError> {
        conharmonic(&self.riem, &self.g, &self.ric)
    }

    pub fn h_tensor(&self) -> Result<TensorAtPoint, PipelineError> {
        h_tensor(&self.riem, &self.g, &self.ric)
    }

    /// `max |Ric − Ricᵀ|`.
    pub fn ricci_asymmetry(&self) -> f64 {
        self.ric.symmetry_residual(Symmetry::Sym(0, 1))
    }

    pub fn vh_torsion(&self) -> VhTorsion {
        let n = self.dim();
        let variance = vec![Variance::Contra, Variance::Co, Variance::Co];
        let tensor = TensorAtPoint::from_fn_with(n, variance, |i| {
            (0..n).map(|j| self.y[j] * self.mixed.get(&[i[0], j, i[1], i[2]])).sum()
        });
        let max_abs = tensor.max_abs();
        VhTorsion {
            horizontally_integrable: max_abs < INTEGRABILITY_TOL * self.riem.max_abs().max(1.0),
            tensor,
            max_abs,
        }
    }
}

/// Lowered and mixed h-curvature at `p`.
pub fn h_curvature(spec: &MetricSpec, p: &EvalPoint) -> Result<CurvatureAtPoint, PipelineError> {
    Ok(CurvatureJets::new(spec, p, 4)?.at_point())
}

pub fn vh_torsion(spec: &MetricSpec, p: &EvalPoint) -> Result<VhTorsion, PipelineError> {
    Ok(h_curvature(spec, p)?.vh_torsion())
}

/// `∇ʰ` of a curvature object at `p`.
pub fn nabla_h_of(id: CurvatureId, spec: &MetricSpec, p: &EvalPoint) -> Result<TensorAtPoint, PipelineError> {
    CurvatureJets::new(spec, p, 5)?.nabla(id)
}

/// `max |∇ℂ − ∇𝐑 + 1/(n−2) g∧∇Ric|`.
pub fn conharmonic_decomposition_residual(
    g: &TensorAtPoint,
    nabla_riem: &TensorAtPoint,
    nabla_ric: &TensorAtPoint,
    nabla_ch: &TensorAtPoint,
) -> f64 {
    let n = g.dim() as f64;
    let mut expected = nabla_riem.clone();
    expected.axpy(-1.0 / (n - 2.0), &kn_slotwise(g, nabla_ric));
    nabla_ch.max_diff(&expected)
}

/// `(d̄A)(U,V) = (∇A)(U,V) − (∇A)(V,U)` from `∇A` with the derivative slot first.
pub fn dbar_of(nabla_a: &TensorAtPoint) -> TensorAtPoint {
    assert_eq!(nabla_a.rank(), 2);
    let mut out = TensorAtPoint::from_fn(nabla_a.dim(), 2, |i| nabla_a.get(&[i[0], i[1]]) - nabla_a.get(&[i[1], i[0]]));
    out.declare(&[Symmetry::Antisym(0, 1)]);
    out
}

/// `d̄A` for a 1-form field given by its jet components.
pub fn dbar(pipe: &Pipeline, a: &JetField) -> TensorAtPoint {
    dbar_of(&pipe.h_covariant_derivative(a).map(|j| j.value()))
}

/// `(R(U,V)·T)(X,Y,Z,W) = −T(R(U,V)X,Y,Z,W) − … − T(X,Y,Z,R(U,V)W)`.
pub fn curvature_action(
    mixed: &TensorAtPoint,
    t: &TensorAtPoint,
    u: &[f64],
    v: &[f64],
) -> Result<TensorAtPoint, TensorError> {
    let n = mixed.dim();
    if mixed.rank() != 4 || t.rank() != 4 || t.dim() != n || u.len() != n || v.len() != n {
        return Err(TensorError::Shape("curvature action needs rank-4 inputs of one dimension".into()));
    }
    // m[i][j] = Rⁱⱼₖₗ Uᵏ Vˡ
    let mut m = vec![vec![0.0; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for k in 0..n {
                for l in 0..n {
                    *cell += mixed.get(&[i, j, k, l]) * u[k] * v[l];
                }
            }
        }
    }
    let mut src = [0usize; 4];
    Ok(TensorAtPoint::from_fn(n, 4, |idx| {
        let mut acc = 0.0;
        for s in 0..4 {
            src.copy_from_slice(idx);
            for i in 0..n {
                src[s] = i;
                acc -= m[i][idx[s]] * t.get(&src);
            }
        }
        acc
    }))
}

/// Cyclic sum over three distinct slots `(i, j, k)`:
/// `T(…a…b…c…) + T(…b…c…a…) + T(…c…a…b…)`.
pub fn cyclic_sum_args(t: &TensorAtPoint, slots: (usize, usize, usize)) -> Result<TensorAtPoint, TensorError> {
    let (i, j, k) = slots;
    let rank = t.rank();
    if i == j || j == k || i == k || i >= rank || j >= rank || k >= rank {
        return Err(TensorError::Shape(format!("invalid cyclic slots {slots:?} for rank {rank}")));
    }
    let mut src = vec![0; rank];
    Ok(TensorAtPoint::from_fn_with(t.dim(), t.variance().to_vec(), |idx| {
        let (a, b, c) = (idx[i], idx[j], idx[k]);
        let mut acc = 0.0;
        for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
            src.copy_from_slice(idx);
            src[i] = p;
            src[j] = q;
            src[k] = r;
            acc += t.get(&src);
        }
        acc
    }))
}

/// Cyclic sum over the argument pairs `(0,1)`, `(2,3)`, `(4,5)` of a rank-6 tensor.
pub fn cyclic_sum_pairs(t: &TensorAtPoint) -> Result<TensorAtPoint, TensorError> {
    if t.rank() != 6 {
        return Err(TensorError::Shape("pair cyclic sum needs a rank-6 tensor".into()));
    }
    Ok(TensorAtPoint::from_fn(t.dim(), 6, |i| {
        let p = [(i[0], i[1]), (i[2], i[3]), (i[4], i[5])];
        let mut acc = 0.0;
        for s in 0..3 {
            let (a, b, c) = (p[s], p[(s + 1) % 3], p[(s + 2) % 3]);
            acc += t.get(&[a.0, a.1, b.0, b.1, c.0, c.1]);
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::metric::sample_points;

    fn sample(spec: &MetricSpec, seed: u64) -> EvalPoint {
        sample_points(&spec.sample_box(), 1, seed).remove(0)
    }

    #[test]
    fn sphere_and_hyperbolic_constant_curvature() {
        for (spec, kappa) in [(corpus::sphere(3), 1.0), (corpus::hyperbolic(3), -1.0)] {
            let c = h_curvature(&spec, &sample(&spec, 2)).unwrap();
            let expected = c.big_g.scale(kappa);
            assert!(c.riem.max_diff(&expected) < 1e-7, "{}", spec.name());
            assert!(c.ric.max_diff(&c.g.scale(2.0 * kappa)) < 1e-7);
            assert!((c.r - 6.0 * kappa).abs() < 1e-7);
            assert!(c.concircular().max_abs() < 1e-7);
            let ch = c.conharmonic().unwrap();
            assert!(ch.max_diff(&c.big_g.scale(-3.0 * kappa)) < 1e-7);
            assert!(!c.vh_torsion().horizontally_integrable);
        }
    }

    #[test]
    fn flat_families() {
        for spec in [corpus::euclidean(3), corpus::quartic_minkowski(3)] {
            let c = h_curvature(&spec, &sample(&spec, 5)).unwrap();
            assert_eq!(c.riem.max_abs(), 0.0);
            assert!(c.vh_torsion().horizontally_integrable);
            assert_eq!(c.r, 0.0);
        }
    }

    #[test]
    fn randers_metricity_consequence_and_decomposition() {
        let spec = corpus::randers_varying(3);
        let p = sample(&spec, 8);
        let cj = CurvatureJets::new(&spec, &p, 5).unwrap();
        let c = cj.at_point();
        let scale = c.riem.max_abs().max(1.0);
        assert!(c.riem.symmetry_residual(Symmetry::Antisym(2, 3)) < 1e-9 * scale);
        let res = conharmonic_decomposition_residual(
            &c.g,
            &cj.nabla(CurvatureId::Curvature).unwrap(),
            &cj.nabla(CurvatureId::Ricci).unwrap(),
            &cj.nabla(CurvatureId::Conharmonic).unwrap(),
        );
        assert!(res < 1e-9, "{res}");
    }

    #[test]
    fn sphere_is_locally_symmetric() {
        let spec = corpus::sphere(3);
        let cj = CurvatureJets::new(&spec, &sample(&spec, 4), 5).unwrap();
        for id in [CurvatureId::Curvature, CurvatureId::Ricci, CurvatureId::Scalar] {
            assert!(cj.nabla(id).unwrap().max_abs() < 1e-7);
        }
    }

    #[test]
    fn curvature_action_is_linear_and_kills_g_wedge_g() {
        let spec = corpus::sphere(3);
        let c = h_curvature(&spec, &sample(&spec, 6)).unwrap();
        let gg = Tensor::kulkarni_nomizu_unchecked(&c.g, &c.g);
        let (u, v) = ([0.3, -1.0, 0.2], [0.5, 0.1, 0.9]);
        let a = curvature_action(&c.mixed, &gg, &u, &v).unwrap();
        assert!(a.max_abs() < 1e-7);
        let r1 = curvature_action(&c.mixed, &c.riem, &u, &v).unwrap();
        let r2 = curvature_action(&c.mixed, &c.riem.scale(2.0), &u, &v).unwrap();
        assert_eq!(r2, r1.scale(2.0));
    }

    #[test]
    fn cyclic_sums() {
        let t = TensorAtPoint::from_fn(3, 4, |i| (i[0] * 7 + i[1] * 3 + i[2] * i[3] + 1) as f64);
        let once = cyclic_sum_args(&t, (0, 1, 2)).unwrap();
        let twice = cyclic_sum_args(&once, (0, 1, 2)).unwrap();
        assert!(twice.max_diff(&once.scale(3.0)) < 1e-12);
        assert!(cyclic_sum_args(&t, (0, 0, 2)).is_err());
        let zero = TensorAtPoint::zeros(3, 6);
        assert_eq!(cyclic_sum_pairs(&zero).unwrap().max_abs(), 0.0);
    }
}
