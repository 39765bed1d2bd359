//! Cartan connection in local coordinates.
//!
//! With `L²` expanded to order `K` at a point, the objects below come out as
//! jets of decreasing order: `g`, `G` at `K−2`; `N`, `F`, `C` at `K−3`.
//! Each δ-derivative costs one more order.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jet::{Jet, JetSpace, MAX_JET_ORDER};
use crate::metric::{min_eigenvalue, EvalPoint, MetricError, MetricSpec};
use crate::tensor::{JetField, Symmetry, TensorAtPoint, TensorError, Variance};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("jet order {got} is too low, {need} needed")]
    OrderTooLow { got: usize, need: usize },
    #[error("dimension {n} is below the required {need}")]
    DimensionTooSmall { n: usize, need: usize },
}

/// Jet-valued connection objects at one point.
#[derive(Debug, Clone)]
pub struct Pipeline {
    spec: MetricSpec,
    point: EvalPoint,
    order: usize,
    space: Arc<JetSpace>,
    l2: Jet,
    /// `g_ij`.
    pub g: JetField,
    /// `g^ij`.
    pub ginv: JetField,
    /// `Gⁱ`.
    pub spray: Vec<Jet>,
    /// `Nⁱⱼ` stored as `[i][j]`.
    pub nonlinear: Vec<Vec<Jet>>,
    /// `Fⁱⱼₖ` stored at `[i, j, k]`.
    pub f: JetField,
    /// `Cⁱⱼₖ` stored at `[i, j, k]`.
    pub cv: JetField,
}

/// Matrix inverse of a jet-valued matrix by the terminating Neumann series
/// around the inverse of its value.
fn jet_inverse(m: &JetField) -> Result<JetField, PipelineError> {
    let n = m.dim();
    let value = m.map(|j| j.value());
    let v0 = value.inverse()?;
    let order = m.get(&[0, 0]).order();
    let zero = m.get(&[0, 0]).zero_like();
    let mul = |a: &JetField, b: &JetField| {
        JetField::from_fn(n, 2, |i| {
            let mut acc = zero.clone();
            for k in 0..n {
                acc = acc.add(&a.get(&[i[0], k]).mul(b.get(&[k, i[1]])));
            }
            acc
        })
    };
    let v0j = JetField::from_fn(n, 2, |i| {
        let mut j = zero.clone();
        j.axpy(*v0.get(i), &Jet::constant(zero.space(), order, 1.0));
        j
    });
    // h = I − v0·m has no constant term, so hᵏ vanishes beyond `order`.
    let ident = JetField::from_fn(n, 2, |i| Jet::constant(zero.space(), order, if i[0] == i[1] { 1.0 } else { 0.0 }));
    let h = ident.sub(&mul(&v0j, m));
    let mut term = v0j.clone();
    let mut acc = v0j;
    for _ in 0..order {
        term = mul(&h, &term);
        acc = acc.add(&term);
    }
    let mut out = JetField::from_fn_with(n, vec![Variance::Contra; 2], |i| {
        let (a, b) = (i[0].min(i[1]), i[0].max(i[1]));
        acc.get(&[a, b]).clone()
    });
    out.declare(&[Symmetry::Sym(0, 1)]);
    Ok(out)
}

impl Pipeline {
    /// Builds the connection from an order-`order` jet of `L²` (at least 3).
    pub fn new(spec: &MetricSpec, p: &EvalPoint, order: usize) -> Result<Self, PipelineError> {
        if order < 3 {
            return Err(PipelineError::OrderTooLow { got: order, need: 3 });
        }
        if order > MAX_JET_ORDER {
            return Err(MetricError::Jet(crate::jet::JetError::OrderTooHigh(order)).into());
        }
        let n = spec.dim();
        let l2 = spec.l2_jet(p, order)?;
        let space = l2.space().clone();
        let xs = |k: usize| k;
        let ys = |k: usize| n + k;

        let mut g = JetField::from_fn(n, 2, |_| l2.zero_like());
        for i in 0..n {
            let di = l2.derivative(ys(i));
            for j in i..n {
                let gij = di.derivative(ys(j)).scale(0.5);
                g.set(&[i, j], gij.clone());
                g.set(&[j, i], gij);
            }
        }
        g.declare(&[Symmetry::Sym(0, 1)]);
        let gval = g.map(|j| j.value());
        let min = min_eigenvalue(&gval);
        if !(min > 0.0) {
            return Err(MetricError::NotPositiveDefinite(min).into());
        }
        let ginv = jet_inverse(&g)?;

        let y: Vec<Jet> = (0..n).map(|k| Jet::variable(&space, order, ys(k), p.y[k])).collect();
        // w_l = yᵏ ∂²L²/∂yˡ∂xᵏ − ∂L²/∂xˡ
        let w: Vec<Jet> = (0..n)
            .map(|l| {
                let dyl = l2.derivative(ys(l));
                let mut acc = l2.derivative(xs(l)).neg();
                for (k, yk) in y.iter().enumerate() {
                    acc = acc.add(&dyl.derivative(xs(k)).mul(yk));
                }
                acc
            })
            .collect();
        let spray: Vec<Jet> = (0..n)
            .map(|i| {
                let mut acc = w[0].zero_like();
                for (l, wl) in w.iter().enumerate() {
                    acc = acc.add(&ginv.get(&[i, l]).mul(wl));
                }
                acc.scale(0.25)
            })
            .collect();
        let nonlinear: Vec<Vec<Jet>> = spray.iter().map(|gi| (0..n).map(|j| gi.derivative(ys(j))).collect()).collect();

        // dg[l][j][k] = δ_k g_lj
        let mut dg = vec![vec![Vec::with_capacity(n); n]; n];
        for (l, row) in dg.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..n {
                    cell.push(delta(&nonlinear, g.get(&[l, j]), k));
                }
            }
        }
        let mut f =
            JetField::from_fn_with(n, vec![Variance::Contra, Variance::Co, Variance::Co], |_| dg[0][0][0].zero_like());
        for j in 0..n {
            for k in j..n {
                // Γ_ljk = ½(δ_k g_lj + δ_j g_lk − δ_l g_jk)
                let lower: Vec<Jet> =
                    (0..n).map(|l| dg[l][j][k].add(&dg[l][k][j]).sub(&dg[j][k][l]).scale(0.5)).collect();
                for i in 0..n {
                    let mut acc = lower[0].zero_like();
                    for (l, gl) in lower.iter().enumerate() {
                        acc = acc.add(&ginv.get(&[i, l]).mul(gl));
                    }
                    f.set(&[i, j, k], acc.clone());
                    f.set(&[i, k, j], acc);
                }
            }
        }
        f.declare(&[Symmetry::Sym(1, 2)]);

        let mut c_low = JetField::from_fn(n, 3, |_| dg[0][0][0].zero_like());
        for a in 0..n {
            let da = l2.derivative(ys(a));
            for b in a..n {
                let dab = da.derivative(ys(b));
                for c in b..n {
                    let v = dab.derivative(ys(c)).scale(0.25);
                    for idx in permutations3(a, b, c) {
                        c_low.set(&idx, v.clone());
                    }
                }
            }
        }
        let mut cv = JetField::from_fn_with(n, vec![Variance::Contra, Variance::Co, Variance::Co], |i| {
            let mut acc = c_low.get(&[0, 0, 0]).zero_like();
            for l in 0..n {
                acc = acc.add(&ginv.get(&[i[0], l]).mul(c_low.get(&[l, i[1], i[2]])));
            }
            acc
        });
        cv.declare(&[Symmetry::Sym(1, 2)]);
        Ok(Pipeline { spec: spec.clone(), point: p.clone(), order, space, l2, g, ginv, spray, nonlinear, f, cv })
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn point(&self) -> &EvalPoint {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    /// Order of the underlying `L²` jet.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn l2(&self) -> &Jet {
        &self.l2
    }

    /// The coordinate function `yᵏ` as a jet.
    pub fn y(&self, k: usize) -> Jet {
        Jet::variable(&self.space, self.order, self.dim() + k, self.point.y[k])
    }

    /// `δ_k f = ∂f/∂xᵏ − Nᵐₖ ∂f/∂yᵐ`.
    pub fn delta(&self, f: &Jet, k: usize) -> Jet {
        delta(&self.nonlinear, f, k)
    }

    /// Horizontal covariant derivative; the derivative direction is slot 0.
    ///
    /// `(∇T)_{m a₁…} = δ_m T_{a₁…} − Σ_s Fᵖ_{a_s m} T_{…p…}` for covariant
    /// slots, with the opposite sign for contravariant ones.
    pub fn h_covariant_derivative(&self, t: &JetField) -> JetField {
        let n = self.dim();
        let rank = t.rank();
        let mut variance = vec![Variance::Co];
        variance.extend_from_slice(t.variance());
        let mut sub = vec![0; rank];
        JetField::from_fn_with(n, variance, |idx| {
            let m = idx[0];
            let a = &idx[1..];
            let mut acc = self.delta(t.get(a), m);
            for s in 0..rank {
                sub.copy_from_slice(a);
                for p in 0..n {
                    sub[s] = p;
                    let term = match t.variance()[s] {
                        Variance::Co => self.f.get(&[p, a[s], m]).mul(t.get(&sub)).neg(),
                        Variance::Contra => self.f.get(&[a[s], p, m]).mul(t.get(&sub)),
                    };
                    acc = acc.add(&term);
                }
            }
            acc
        })
    }

    pub fn connection_data(&self) -> ConnectionData {
        let n = self.dim();
        let val = |j: &Jet| j.value();
        ConnectionData {
            g: self.g.map(val),
            spray: self.spray.iter().map(val).collect(),
            nonlinear: TensorAtPoint::from_fn_with(n, vec![Variance::Contra, Variance::Co], |i| {
                self.nonlinear[i[0]][i[1]].value()
            }),
            f: self.f.map(val),
            cv: self.cv.map(val),
        }
    }
}

fn delta(nonlinear: &[Vec<Jet>], f: &Jet, k: usize) -> Jet {
    let n = nonlinear.len();
    let mut acc = f.derivative(k);
    for (m, row) in nonlinear.iter().enumerate() {
        acc = acc.sub(&row[k].mul(&f.derivative(n + m)));
    }
    acc
}

fn permutations3(a: usize, b: usize, c: usize) -> [[usize; 3]; 6] {
    [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
}

/// Connection coefficients at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionData {
    pub g: TensorAtPoint,
    /// `Gⁱ`
    pub spray: Vec<f64>,
    /// `Nⁱⱼ` at `[i, j]`
    pub nonlinear: TensorAtPoint,
    /// `Fⁱⱼₖ` at `[i, j, k]`
    pub f: TensorAtPoint,
    /// `Cⁱⱼₖ` at `[i, j, k]`
    pub cv: TensorAtPoint,
}

/// Residuals of the structural identities of the connection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionResiduals {
    /// `max |Fⁱⱼₖ − Fⁱₖⱼ|`
    pub torsion: f64,
    /// `max |Fⁱⱼₖ yʲ − Nⁱₖ|`
    pub deflection: f64,
    /// `max |Nⁱⱼ yʲ − 2Gⁱ|`
    pub spray_euler: f64,
    /// `max |Cⁱⱼₖ yʲ|`
    pub cartan_y: f64,
}

impl ConnectionData {
    pub fn residuals(&self, y: &[f64]) -> ConnectionResiduals {
        let n = y.len();
        let mut r = ConnectionResiduals { torsion: 0.0, deflection: 0.0, spray_euler: 0.0, cartan_y: 0.0 };
        for i in 0..n {
            let ny: f64 = (0..n).map(|j| self.nonlinear.get(&[i, j]) * y[j]).sum();
            r.spray_euler = r.spray_euler.max((ny - 2.0 * self.spray[i]).abs());
            for k in 0..n {
                let fy: f64 = (0..n).map(|j| self.f.get(&[i, j, k]) * y[j]).sum();
                r.deflection = r.deflection.max((fy - self.nonlinear.get(&[i, k])).abs());
                let cy: f64 = (0..n).map(|j| self.cv.get(&[i, j, k]) * y[j]).sum();
                r.cartan_y = r.cartan_y.max(cy.abs());
                for j in 0..n {
                    r.torsion = r.torsion.max((self.f.get(&[i, j, k]) - self.f.get(&[i, k, j])).abs());
                }
            }
        }
        r
    }
}

pub fn connection_data(spec: &MetricSpec, p: &EvalPoint) -> Result<ConnectionData, PipelineError> {
    Ok(Pipeline::new(spec, p, 3)?.connection_data())
}

/// `Gⁱ = ¼ gⁱˡ(yᵏ ∂²L²/∂yˡ∂xᵏ − ∂L²/∂xˡ)`.
pub fn geodesic_spray(spec: &MetricSpec, p: &EvalPoint) -> Result<Vec<f64>, PipelineError> {
    Ok(connection_data(spec, p)?.spray)
}

/// `Nⁱⱼ = ∂Gⁱ/∂yʲ`.
pub fn nonlinear_connection(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorAtPoint, PipelineError> {
    Ok(connection_data(spec, p)?.nonlinear)
}

/// `Fⁱⱼₖ`, the horizontal coefficients of the Cartan connection.
pub fn cartan_h_coefficients(spec: &MetricSpec, p: &EvalPoint) -> Result<TensorAtPoint, PipelineError> {
    Ok(connection_data(spec, p)?.f)
}

/// `∇ʰT` at the point for a field given by its jet components.
pub fn h_covariant_derivative(pipe: &Pipeline, field: &JetField) -> TensorAtPoint {
    pipe.h_covariant_derivative(field).map(|j| j.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::metric::sample_points;

    #[test]
    fn metricity_and_axioms_on_corpus() {
        for spec in corpus::standard(3) {
            for p in sample_points(&spec.sample_box(), 4, 11) {
                let pipe = Pipeline::new(&spec, &p, 3).unwrap();
                let res = pipe.connection_data().residuals(&p.y);
                assert_eq!(res.torsion, 0.0);
                assert!(res.deflection < 1e-9, "{} {res:?}", spec.name());
                assert!(res.spray_euler < 1e-10, "{} {res:?}", spec.name());
                assert!(res.cartan_y < 1e-10, "{} {res:?}", spec.name());
                let dg = h_covariant_derivative(&pipe, &pipe.g);
                assert!(dg.max_abs() < 1e-8, "{} {}", spec.name(), dg.max_abs());
            }
        }
    }

    #[test]
    fn flat_families_have_zero_connection() {
        let p = EvalPoint::new(vec![0.1, 0.2, -0.3], vec![0.3, -0.5, 0.8]).unwrap();
        for spec in [corpus::euclidean(3), corpus::quartic_minkowski(3)] {
            let c = connection_data(&spec, &p).unwrap();
            assert!(c.spray.iter().all(|v| *v == 0.0));
            assert_eq!(c.f.max_abs(), 0.0);
        }
    }

    #[test]
    fn inverse_metric_jet_is_exact() {
        let spec = corpus::randers_varying(3);
        let p = EvalPoint::new(vec![0.1, 0.2, -0.3], vec![0.3, -0.5, 0.8]).unwrap();
        let pipe = Pipeline::new(&spec, &p, 4).unwrap();
        let n = 3;
        for i in 0..n {
            for j in 0..n {
                let mut acc = pipe.g.get(&[0, 0]).zero_like();
                for k in 0..n {
                    acc = acc.add(&pipe.g.get(&[i, k]).mul(pipe.ginv.get(&[k, j])));
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((acc.value() - want).abs() < 1e-13);
                assert!(acc.partials().skip(1).all(|(_, c)| c.abs() < 1e-10));
            }
        }
    }
}
