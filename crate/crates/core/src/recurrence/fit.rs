//! Per-slot least squares for `∇T = A⊗T₁ + B⊗T₂`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::tensor::{OneForm, TensorAtPoint};

/// Floor for relative residual denominators.
pub const EPSILON: f64 = 1e-14;
/// A basis tensor whose norm (or whose part orthogonal to the previous basis
/// tensors) is below this fraction of the largest basis norm is degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    /// One form per basis tensor; `None` when that coefficient is indeterminate.
    pub forms: Vec<Option<OneForm>>,
    /// `|∇T − model| / max(|∇T|, ε)`, 0 when both vanish.
    pub residual: f64,
    pub derivative_norm: f64,
    pub indeterminate: bool,
}

impl LinearFit {
    pub fn form(&self, i: usize) -> Option<&OneForm> {
        self.forms.get(i).and_then(|f| f.as_ref())
    }
}

/// Fits `derivative[m, …] ≈ Σᵢ formᵢ[m] · basisᵢ[…]` independently for every
/// derivative slot `m` (slot 0).
pub fn fit_linear_forms(derivative: &TensorAtPoint, basis: &[&TensorAtPoint], _g: &TensorAtPoint) -> LinearFit {
    let n = derivative.dim();
    let len = derivative.data().len() / n;
    for b in basis {
        assert_eq!(b.data().len(), len, "basis tensor rank must be one less than the derivative");
    }
    let max_norm = basis.iter().map(|b| b.norm()).fold(0.0, f64::max);

    // Gram-Schmidt decides which basis tensors are determinate.
    let mut active: Vec<usize> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut forms: Vec<Option<OneForm>> = vec![None; basis.len()];
    for (i, b) in basis.iter().enumerate() {
        let norm = b.norm();
        if max_norm == 0.0 || norm <= DEGENERACY_TOL * max_norm {
            continue;
        }
        let mut v = b.data().to_vec();
        for q in &ortho {
            let c: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (a, b) in v.iter_mut().zip(q) {
                *a -= c * b;
            }
        }
        let rest = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if rest <= DEGENERACY_TOL * norm {
            continue;
        }
        v.iter_mut().for_each(|a| *a /= rest);
        ortho.push(v);
        active.push(i);
    }

    let mut model = vec![0.0; derivative.data().len()];
    if !active.is_empty() {
        let mat = DMatrix::from_fn(len, active.len(), |row, col| basis[active[col]].data()[row]);
        let rhs = DMatrix::from_fn(len, n, |row, m| derivative.data()[m * len + row]);
        let svd = mat.clone().svd(true, true);
        let coeffs = svd.solve(&rhs, 0.0).expect("singular vectors were requested");
        for (col, &i) in active.iter().enumerate() {
            let form: Vec<f64> = (0..n).map(|m| coeffs[(col, m)]).collect();
            for (m, a) in form.iter().enumerate() {
                for (row, b) in basis[i].data().iter().enumerate() {
                    model[m * len + row] += a * b;
                }
            }
            forms[i] = Some(OneForm(form));
        }
    }

    let derivative_norm = derivative.norm();
    let diff = derivative.data().iter().zip(&model).map(|(d, m)| (d - m) * (d - m)).sum::<f64>().sqrt();
    let residual =
        if derivative_norm <= EPSILON && diff <= EPSILON { 0.0 } else { diff / derivative_norm.max(EPSILON) };
    LinearFit { indeterminate: forms.iter().any(|f| f.is_none()), forms, residual, derivative_norm }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn sample(n: usize, seed: u64) -> TensorAtPoint {
        let mut s = seed;
        TensorAtPoint::from_fn(n, 4, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        })
    }

    #[test]
    fn exact_single_term_model() {
        let r = sample(3, 1);
        let mut a = vec![0.0; 3];
        a[0] = 3.0;
        let d = Tensor::outer_form(&a, &r);
        let fit = fit_linear_forms(&d, &[&r], &TensorAtPoint::zeros(3, 2));
        let got = fit.form(0).unwrap();
        assert!(got.max_diff(&OneForm(a)) < 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn zero_basis_is_indeterminate() {
        let r = sample(3, 2);
        let zero = TensorAtPoint::zeros(3, 4);
        let a = [0.5, -1.0, 2.0];
        let d = Tensor::outer_form(&a, &r);
        let fit = fit_linear_forms(&d, &[&r, &zero], &TensorAtPoint::zeros(3, 2));
        assert!(fit.indeterminate);
        assert!(fit.form(1).is_none());
        assert!(fit.form(0).unwrap().max_diff(&OneForm(a.to_vec())) < 1e-12);
        let parallel = r.scale(2.0);
        let fit = fit_linear_forms(&d, &[&r, &parallel], &TensorAtPoint::zeros(3, 2));
        assert!(fit.form(1).is_none());
    }

    #[test]
    fn vanishing_derivative_has_zero_residual() {
        let r = sample(3, 3);
        let d = TensorAtPoint::zeros(3, 5);
        let fit = fit_linear_forms(&d, &[&r], &TensorAtPoint::zeros(3, 2));
        assert_eq!(fit.residual, 0.0);
    }
}
