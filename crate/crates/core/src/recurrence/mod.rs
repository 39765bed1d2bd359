//! Recurrence classes, least-squares form fitting, synthetic scenes and the
//! theorem verifier.

pub mod classify;
pub mod fit;
pub mod scene;
pub mod theorems;

use serde::{Deserialize, Serialize};

use crate::connection::PipelineError;
use crate::curvature::{big_g, concircular, conharmonic, h_tensor, kn_slotwise, CurvatureId, CurvatureJets};
use crate::metric::{EvalPoint, MetricSpec};
use crate::tensor::{OneForm, Symmetry, Tensor, TensorAtPoint, Variance};

pub use classify::{classify, classify_spec, ClassificationReport, KindReport, Tolerances};
pub use fit::{fit_linear_forms, LinearFit};
pub use scene::{synth_scene, Constraints, SceneError, SymmetryClass, SyntheticScene};
pub use theorems::{verify_theorem, CheckReport, CheckStatus, Measure, TheoremId};

/// Recurrence classes: a derivative object and the tensors it is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecurrenceKind {
    Recurrent,
    GeneralizedRecurrent,
    RicciRecurrent,
    GeneralizedRicciRecurrent,
    HyperGeneralized,
    ConcircularRecurrent,
    GeneralizedConcircular,
    ConharmonicRecurrent,
    GeneralizedConharmonic,
    ConharmonicSymmetric,
}

/// Basis tensors of a recurrence model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisTensor {
    Curvature,
    BigG,
    Ricci,
    Metric,
    GWedgeRic,
    Concircular,
    Conharmonic,
}

impl RecurrenceKind {
    pub const ALL: [RecurrenceKind; 10] = [
        RecurrenceKind::Recurrent,
        RecurrenceKind::GeneralizedRecurrent,
        RecurrenceKind::RicciRecurrent,
        RecurrenceKind::GeneralizedRicciRecurrent,
        RecurrenceKind::HyperGeneralized,
        RecurrenceKind::ConcircularRecurrent,
        RecurrenceKind::GeneralizedConcircular,
        RecurrenceKind::ConharmonicRecurrent,
        RecurrenceKind::GeneralizedConharmonic,
        RecurrenceKind::ConharmonicSymmetric,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            RecurrenceKind::Recurrent => "recurrent",
            RecurrenceKind::GeneralizedRecurrent => "generalized_recurrent",
            RecurrenceKind::RicciRecurrent => "ricci_recurrent",
            RecurrenceKind::GeneralizedRicciRecurrent => "generalized_ricci_recurrent",
            RecurrenceKind::HyperGeneralized => "hyper_generalized",
            RecurrenceKind::ConcircularRecurrent => "concircular_recurrent",
            RecurrenceKind::GeneralizedConcircular => "generalized_concircular",
            RecurrenceKind::ConharmonicRecurrent => "conharmonic_recurrent",
            RecurrenceKind::GeneralizedConharmonic => "generalized_conharmonic",
            RecurrenceKind::ConharmonicSymmetric => "conharmonic_symmetric",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    /// The object whose h-derivative is modelled.
    pub fn derivative(self) -> CurvatureId {
        use RecurrenceKind::*;
        match self {
            Recurrent | GeneralizedRecurrent | HyperGeneralized => CurvatureId::Curvature,
            RicciRecurrent | GeneralizedRicciRecurrent => CurvatureId::Ricci,
            ConcircularRecurrent | GeneralizedConcircular => CurvatureId::Concircular,
            ConharmonicRecurrent | GeneralizedConharmonic | ConharmonicSymmetric => CurvatureId::Conharmonic,
        }
    }

    /// Model tensors; the first carries `A`, the second `B`.
    pub fn basis(self) -> &'static [BasisTensor] {
        use BasisTensor as T;
        use RecurrenceKind::*;
        match self {
            Recurrent => &[T::Curvature],
            GeneralizedRecurrent => &[T::Curvature, T::BigG],
            RicciRecurrent => &[T::Ricci],
            GeneralizedRicciRecurrent => &[T::Ricci, T::Metric],
            HyperGeneralized => &[T::Curvature, T::GWedgeRic],
            ConcircularRecurrent => &[T::Concircular],
            GeneralizedConcircular => &[T::Concircular, T::BigG],
            ConharmonicRecurrent => &[T::Conharmonic],
            GeneralizedConharmonic => &[T::Conharmonic, T::BigG],
            ConharmonicSymmetric => &[],
        }
    }
}

/// Curvature data and first h-derivatives at one sample, from a geometric
/// pipeline or a synthetic scene. Derivative slot first throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSample {
    pub g: TensorAtPoint,
    pub ginv: TensorAtPoint,
    pub riem: TensorAtPoint,
    pub ric: TensorAtPoint,
    pub r: f64,
    pub nabla_riem: TensorAtPoint,
    pub nabla_ric: TensorAtPoint,
    /// Rank 1.
    pub nabla_r: TensorAtPoint,
    pub nabla_conc: TensorAtPoint,
    pub nabla_ch: TensorAtPoint,
    /// `d̄A`, `d̄B` when the source carries derivatives of the forms.
    pub dbar_forms: Option<(TensorAtPoint, TensorAtPoint)>,
    /// Forms planted by a synthetic scene, with the model they were planted in.
    pub planted: Option<PlantedForms>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedForms {
    pub kind: RecurrenceKind,
    pub a: OneForm,
    pub b: OneForm,
}

impl CurvatureSample {
    /// Builds a sample from `𝐑` and `∇𝐑`, deriving everything else by
    /// contraction. `nabla_ric` overrides the contracted `∇Ric` when given.
    pub fn from_curvature(
        g: TensorAtPoint,
        riem: TensorAtPoint,
        nabla_riem: TensorAtPoint,
        nabla_ric: Option<TensorAtPoint>,
    ) -> Result<Self, PipelineError> {
        let n = g.dim();
        let ginv = g.inverse()?;
        let ric = riem.contract(1, 3, &ginv);
        let r = ric.contract(0, 1, &ginv).data()[0];
        let nabla_ric = nabla_ric.unwrap_or_else(|| nabla_riem.contract(2, 4, &ginv));
        let nabla_r = nabla_ric.contract(1, 2, &ginv);
        let gg = big_g(&g);
        let nf = n as f64;
        let mut nabla_conc = nabla_riem.clone();
        nabla_conc.axpy(-1.0 / (nf * (nf - 1.0)), &Tensor::outer_form(nabla_r.data(), &gg));
        let mut nabla_ch = nabla_riem.clone();
        if n >= 3 {
            nabla_ch.axpy(-1.0 / (nf - 2.0), &kn_slotwise(&g, &nabla_ric));
        }
        Ok(CurvatureSample {
            g,
            ginv,
            riem,
            ric,
            r,
            nabla_riem,
            nabla_ric,
            nabla_r,
            nabla_conc,
            nabla_ch,
            dbar_forms: None,
            planted: None,
        })
    }

    /// Sample of a metric at `p`, all derivatives through the jet pipeline.
    pub fn from_metric(spec: &MetricSpec, p: &EvalPoint) -> Result<Self, PipelineError> {
        let cj = CurvatureJets::new(spec, p, 5)?;
        let c = cj.at_point();
        let n = c.dim();
        let nabla_ch = if n >= 3 { cj.nabla(CurvatureId::Conharmonic)? } else { cj.nabla(CurvatureId::Curvature)? };
        Ok(CurvatureSample {
            nabla_riem: cj.nabla(CurvatureId::Curvature)?,
            nabla_ric: cj.nabla(CurvatureId::Ricci)?,
            nabla_r: cj.nabla(CurvatureId::Scalar)?,
            nabla_conc: cj.nabla(CurvatureId::Concircular)?,
            nabla_ch,
            g: c.g,
            ginv: c.ginv,
            riem: c.riem,
            ric: c.ric,
            r: c.r,
            dbar_forms: None,
            planted: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    /// Ric with its antisymmetric part removed.
    pub fn ric_sym(&self) -> TensorAtPoint {
        self.ric.symmetrized()
    }

    pub fn ric_asymmetry(&self) -> f64 {
        self.ric.symmetry_residual(Symmetry::Sym(0, 1))
    }

    pub fn big_g(&self) -> TensorAtPoint {
        big_g(&self.g)
    }

    pub fn g_wedge_ric(&self) -> TensorAtPoint {
        Tensor::kulkarni_nomizu_unchecked(&self.g, &self.ric_sym())
    }

    pub fn concircular(&self) -> TensorAtPoint {
        concircular(&self.riem, &self.g, &self.r)
    }

    pub fn conharmonic(&self) -> TensorAtPoint {
        conharmonic(&self.riem, &self.g, &self.ric_sym()).expect("samples used for fitting have n >= 3")
    }

    pub fn h_tensor(&self) -> TensorAtPoint {
        h_tensor(&self.riem, &self.g, &self.ric_sym()).expect("samples used for fitting have n >= 3")
    }

    /// Mixed `Rⁱⱼₖₗ` with `R(e_k,e_l)e_j = Rⁱⱼₖₗ e_i`.
    pub fn mixed(&self) -> TensorAtPoint {
        let n = self.dim();
        let variance = vec![Variance::Contra, Variance::Co, Variance::Co, Variance::Co];
        TensorAtPoint::from_fn_with(n, variance, |i| {
            (0..n).map(|m| self.ginv.get(&[i[0], m]) * self.riem.get(&[i[2], i[3], i[1], m])).sum()
        })
    }

    pub fn derivative(&self, id: CurvatureId) -> &TensorAtPoint {
        match id {
            CurvatureId::Curvature => &self.nabla_riem,
            CurvatureId::Ricci => &self.nabla_ric,
            CurvatureId::Scalar => &self.nabla_r,
            CurvatureId::Concircular => &self.nabla_conc,
            CurvatureId::Conharmonic => &self.nabla_ch,
        }
    }

    pub fn basis_tensor(&self, b: BasisTensor) -> TensorAtPoint {
        match b {
            BasisTensor::Curvature => self.riem.clone(),
            BasisTensor::BigG => self.big_g(),
            BasisTensor::Ricci => self.ric.clone(),
            BasisTensor::Metric => self.g.clone(),
            BasisTensor::GWedgeRic => self.g_wedge_ric(),
            BasisTensor::Concircular => self.concircular(),
            BasisTensor::Conharmonic => self.conharmonic(),
        }
    }

    /// Fits the model of `kind` at this sample.
    pub fn fit(&self, kind: RecurrenceKind) -> LinearFit {
        let d = self.derivative(kind.derivative());
        let basis: Vec<TensorAtPoint> = kind.basis().iter().map(|b| self.basis_tensor(*b)).collect();
        let refs: Vec<&TensorAtPoint> = basis.iter().collect();
        fit_linear_forms(d, &refs, &self.g)
    }

    /// Relative residual of the model of `kind` with the given forms.
    pub fn model_residual(&self, kind: RecurrenceKind, forms: &[&OneForm]) -> f64 {
        let d = self.derivative(kind.derivative());
        let mut model = TensorAtPoint::zeros(self.dim(), d.rank());
        for (b, f) in kind.basis().iter().zip(forms) {
            model.axpy(1.0, &Tensor::outer_form(f.components(), &self.basis_tensor(*b)));
        }
        let diff = d.sub(&model).norm();
        let dn = d.norm();
        if dn <= fit::EPSILON && diff <= fit::EPSILON {
            0.0
        } else {
            diff / dn.max(fit::EPSILON)
        }
    }

    /// `(∇𝐑)` cyclic over the derivative slot and the first curvature pair.
    pub fn bianchi_residual(&self) -> f64 {
        let c = crate::curvature::cyclic_sum_args(&self.nabla_riem, (0, 1, 2)).expect("rank 5");
        c.norm() / self.nabla_riem.norm().max(fit::EPSILON)
    }
}
