//! Recurrence classification table.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{CurvatureSample, LinearFit, RecurrenceKind};
use crate::connection::PipelineError;
use crate::metric::{EvalPoint, MetricSpec};
use crate::tensor::OneForm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Fit residual bound for membership.
    pub residual: f64,
    /// A form is nonzero when its g-norm exceeds this times the scene scale.
    pub nonzero_form: f64,
    /// `max|𝐑|` below this makes the classification vacuous.
    pub vacuous: f64,
    /// Agreement of fitted forms at `(x, λy)`.
    pub homogeneity: f64,
    pub hypothesis: f64,
    pub conclusion: f64,
    /// `max|∇ʰg|`.
    pub metricity: f64,
    /// `max|Fⁱⱼₖyʲ − Nⁱₖ|`.
    pub deflection: f64,
    /// Spray Euler relation and `Cⁱⱼₖyʲ = 0`.
    pub connection: f64,
    /// `g∧g − 2𝐆`, relative to `max|g|²`.
    pub remark: f64,
    pub kn_contraction: f64,
    /// Jet partials against central differences, relative to `1 + |∂|`.
    pub finite_difference: f64,
    /// `∇ℂ` against `∇𝐑 − 1/(n−2) g∧∇Ric`.
    pub decomposition: f64,
    /// Pair antisymmetry of `𝐑`, relative to `max|𝐑|`.
    pub curvature_symmetry: f64,
}

impl Tolerances {
    /// Applies a named override; unknown names and non-positive values are errors.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value > 0.0) || !value.is_finite() {
            return Err(format!("tolerance `{name}` must be positive, got {value}"));
        }
        let mut v = serde_json::to_value(*self).expect("tolerances serialize");
        let map = v.as_object_mut().expect("object");
        if !map.contains_key(name) {
            return Err(format!("unknown tolerance `{name}`"));
        }
        map.insert(name.to_string(), serde_json::json!(value));
        *self = serde_json::from_value(v).expect("same shape");
        Ok(())
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-9,
            nonzero_form: 1e-8,
            vacuous: 1e-10,
            homogeneity: 1e-6,
            hypothesis: 1e-9,
            conclusion: 1e-7,
            metricity: 1e-8,
            deflection: 1e-9,
            connection: 1e-10,
            remark: 1e-14,
            kn_contraction: 1e-12,
            finite_difference: 1e-5,
            decomposition: 1e-9,
            curvature_symmetry: 1e-8,
        }
    }
}

/// Scalings used for the degree-zero check of fitted forms.
pub const HOMOGENEITY_LAMBDAS: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleFit {
    pub residual: f64,
    pub a: Option<OneForm>,
    pub b: Option<OneForm>,
    pub indeterminate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub lambdas: Vec<f64>,
    pub max_difference: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    NotMember,
    Vacuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub kind: RecurrenceKind,
    pub membership: Membership,
    pub max_residual: f64,
    /// `A` is nonzero at every sample (always true for the symmetric class).
    pub a_nonzero: bool,
    /// `B` vanishes or is indeterminate at some sample.
    pub degenerate_b: bool,
    pub samples: Vec<SampleFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub homogeneity: Option<HomogeneityReport>,
}

impl KindReport {
    pub fn is_member(&self) -> bool {
        self.membership == Membership::Member
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub sample_count: usize,
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub kinds: Vec<KindReport>,
    /// For each member class, the other classes it was observed together with.
    pub implications: BTreeMap<String, Vec<String>>,
}

impl ClassificationReport {
    pub fn kind(&self, kind: RecurrenceKind) -> &KindReport {
        self.kinds.iter().find(|k| k.kind == kind).expect("every kind is reported")
    }
}

fn form_nonzero(f: Option<&OneForm>, s: &CurvatureSample, tol: &Tolerances) -> bool {
    let scale = s.g.max_abs().max(1.0);
    match f {
        Some(f) => f.g_norm(&s.g).map(|v| v > tol.nonzero_form * scale).unwrap_or(false),
        None => false,
    }
}

fn kind_report(
    kind: RecurrenceKind,
    samples: &[CurvatureSample],
    fits: Vec<LinearFit>,
    tol: &Tolerances,
) -> KindReport {
    let two_forms = kind.basis().len() == 2;
    let mut a_nonzero = true;
    let mut degenerate_b = false;
    let mut max_residual: f64 = 0.0;
    let mut out = Vec::with_capacity(fits.len());
    for (s, fit) in samples.iter().zip(fits) {
        let residual = if kind == RecurrenceKind::ConharmonicSymmetric {
            fit.derivative_norm / s.conharmonic().norm().max(super::fit::EPSILON)
        } else {
            fit.residual
        };
        max_residual = max_residual.max(residual);
        if kind != RecurrenceKind::ConharmonicSymmetric && !form_nonzero(fit.form(0), s, tol) {
            a_nonzero = false;
        }
        if two_forms && !form_nonzero(fit.form(1), s, tol) {
            degenerate_b = true;
        }
        out.push(SampleFit {
            residual,
            a: fit.form(0).cloned(),
            b: fit.form(1).cloned(),
            indeterminate: fit.indeterminate,
        });
    }
    let membership = if max_residual < tol.residual && a_nonzero { Membership::Member } else { Membership::NotMember };
    KindReport { kind, membership, max_residual, a_nonzero, degenerate_b, samples: out, homogeneity: None }
}

/// Classifies curvature samples against every recurrence class.
pub fn classify(samples: &[CurvatureSample], tol: &Tolerances) -> Result<ClassificationReport, PipelineError> {
    let n = samples.first().map(|s| s.dim()).unwrap_or(0);
    if n < 3 {
        return Err(PipelineError::DimensionTooSmall { n, need: 3 });
    }
    let vacuous = samples.iter().all(|s| s.riem.max_abs() < tol.vacuous);
    let kinds: Vec<KindReport> = RecurrenceKind::ALL
        .iter()
        .map(|&kind| {
            if vacuous {
                KindReport {
                    kind,
                    membership: Membership::Vacuous,
                    max_residual: 0.0,
                    a_nonzero: false,
                    degenerate_b: false,
                    samples: Vec::new(),
                    homogeneity: None,
                }
            } else {
                let fits = samples.iter().map(|s| s.fit(kind)).collect();
                kind_report(kind, samples, fits, tol)
            }
        })
        .collect();
    let members: Vec<&str> = kinds.iter().filter(|k| k.is_member()).map(|k| k.kind.tag()).collect();
    let implications = members
        .iter()
        .map(|m| {
            let others = members.iter().filter(|o| *o != m).map(|o| o.to_string()).collect();
            (m.to_string(), others)
        })
        .collect();
    Ok(ClassificationReport {
        n,
        sample_count: samples.len(),
        vacuous,
        note: vacuous.then(|| "vacuous: nonzero h-curvature required".to_string()),
        kinds,
        implications,
    })
}

/// Classifies a metric at `points`, adding the degree-zero check of the
/// fitted forms under `y → λy`.
pub fn classify_spec(
    spec: &MetricSpec,
    points: &[EvalPoint],
    tol: &Tolerances,
) -> Result<ClassificationReport, PipelineError> {
    let samples = points.iter().map(|p| CurvatureSample::from_metric(spec, p)).collect::<Result<Vec<_>, _>>()?;
    let scaled = HOMOGENEITY_LAMBDAS
        .iter()
        .map(|&l| {
            points.iter().map(|p| CurvatureSample::from_metric(spec, &p.scaled(l))).collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = classify(&samples, tol)?;
    attach_homogeneity(&mut report, &scaled, tol);
    Ok(report)
}

/// Fills in the homogeneity check from samples at scaled directions.
pub fn attach_homogeneity(report: &mut ClassificationReport, scaled: &[Vec<CurvatureSample>], tol: &Tolerances) {
    if report.vacuous {
        return;
    }
    for kr in &mut report.kinds {
        if kr.kind == RecurrenceKind::ConharmonicSymmetric {
            continue;
        }
        let mut max_difference: f64 = 0.0;
        for set in scaled {
            for (base, s) in kr.samples.iter().zip(set) {
                let fit = s.fit(kr.kind);
                for (f0, f1) in [(&base.a, fit.form(0)), (&base.b, fit.form(1))] {
                    if let (Some(f0), Some(f1)) = (f0, f1) {
                        max_difference = max_difference.max(f0.max_diff(f1));
                    }
                }
            }
        }
        kr.homogeneity = Some(HomogeneityReport {
            lambdas: HOMOGENEITY_LAMBDAS.to_vec(),
            max_difference,
            pass: max_difference < tol.homogeneity,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::metric::sample_points;
    use crate::recurrence::scene::{synth_scene, Constraints, SceneModel, SymmetryClass};

    #[test]
    fn euclidean_is_vacuous() {
        let spec = corpus::euclidean(3);
        let pts = sample_points(&spec.sample_box(), 2, 1);
        let rep = classify_spec(&spec, &pts, &Tolerances::default()).unwrap();
        assert!(rep.vacuous);
        assert!(rep.kinds.iter().all(|k| k.membership == Membership::Vacuous));
    }

    #[test]
    fn hgf_scene_is_also_generalized_ricci_recurrent() {
        let s = synth_scene(
            4,
            11,
            SymmetryClass::Algebraic,
            Constraints::default(),
            SceneModel::Kind(RecurrenceKind::HyperGeneralized),
        )
        .unwrap();
        let rep = classify(&[s.sample().unwrap()], &Tolerances::default()).unwrap();
        assert!(rep.kind(RecurrenceKind::HyperGeneralized).is_member());
        let gr = rep.kind(RecurrenceKind::GeneralizedRicciRecurrent);
        assert!(gr.is_member());
        let n = 4.0;
        let a1 = s.a.add(&s.b.scale(n - 2.0));
        let b1 = s.b.scale(s.r);
        assert!(gr.samples[0].a.as_ref().unwrap().max_diff(&a1) < 1e-10);
        assert!(gr.samples[0].b.as_ref().unwrap().max_diff(&b1) < 1e-10);
    }

    #[test]
    fn conharmonic_recurrent_nests() {
        let s = synth_scene(
            4,
            3,
            SymmetryClass::Algebraic,
            Constraints::default(),
            SceneModel::Kind(RecurrenceKind::ConharmonicRecurrent),
        )
        .unwrap();
        let rep = classify(&[s.sample().unwrap()], &Tolerances::default()).unwrap();
        assert!(rep.kind(RecurrenceKind::ConharmonicRecurrent).is_member());
        let g = rep.kind(RecurrenceKind::GeneralizedConharmonic);
        assert!(g.is_member());
        assert!(g.degenerate_b);
    }
}
