//! Unconditional checks run on a metric at sample points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::json;

use crate::connection::{h_covariant_derivative, Pipeline, PipelineError};
use crate::curvature::{conharmonic_decomposition_residual, CurvatureId, CurvatureJets};
use crate::expr::{Expr, Var};
use crate::jet::{eval_jet, finite_difference};
use crate::metric::{min_eigenvalue, validate_metric, EvalPoint, Family, MetricSpec};
use crate::recurrence::theorems::{Expect, Measure};
use crate::recurrence::{verify_theorem, CheckReport, CurvatureSample, TheoremId, Tolerances};
use crate::tensor::{Symmetry, Tensor, TensorAtPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeometricCheck {
    CartanAxioms,
    MetricValidation,
    Remark22,
    KnContraction,
    JetFd,
    ConharmonicDecomposition,
    CurvatureSymmetries,
}

impl GeometricCheck {
    pub const ALL: [GeometricCheck; 7] = [
        GeometricCheck::CartanAxioms,
        GeometricCheck::MetricValidation,
        GeometricCheck::Remark22,
        GeometricCheck::KnContraction,
        GeometricCheck::JetFd,
        GeometricCheck::ConharmonicDecomposition,
        GeometricCheck::CurvatureSymmetries,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeometricCheck::CartanAxioms => "cartan-axioms",
            GeometricCheck::MetricValidation => "metric-validation",
            GeometricCheck::Remark22 => "remark-2.2",
            GeometricCheck::KnContraction => "kn-contraction",
            GeometricCheck::JetFd => "jet-fd",
            GeometricCheck::ConharmonicDecomposition => "conharmonic-decomposition",
            GeometricCheck::CurvatureSymmetries => "curvature-symmetries",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

/// Any check the verifier knows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    Geometric(GeometricCheck),
    Theorem(TheoremId),
}

impl CheckId {
    pub fn parse(s: &str) -> Option<Self> {
        GeometricCheck::parse(s).map(CheckId::Geometric).or_else(|| TheoremId::parse(s).map(CheckId::Theorem))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::Geometric(g) => g.as_str(),
            CheckId::Theorem(t) => t.as_str(),
        }
    }

    pub fn all() -> Vec<CheckId> {
        GeometricCheck::ALL
            .into_iter()
            .map(CheckId::Geometric)
            .chain(TheoremId::ALL.into_iter().map(CheckId::Theorem))
            .collect()
    }
}

fn below(name: &str, value: f64, tol: f64) -> Measure {
    Measure { name: name.into(), value, tol, expect: Expect::Below }
}

fn above(name: &str, value: f64, tol: f64) -> Measure {
    Measure { name: name.into(), value, tol, expect: Expect::Above }
}

/// Every expression of a metric family.
pub fn metric_expressions(spec: &MetricSpec) -> Vec<&Expr> {
    match spec.family() {
        Family::Riemannian { a } => a.iter().flatten().collect(),
        Family::Randers { a, b } => a.iter().flatten().chain(b.iter()).collect(),
        Family::Minkowski { l } => vec![l],
    }
}

/// All variable multisets of sizes 1..=3 over the `2n` jet variables.
pub fn derivative_multisets(n: usize) -> Vec<Vec<Var>> {
    let vars: Vec<Var> = (0..n).map(Var::X).chain((0..n).map(Var::Y)).collect();
    let m = vars.len();
    let mut out = Vec::new();
    for i in 0..m {
        out.push(vec![vars[i]]);
        for j in i..m {
            out.push(vec![vars[i], vars[j]]);
            for k in j..m {
                out.push(vec![vars[i], vars[j], vars[k]]);
            }
        }
    }
    out
}

/// Largest relative jet-versus-difference error over all expressions of
/// `spec` and all partials of order 1..=3 at `p`.
pub fn jet_fd_error(spec: &MetricSpec, p: &EvalPoint, h: f64) -> Result<f64, crate::jet::JetError> {
    let sets = derivative_multisets(p.dim());
    let mut worst: f64 = 0.0;
    for e in metric_expressions(spec) {
        let j = eval_jet(e, p, 3)?;
        for vars in &sets {
            let exact = j.partial(vars);
            let fd = finite_difference(e, p, vars, h)?;
            worst = worst.max((fd - exact).abs() / (1.0 + exact.abs()));
        }
    }
    Ok(worst)
}

fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> TensorAtPoint {
    let raw: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(rng)).collect();
    TensorAtPoint::from_fn(n, 2, |i| 0.5 * (raw[i[0] * n + i[1]] + raw[i[1] * n + i[0]]))
}

/// `max|trace₍₂,₄₎(g∧t) − (n−2)t − tr(t) g|` relative to `max(1, |t|·|g|)`.
pub fn kn_contraction_residual(g: &TensorAtPoint, t: &TensorAtPoint) -> Result<f64, crate::tensor::TensorError> {
    let n = g.dim() as f64;
    let ginv = g.inverse()?;
    let lhs = Tensor::kulkarni_nomizu_unchecked(g, t).contract(1, 3, &ginv);
    let tr = t.contract(0, 1, &ginv).data()[0];
    let rhs = t.scale(n - 2.0).add(&g.scale(tr));
    Ok(lhs.max_diff(&rhs) / (t.max_abs() * g.max_abs() * ginv.max_abs()).max(1.0))
}

fn point_check(
    check: GeometricCheck,
    spec: &MetricSpec,
    p: &EvalPoint,
    index: usize,
    tol: &Tolerances,
) -> Result<CheckReport, PipelineError> {
    let id = check.as_str();
    let n = spec.dim();
    let mut hyp = Vec::new();
    let mut concl = Vec::new();
    let g_value = spec.fundamental_tensor_unchecked(p)?;
    hyp.push(above("min_eigenvalue", min_eigenvalue(&g_value), 0.0));
    match check {
        GeometricCheck::CartanAxioms => {
            let pipe = Pipeline::new(spec, p, 3)?;
            let res = pipe.connection_data().residuals(&p.y);
            let dg = h_covariant_derivative(&pipe, &pipe.g);
            concl.push(below("metricity", dg.max_abs(), tol.metricity));
            concl.push(below("torsion", res.torsion, f64::MIN_POSITIVE));
            concl.push(below("deflection", res.deflection, tol.deflection));
            concl.push(below("spray_euler", res.spray_euler, tol.connection));
            concl.push(below("cartan_y", res.cartan_y, tol.connection));
        }
        GeometricCheck::MetricValidation => {
            let rep = validate_metric(spec, std::slice::from_ref(p));
            concl.push(below("homogeneity", rep.max_homogeneity_residual, crate::metric::HOMOGENEITY_TOL));
            concl.push(below("failures", rep.failures.len() as f64, 0.5));
        }
        GeometricCheck::Remark22 => {
            let kn = Tensor::kulkarni_nomizu_unchecked(&g_value, &g_value);
            let gg = Tensor::big_g(&g_value).scale(2.0);
            let scale = g_value.max_abs().powi(2).max(1.0);
            concl.push(below("g_wedge_g_minus_2G", kn.max_diff(&gg) / scale, tol.remark));
        }
        GeometricCheck::KnContraction => {
            let mut rng = ChaCha8Rng::seed_from_u64(index as u64);
            let t = random_symmetric(n, &mut rng);
            concl.push(below("random_t", kn_contraction_residual(&g_value, &t)?, tol.kn_contraction));
            let cj = CurvatureJets::new(spec, p, 4)?;
            let c = cj.at_point();
            concl.push(below("ricci", kn_contraction_residual(&c.g, &c.ric.symmetrized())?, tol.kn_contraction));
        }
        GeometricCheck::JetFd => {
            let err = jet_fd_error(spec, p, 1e-5).map_err(|e| PipelineError::Metric(e.into()))?;
            concl.push(below("relative_error", err, tol.finite_difference));
        }
        GeometricCheck::ConharmonicDecomposition => {
            if n < 3 {
                hyp.push(above("dimension", n as f64, 2.5));
            } else {
                let cj = CurvatureJets::new(spec, p, 5)?;
                let c = cj.at_point();
                let nr = cj.nabla(CurvatureId::Curvature)?;
                let nric = cj.nabla(CurvatureId::Ricci)?;
                let nch = cj.nabla(CurvatureId::Conharmonic)?;
                let res = conharmonic_decomposition_residual(&c.g, &nr, &nric, &nch);
                concl.push(below("decomposition", res / nr.max_abs().max(1.0), tol.decomposition));
            }
        }
        GeometricCheck::CurvatureSymmetries => {
            let cj = CurvatureJets::new(spec, p, 4)?;
            let c = cj.at_point();
            let scale = c.riem.max_abs().max(1.0);
            concl.push(below(
                "antisym_first_pair",
                c.riem.symmetry_residual(Symmetry::Antisym(0, 1)) / scale,
                tol.curvature_symmetry,
            ));
            concl.push(below(
                "antisym_second_pair",
                c.riem.symmetry_residual(Symmetry::Antisym(2, 3)) / scale,
                tol.curvature_symmetry,
            ));
        }
    }
    Ok(CheckReport::new(id, hyp, concl))
}

/// Runs a check on a metric at every point and merges the per-point reports.
/// Theorem checks run on the geometric curvature samples.
pub fn run_spec_check(
    check: CheckId,
    spec: &MetricSpec,
    points: &[EvalPoint],
    tol: &Tolerances,
) -> Result<CheckReport, PipelineError> {
    let reports = points
        .iter()
        .enumerate()
        .map(|(i, p)| match check {
            CheckId::Geometric(g) => point_check(g, spec, p, i, tol),
            CheckId::Theorem(t) => {
                let s = CurvatureSample::from_metric(spec, p)?;
                Ok(verify_theorem(t, &s, tol))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut merged = CheckReport::merge(reports);
    merged.info.insert("metric".into(), json!(spec.name()));
    Ok(merged)
}

/// Runs a check on one precomputed point; the CLI uses this to fan out.
pub fn run_point_check(
    check: CheckId,
    spec: &MetricSpec,
    p: &EvalPoint,
    index: usize,
    tol: &Tolerances,
) -> Result<CheckReport, PipelineError> {
    match check {
        CheckId::Geometric(g) => point_check(g, spec, p, index, tol),
        CheckId::Theorem(t) => Ok(verify_theorem(t, &CurvatureSample::from_metric(spec, p)?, tol)),
    }
}
