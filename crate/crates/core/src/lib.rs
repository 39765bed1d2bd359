//! Cartan-connection curvature of Finsler metrics and a recurrence laboratory.
//!
//! The pipeline runs on truncated Taylor jets: `L²` is expanded at a point,
//! and every derived object (fundamental tensor, spray, connection
//! coefficients, curvature, its h-covariant derivatives) is computed as a
//! jet of lower order, so all derivatives are exact up to rounding.

pub mod checks;
pub mod connection;
pub mod corpus;
pub mod curvature;
mod dd;
pub mod expr;
pub mod jet;
pub mod metric;
pub mod recurrence;
pub mod tensor;

pub use checks::{run_point_check, run_spec_check, CheckId, GeometricCheck};
pub use expr::{parse_expr, Expr, ParseError, Var};
pub use jet::{eval_jet, finite_difference, Jet, JetError};
pub use metric::{validate_metric, EvalPoint, MetricError, MetricSource, MetricSpec};
pub use recurrence::{
    classify, classify_spec, fit_linear_forms, synth_scene, verify_theorem, CheckReport, CheckStatus,
    ClassificationReport, Constraints, CurvatureSample, LinearFit, RecurrenceKind, SymmetryClass, SyntheticScene,
    TheoremId, Tolerances,
};
pub use tensor::{flat, sharp, OneForm, Symmetry, Tensor, TensorAtPoint, Variance};
