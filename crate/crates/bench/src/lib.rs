//! Fixtures shared by the benchmarks.

use finsler_core::corpus;
use finsler_core::metric::sample_points;
use finsler_core::recurrence::scene::SceneModel;
use finsler_core::{synth_scene, Constraints, EvalPoint, MetricSpec, RecurrenceKind, SymmetryClass, SyntheticScene};

/// The bundled metric called `name` with one sample point from its box.
pub fn metric_at(name: &str) -> (MetricSpec, EvalPoint) {
    let spec = corpus::by_name(name).unwrap_or_else(|| panic!("no bundled metric {name}"));
    let p = sample_points(&spec.sample_box(), 1, 1).remove(0);
    (spec, p)
}

pub fn hgf_scene(n: usize, seed: u64) -> SyntheticScene {
    synth_scene(
        n,
        seed,
        SymmetryClass::Algebraic,
        Constraints::default(),
        SceneModel::Kind(RecurrenceKind::HyperGeneralized),
    )
    .expect("unconstrained scenes are feasible")
}
