//! Bundled metrics used by tests, the CLI and the acceptance suite.

use crate::metric::{FamilySource, MetricSource, MetricSpec};

fn build(source: MetricSource) -> MetricSpec {
    MetricSpec::from_source(source).expect("bundled metric is well formed")
}

fn diagonal(n: usize, diag: impl Fn(usize) -> String) -> Vec<Vec<String>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { diag(i) } else { "0".to_string() }).collect()).collect()
}

fn radius2(n: usize) -> String {
    (1..=n).map(|i| format!("x{i}^2")).collect::<Vec<_>>().join(" + ")
}

pub fn euclidean(n: usize) -> MetricSpec {
    build(MetricSource {
        name: format!("euclidean{n}"),
        n,
        family: FamilySource::Riemannian { a: diagonal(n, |_| "1".into()) },
        sample_box: None,
    })
}

/// Stereographic chart of the unit sphere, sectional curvature 1.
pub fn sphere(n: usize) -> MetricSpec {
    let r2 = radius2(n);
    build(MetricSource {
        name: format!("sphere{n}"),
        n,
        family: FamilySource::Riemannian { a: diagonal(n, |_| format!("4/(1 + {r2})^2")) },
        sample_box: None,
    })
}

/// Poincaré ball, sectional curvature −1.
pub fn hyperbolic(n: usize) -> MetricSpec {
    let r2 = radius2(n);
    build(MetricSource {
        name: format!("hyperbolic{n}"),
        n,
        family: FamilySource::Riemannian { a: diagonal(n, |_| format!("4/(1 - ({r2}))^2")) },
        sample_box: None,
    })
}

/// Randers metric `|y| + b(x)·y` with a position-dependent drift.
pub fn randers_varying(n: usize) -> MetricSpec {
    let mut b = vec!["0".to_string(); n];
    b[0] = "0.2 + 0.1*sin(x2)".into();
    b[1] = "0.15*x1*x1 - 0.05*x2".into();
    if n > 2 {
        b[2] = "0.1*cos(x1 + x3)".into();
    }
    build(MetricSource {
        name: format!("randers{n}"),
        n,
        family: FamilySource::Randers { a: diagonal(n, |_| "1".into()), b },
        sample_box: None,
    })
}

/// `L = (Σ yᵢ⁴)^(1/4)`.
pub fn quartic_minkowski(n: usize) -> MetricSpec {
    let sum = (1..=n).map(|i| format!("y{i}^4")).collect::<Vec<_>>().join(" + ");
    build(MetricSource {
        name: format!("quartic{n}"),
        n,
        family: FamilySource::Minkowski { l: format!("({sum})^(1/4)") },
        sample_box: None,
    })
}

/// Euclidean-signature Schwarzschild (mass 1) in `(τ, r, θ, φ)`: Ricci-flat, not flat.
pub fn schwarzschild() -> MetricSpec {
    let mut a = diagonal(4, |_| "0".into());
    a[0][0] = "1 - 2/x2".into();
    a[1][1] = "1/(1 - 2/x2)".into();
    a[2][2] = "x2^2".into();
    a[3][3] = "x2^2*sin(x3)^2".into();
    build(MetricSource {
        name: "schwarzschild4".into(),
        n: 4,
        family: FamilySource::Riemannian { a },
        sample_box: Some(vec![[-0.5, 0.5], [3.0, 4.0], [1.0, 2.0], [-0.5, 0.5]]),
    })
}

/// The five-family corpus in dimension `n`.
pub fn standard(n: usize) -> Vec<MetricSpec> {
    vec![euclidean(n), sphere(n), hyperbolic(n), randers_varying(n), quartic_minkowski(n)]
}

/// Looks up a bundled metric by name, e.g. `sphere3` or `schwarzschild4`.
pub fn by_name(name: &str) -> Option<MetricSpec> {
    if name == "schwarzschild4" {
        return Some(schwarzschild());
    }
    let split = name.find(|c: char| c.is_ascii_digit())?;
    let n: usize = name[split..].parse().ok()?;
    if !(2..=6).contains(&n) {
        return None;
    }
    Some(match &name[..split] {
        "euclidean" => euclidean(n),
        "sphere" => sphere(n),
        "hyperbolic" => hyperbolic(n),
        "randers" => randers_varying(n),
        "quartic" => quartic_minkowski(n),
        _ => return None,
    })
}
