//! Riemannian specs: the Cartan pipeline against the textbook Levi-Civita
//! formulas built from first and second partials of `a_ij`.

use finsler_core::curvature::{h_curvature, CurvatureId, CurvatureJets};
use finsler_core::metric::{sample_points, Family, MetricSource};
use finsler_core::{corpus, eval_jet, EvalPoint, MetricSpec, TensorAtPoint, Var};

struct Partials {
    g: Vec<Vec<f64>>,
    ginv: Vec<Vec<f64>>,
    /// `dg[m][i][j] = ∂_m g_ij`.
    dg: Vec<Vec<Vec<f64>>>,
    /// `ddg[m][l][i][j] = ∂_m ∂_l g_ij`.
    ddg: Vec<Vec<Vec<Vec<f64>>>>,
}

fn partials(spec: &MetricSpec, x: &[f64]) -> Partials {
    let n = spec.dim();
    let a = match spec.family() {
        Family::Riemannian { a } => a,
        _ => panic!("riemannian spec expected"),
    };
    let p = EvalPoint::new(x.to_vec(), vec![1.0; n]).unwrap();
    let mut g = vec![vec![0.0; n]; n];
    let mut dg = vec![vec![vec![0.0; n]; n]; n];
    let mut ddg = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            let jet = eval_jet(&a[i][j], &p, 2).unwrap();
            g[i][j] = jet.value();
            for m in 0..n {
                dg[m][i][j] = jet.partial(&[Var::X(m)]);
                for l in 0..n {
                    ddg[m][l][i][j] = jet.partial(&[Var::X(m), Var::X(l)]);
                }
            }
        }
    }
    let inv = nalgebra::DMatrix::from_fn(n, n, |i, j| g[i][j]).try_inverse().unwrap();
    let ginv = (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect();
    Partials { g, ginv, dg, ddg }
}

/// `Γ^i_jk` and `∂_m Γ^i_jk` stored as `[i][j][k]` and `[m][i][j][k]`.
#[allow(clippy::type_complexity)]
fn christoffel(p: &Partials) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<Vec<Vec<f64>>>>) {
    let n = p.g.len();
    let first = |l: usize, j: usize, k: usize| 0.5 * (p.dg[j][l][k] + p.dg[k][l][j] - p.dg[l][j][k]);
    let d_first =
        |m: usize, l: usize, j: usize, k: usize| 0.5 * (p.ddg[m][j][l][k] + p.ddg[m][k][l][j] - p.ddg[m][l][j][k]);
    let d_ginv = |m: usize, i: usize, l: usize| -> f64 {
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                s -= p.ginv[i][a] * p.dg[m][a][b] * p.ginv[b][l];
            }
        }
        s
    };
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    let mut d_gamma = vec![vec![vec![vec![0.0; n]; n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    gamma[i][j][k] += p.ginv[i][l] * first(l, j, k);
                    for m in 0..n {
                        d_gamma[m][i][j][k] += d_ginv(m, i, l) * first(l, j, k) + p.ginv[i][l] * d_first(m, l, j, k);
                    }
                }
            }
        }
    }
    (gamma, d_gamma)
}

/// Lowered curvature in the library convention, `𝐑 = κ𝐆` on a space form.
fn oracle_riemann(spec: &MetricSpec, x: &[f64]) -> TensorAtPoint {
    let n = spec.dim();
    let p = partials(spec, x);
    let (gm, dgm) = christoffel(&p);
    // R^i_jkl for R(∂_k, ∂_l)∂_j.
    let up = |i: usize, j: usize, k: usize, l: usize| {
        let mut v = dgm[k][i][l][j] - dgm[l][i][k][j];
        for m in 0..n {
            v += gm[i][k][m] * gm[m][l][j] - gm[i][l][m] * gm[m][k][j];
        }
        v
    };
    TensorAtPoint::from_fn(n, 4, |idx| {
        let (a, b, c, d) = (idx[0], idx[1], idx[2], idx[3]);
        -(0..n).map(|m| p.g[d][m] * up(m, c, a, b)).sum::<f64>()
    })
}

fn anisotropic() -> MetricSpec {
    let src: MetricSource = serde_json::from_str(
        r#"{
            "name": "warped3",
            "n": 3,
            "family": "riemannian",
            "a": [
                ["1 + x2^2", "0.3*x1*x3", "0"],
                ["0.3*x1*x3", "2 + sin(x1)", "0.2*x2"],
                ["0", "0.2*x2", "exp(x3/3)"]
            ]
        }"#,
    )
    .unwrap();
    MetricSpec::from_source(src).unwrap()
}

fn riemannian_specs() -> Vec<MetricSpec> {
    vec![corpus::sphere(3), corpus::hyperbolic(4), corpus::schwarzschild(), anisotropic(), corpus::sphere(2)]
}

#[test]
fn curvature_matches_levi_civita() {
    for spec in riemannian_specs() {
        for p in sample_points(&spec.sample_box(), 6, 17) {
            let c = h_curvature(&spec, &p).unwrap();
            let oracle = oracle_riemann(&spec, &p.x);
            let err = c.riem.max_diff(&oracle) / oracle.max_abs().max(1.0);
            assert!(err < 1e-10, "{}: {err:e}", spec.name());
        }
    }
}

#[test]
fn curvature_is_independent_of_direction() {
    let spec = anisotropic();
    let p = sample_points(&spec.sample_box(), 1, 2).remove(0);
    let base = h_curvature(&spec, &p).unwrap();
    for y in [vec![0.0, 0.0, 1.0], vec![-3.0, 0.5, 0.1]] {
        let q = EvalPoint::new(p.x.clone(), y).unwrap();
        let other = h_curvature(&spec, &q).unwrap();
        assert!(base.riem.max_diff(&other.riem) < 1e-10);
    }
}

/// `∇_m R_abcd` from central differences of the oracle curvature and the
/// oracle Christoffel symbols.
fn oracle_nabla_riemann(spec: &MetricSpec, x: &[f64], h: f64) -> TensorAtPoint {
    let n = spec.dim();
    let (gamma, _) = christoffel(&partials(spec, x));
    let r0 = oracle_riemann(spec, x);
    let dr: Vec<TensorAtPoint> = (0..n)
        .map(|m| {
            let shift = |s: f64| {
                let mut y = x.to_vec();
                y[m] += s;
                oracle_riemann(spec, &y)
            };
            shift(h).sub(&shift(-h)).scale(0.5 / h)
        })
        .collect();
    TensorAtPoint::from_fn(n, 5, |i| {
        let m = i[0];
        let mut v = *dr[m].get(&i[1..]);
        for slot in 1..5 {
            for e in 0..n {
                let mut j = i[1..].to_vec();
                let gam = gamma[e][m][j[slot - 1]];
                j[slot - 1] = e;
                v -= gam * r0.get(&j);
            }
        }
        v
    })
}

#[test]
fn curvature_derivative_matches_levi_civita() {
    for spec in [anisotropic(), corpus::schwarzschild()] {
        for p in sample_points(&spec.sample_box(), 3, 5) {
            let nabla = CurvatureJets::new(&spec, &p, 5).unwrap().nabla(CurvatureId::Curvature).unwrap();
            let oracle = oracle_nabla_riemann(&spec, &p.x, 1e-4);
            let err = nabla.max_diff(&oracle) / oracle.max_abs().max(1.0);
            assert!(err < 1e-6, "{}: {err:e}", spec.name());
        }
    }
}

#[test]
fn space_forms_are_parallel() {
    for spec in [corpus::sphere(3), corpus::hyperbolic(3)] {
        for p in sample_points(&spec.sample_box(), 3, 9) {
            let nabla = CurvatureJets::new(&spec, &p, 5).unwrap().nabla(CurvatureId::Curvature).unwrap();
            assert!(nabla.max_abs() < 1e-9, "{}", spec.name());
        }
    }
}
