//! Synthetic curvature scenes: random `g`, `𝐑` of a chosen symmetry class,
//! planted recurrence forms, and linear constraints imposed by nullspace
//! projection.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CurvatureSample, RecurrenceKind};
use crate::connection::PipelineError;
use crate::curvature::{big_g, cyclic_sum_args, kn_slotwise};
use crate::tensor::{OneForm, Tensor, TensorAtPoint, TensorDump, TensorError};

/// Singular values below this fraction of the largest count as zero.
const RANK_TOL: f64 = 1e-10;
/// Post-projection constraint residual bound.
pub const CONSTRAINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    /// Antisymmetric in each pair only.
    Antisym,
    /// Antisymmetric pairs and pair symmetry.
    PairSym,
    /// Pair symmetry and the first Bianchi identity.
    #[default]
    Algebraic,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 3] = [SymmetryClass::Antisym, SymmetryClass::PairSym, SymmetryClass::Algebraic];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "antisym" => Some(SymmetryClass::Antisym),
            "pair_sym" | "pairsym" => Some(SymmetryClass::PairSym),
            "algebraic" => Some(SymmetryClass::Algebraic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Constraints {
    /// `(∇𝐑)` cyclic over the derivative slot and the first pair vanishes.
    pub bianchi: bool,
    /// `∇r = 0`, with `r ≠ 0` for hyper-generalized scenes.
    pub r_constant: bool,
    pub r_zero: bool,
    /// `Ric = r(n−2)/(2n(n−1)) g`, which forces `Ric = 0`.
    pub einstein_like: bool,
}

impl Constraints {
    /// Parses a comma-separated list such as `r_zero,bianchi`.
    pub fn parse(list: &str) -> Result<Self, String> {
        let mut c = Constraints::default();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "bianchi" => c.bianchi = true,
                "r_constant" => c.r_constant = true,
                "r_zero" => c.r_zero = true,
                "einstein_like" => c.einstein_like = true,
                other => return Err(format!("unknown constraint `{other}`")),
            }
        }
        Ok(c)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.bianchi {
            v.push("bianchi");
        }
        if self.r_constant {
            v.push("r_constant");
        }
        if self.r_zero {
            v.push("r_zero");
        }
        if self.einstein_like {
            v.push("einstein_like");
        }
        v
    }
}

/// Scenes that plant a proof-step hypothesis instead of a defining equation:
/// `∇ℂ = A⊗ℂ + B⊗𝐆` together with a prescribed `∇Ric`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProofStep {
    /// `∇Ric = −(n−2)/2 B⊗g`.
    #[serde(rename = "proof_ricci_metric")]
    RicciMetric,
    /// `∇Ric = A⊗Ric`.
    #[serde(rename = "proof_ricci_recurrent")]
    RicciRecurrent,
    /// `∇Ric = A⊗Ric − (n−2)/2 B⊗g`.
    #[serde(rename = "proof_ricci_mixed")]
    RicciMixed,
}

/// What the scene's derivative tensors are built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SceneModel {
    Kind(RecurrenceKind),
    ProofStep(ProofStep),
}

impl SceneModel {
    pub fn parse(tag: &str) -> Option<Self> {
        serde_json::from_value(serde_json::Value::String(tag.to_string())).ok()
    }

    pub fn tag(&self) -> String {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::String(s)) => s,
            _ => unreachable!("scene models serialize as strings"),
        }
    }
}

/// Why a constraint set admits no nonzero curvature tensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    pub n: usize,
    pub seed: u64,
    pub model: SceneModel,
    pub symmetry_class: SymmetryClass,
    pub constraints: Vec<String>,
    pub unknowns: usize,
    pub rank: usize,
    pub residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("scene dimension {0} outside 3..=5")]
    Dimension(usize),
    #[error("infeasible constraint set: {}", .0.reason)]
    Infeasible(Box<InfeasibilityReport>),
    #[error("tensor error: {0}")]
    Tensor(#[from] TensorError),
    #[error("pipeline error: {0}")]
    Pipeline(#[from] PipelineError),
    #[error("inconsistent scene file: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneDiagnostics {
    /// Free directions left after the constraints.
    pub nullspace_dim: usize,
    /// Largest absolute constraint value after projection.
    pub constraint_residual: f64,
    /// Relative cyclic residual of `∇𝐑`.
    pub bianchi_residual: f64,
    /// `|contraction of ∇𝐑 − ∇Ric| / |∇Ric|` for proof-step scenes.
    pub contraction_consistency: Option<f64>,
}

/// A point's worth of curvature data with planted recurrence forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SceneFile", try_from = "SceneFile")]
pub struct SyntheticScene {
    pub n: usize,
    pub seed: u64,
    pub model: SceneModel,
    pub symmetry_class: SymmetryClass,
    pub constraints: Constraints,
    pub g: TensorAtPoint,
    pub riem: TensorAtPoint,
    pub ric: TensorAtPoint,
    pub r: f64,
    pub a: OneForm,
    pub b: OneForm,
    pub nabla_riem: TensorAtPoint,
    pub nabla_ric: TensorAtPoint,
    pub nabla_r: TensorAtPoint,
    /// `∇A`, `∇B`, derivative slot first.
    pub nabla_forms: Option<(TensorAtPoint, TensorAtPoint)>,
    pub diagnostics: SceneDiagnostics,
}

impl SyntheticScene {
    pub fn sample(&self) -> Result<CurvatureSample, SceneError> {
        let mut s = CurvatureSample::from_curvature(
            self.g.clone(),
            self.riem.clone(),
            self.nabla_riem.clone(),
            Some(self.nabla_ric.clone()),
        )?;
        s.dbar_forms =
            self.nabla_forms.as_ref().map(|(da, db)| (crate::curvature::dbar_of(da), crate::curvature::dbar_of(db)));
        s.planted = Some(super::PlantedForms {
            kind: match self.model {
                SceneModel::Kind(k) => k,
                SceneModel::ProofStep(_) => RecurrenceKind::GeneralizedConharmonic,
            },
            a: self.a.clone(),
            b: self.b.clone(),
        });
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneFile {
    n: usize,
    seed: u64,
    model: SceneModel,
    symmetry_class: SymmetryClass,
    flags: SceneFlags,
    tensors: SceneTensors,
    planted: PlantedForms,
    diagnostics: SceneDiagnostics,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneFlags {
    bianchi_imposed: bool,
    r_constant: bool,
    r_zero: bool,
    einstein_like: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SceneTensors {
    g: TensorDump,
    riem: TensorDump,
    ric: TensorDump,
    r: f64,
    nabla_riem: TensorDump,
    nabla_ric: TensorDump,
    nabla_r: TensorDump,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PlantedForms {
    a: OneForm,
    b: OneForm,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nabla_a: Option<TensorDump>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    nabla_b: Option<TensorDump>,
}

impl From<SyntheticScene> for SceneFile {
    fn from(s: SyntheticScene) -> Self {
        let (nabla_a, nabla_b) = match &s.nabla_forms {
            Some((a, b)) => (Some(a.dump()), Some(b.dump())),
            None => (None, None),
        };
        SceneFile {
            n: s.n,
            seed: s.seed,
            model: s.model,
            symmetry_class: s.symmetry_class,
            flags: SceneFlags {
                bianchi_imposed: s.constraints.bianchi,
                r_constant: s.constraints.r_constant,
                r_zero: s.constraints.r_zero,
                einstein_like: s.constraints.einstein_like,
            },
            tensors: SceneTensors {
                g: s.g.dump(),
                riem: s.riem.dump(),
                ric: s.ric.dump(),
                r: s.r,
                nabla_riem: s.nabla_riem.dump(),
                nabla_ric: s.nabla_ric.dump(),
                nabla_r: s.nabla_r.dump(),
            },
            planted: PlantedForms { a: s.a, b: s.b, nabla_a, nabla_b },
            diagnostics: s.diagnostics,
        }
    }
}

impl TryFrom<SceneFile> for SyntheticScene {
    type Error = SceneError;

    fn try_from(f: SceneFile) -> Result<Self, SceneError> {
        let load = |d: &TensorDump, rank: usize, what: &str| -> Result<TensorAtPoint, SceneError> {
            let t = Tensor::from_dump(d)?;
            if t.dim() != f.n || t.rank() != rank {
                return Err(SceneError::Inconsistent(format!("{what} has the wrong shape")));
            }
            Ok(t)
        };
        let g = load(&f.tensors.g, 2, "g")?;
        let riem = load(&f.tensors.riem, 4, "riem")?;
        let ginv = g.inverse()?;
        let ric = riem.contract(1, 3, &ginv);
        let r = ric.contract(0, 1, &ginv).data()[0];
        if ric.dump() != f.tensors.ric || r.to_bits() != f.tensors.r.to_bits() {
            return Err(SceneError::Inconsistent("Ric and r must be the contractions of R".into()));
        }
        if f.planted.a.dim() != f.n || f.planted.b.dim() != f.n {
            return Err(SceneError::Inconsistent("planted forms have the wrong length".into()));
        }
        let nabla_forms = match (&f.planted.nabla_a, &f.planted.nabla_b) {
            (Some(a), Some(b)) => Some((load(a, 2, "nabla_a")?, load(b, 2, "nabla_b")?)),
            (None, None) => None,
            _ => return Err(SceneError::Inconsistent("nabla_a and nabla_b come together".into())),
        };
        Ok(SyntheticScene {
            n: f.n,
            seed: f.seed,
            model: f.model,
            symmetry_class: f.symmetry_class,
            constraints: Constraints {
                bianchi: f.flags.bianchi_imposed,
                r_constant: f.flags.r_constant,
                r_zero: f.flags.r_zero,
                einstein_like: f.flags.einstein_like,
            },
            nabla_riem: load(&f.tensors.nabla_riem, 5, "nabla_riem")?,
            nabla_ric: load(&f.tensors.nabla_ric, 3, "nabla_ric")?,
            nabla_r: load(&f.tensors.nabla_r, 1, "nabla_r")?,
            g,
            riem,
            ric,
            r,
            a: f.planted.a,
            b: f.planted.b,
            nabla_forms,
            diagnostics: f.diagnostics,
        })
    }
}

/// Basis of rank-4 tensors of a symmetry class, as flat component vectors.
pub fn curvature_basis(n: usize, class: SymmetryClass) -> Vec<Vec<f64>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let len = n.pow(4);
    let idx = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
    let elementary = |p: (usize, usize), q: (usize, usize), v: &mut [f64]| {
        v[idx(p.0, p.1, q.0, q.1)] += 1.0;
        v[idx(p.1, p.0, q.0, q.1)] -= 1.0;
        v[idx(p.0, p.1, q.1, q.0)] -= 1.0;
        v[idx(p.1, p.0, q.1, q.0)] += 1.0;
    };
    let mut basis = Vec::new();
    match class {
        SymmetryClass::Antisym => {
            for &p in &pairs {
                for &q in &pairs {
                    let mut v = vec![0.0; len];
                    elementary(p, q, &mut v);
                    basis.push(v);
                }
            }
        }
        SymmetryClass::PairSym | SymmetryClass::Algebraic => {
            for (a, &p) in pairs.iter().enumerate() {
                for &q in &pairs[a..] {
                    let mut v = vec![0.0; len];
                    elementary(p, q, &mut v);
                    if p != q {
                        elementary(q, p, &mut v);
                    }
                    basis.push(v);
                }
            }
        }
    }
    if class == SymmetryClass::Algebraic {
        let cyc = |v: &[f64]| -> Vec<f64> {
            let t = TensorAtPoint::from_fn(n, 4, |i| v[idx(i[0], i[1], i[2], i[3])]);
            cyclic_sum_args(&t, (0, 1, 2)).expect("rank 4").data().to_vec()
        };
        let images: Vec<Vec<f64>> = basis.iter().map(|v| cyc(v)).collect();
        let null = nullspace(&images, len);
        basis = null
            .iter()
            .map(|w| {
                let mut v = vec![0.0; len];
                for (c, b) in w.iter().zip(&basis) {
                    for (x, y) in v.iter_mut().zip(b) {
                        *x += c * y;
                    }
                }
                v
            })
            .collect();
    }
    basis
}

/// Orthonormal nullspace of the map whose columns (images of unit vectors)
/// are `columns`, each of length `rows`.
fn nullspace(columns: &[Vec<f64>], rows: usize) -> Vec<Vec<f64>> {
    let d = columns.len();
    let m = DMatrix::from_fn(rows.max(d), d, |i, j| if i < rows { columns[j][i] } else { 0.0 });
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    (0..d)
        .filter(|&k| svd.singular_values[k] <= RANK_TOL * smax || smax == 0.0)
        .map(|k| vt.row(k).iter().copied().collect())
        .collect()
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn normals(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| normal(rng)).collect()
}

/// Random ingredients fixed before `𝐑` is chosen; every derivative tensor is
/// affine in `𝐑` given these.
struct Planter {
    n: usize,
    model: SceneModel,
    g: TensorAtPoint,
    ginv: TensorAtPoint,
    big_g: TensorAtPoint,
    a: Vec<f64>,
    b: Vec<f64>,
    e: Vec<f64>,
    /// Symmetric `Z_m`, stacked as `[m, i, j]`.
    z: Vec<TensorAtPoint>,
}

struct Planted {
    nabla_riem: TensorAtPoint,
    nabla_ric: TensorAtPoint,
    ric: TensorAtPoint,
    r: f64,
}

impl Planter {
    fn stack(&self, parts: &[TensorAtPoint]) -> TensorAtPoint {
        let rank = parts[0].rank() + 1;
        TensorAtPoint::from_fn(self.n, rank, |i| *parts[i[0]].get(&i[1..]))
    }

    /// `Z_m` shifted by a multiple of `g` so that `tr Z_m = target[m]`.
    fn z_with_trace(&self, target: &[f64]) -> TensorAtPoint {
        let nf = self.n as f64;
        let parts: Vec<TensorAtPoint> = self
            .z
            .iter()
            .zip(target)
            .map(|(z, t)| {
                let tr = z.contract(0, 1, &self.ginv).data()[0];
                let mut out = z.clone();
                out.axpy((t - tr) / nf, &self.g);
                out
            })
            .collect();
        self.stack(&parts)
    }

    fn plant(&self, riem: &TensorAtPoint) -> Planted {
        let n = self.n;
        let nf = n as f64;
        let ric = riem.contract(1, 3, &self.ginv);
        let r = ric.contract(0, 1, &self.ginv).data()[0];
        let ric_s = ric.symmetrized();
        let g_ric = Tensor::kulkarni_nomizu_unchecked(&self.g, &ric_s);
        let conharmonic = riem.sub(&g_ric.scale(1.0 / (nf - 2.0)));
        let concircular = riem.sub(&self.big_g.scale(r / (nf * (nf - 1.0))));
        let (a, b) = (&self.a[..], &self.b[..]);
        let outer = Tensor::outer_form;
        let mut nabla_ric = None;
        let nabla_riem = match self.model {
            SceneModel::Kind(kind) => {
                use RecurrenceKind::*;
                match kind {
                    Recurrent | RicciRecurrent => outer(a, riem),
                    GeneralizedRecurrent => outer(a, riem).add(&outer(b, &self.big_g)),
                    GeneralizedRicciRecurrent => outer(a, riem).add(&outer(b, &self.big_g).scale(1.0 / (nf - 1.0))),
                    HyperGeneralized => outer(a, riem).add(&outer(b, &g_ric)),
                    ConcircularRecurrent | GeneralizedConcircular => {
                        outer(a, &concircular).add(&outer(&self.e, &self.big_g).scale(1.0 / (nf * (nf - 1.0))))
                    }
                    ConharmonicRecurrent | ConharmonicSymmetric => {
                        let target: Vec<f64> = a.iter().map(|am| am * r).collect();
                        let z = self.z_with_trace(&target);
                        outer(a, &conharmonic).add(&kn_slotwise(&self.g, &z).scale(1.0 / (nf - 2.0)))
                    }
                    GeneralizedConharmonic => {
                        let target: Vec<f64> =
                            a.iter().zip(b).map(|(am, bm)| am * r - (nf - 1.0) * (nf - 2.0) * bm).collect();
                        let z = self.z_with_trace(&target);
                        outer(a, &conharmonic)
                            .add(&outer(b, &self.big_g))
                            .add(&kn_slotwise(&self.g, &z).scale(1.0 / (nf - 2.0)))
                    }
                }
            }
            SceneModel::ProofStep(step) => {
                let half = -(nf - 2.0) / 2.0;
                let h = match step {
                    ProofStep::RicciMetric => outer(b, &self.g).scale(half),
                    ProofStep::RicciRecurrent => outer(a, &ric),
                    ProofStep::RicciMixed => outer(a, &ric).add(&outer(b, &self.g).scale(half)),
                };
                let d = outer(a, &conharmonic)
                    .add(&outer(b, &self.big_g))
                    .add(&kn_slotwise(&self.g, &h).scale(1.0 / (nf - 2.0)));
                nabla_ric = Some(h);
                d
            }
        };
        let nabla_ric = nabla_ric.unwrap_or_else(|| nabla_riem.contract(2, 4, &self.ginv));
        Planted { nabla_riem, nabla_ric, ric, r }
    }

    fn constraint_values(&self, c: &Constraints, riem: &TensorAtPoint) -> Vec<f64> {
        let p = self.plant(riem);
        let mut out = Vec::new();
        if c.bianchi {
            out.extend_from_slice(cyclic_sum_args(&p.nabla_riem, (0, 1, 2)).expect("rank 5").data());
        }
        if c.r_zero {
            out.push(p.r);
        }
        if c.r_constant {
            out.extend_from_slice(p.nabla_ric.contract(1, 2, &self.ginv).data());
        }
        if c.einstein_like {
            // Ric = λg as a field forces r ≡ 0, so Ric and ∇Ric both vanish.
            out.extend_from_slice(p.ric.data());
            out.extend_from_slice(p.nabla_ric.data());
        }
        out
    }
}

/// Draws a scene. Randomness is fixed by `seed`; the draw order is `g`, `A`,
/// `B`, auxiliary tensors, `∇A`, `∇B`, then the nullspace coefficients.
pub fn synth_scene(
    n: usize,
    seed: u64,
    symmetry_class: SymmetryClass,
    constraints: Constraints,
    model: SceneModel,
) -> Result<SyntheticScene, SceneError> {
    if !(3..=5).contains(&n) {
        return Err(SceneError::Dimension(n));
    }
    let nf = n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let x = DMatrix::from_fn(n, n, |_, _| normal(&mut rng));
    let gm = &x * x.transpose() / nf + DMatrix::identity(n, n);
    let g = TensorAtPoint::from_fn(n, 2, |i| 0.5 * (gm[(i[0], i[1])] + gm[(i[1], i[0])]));
    let ginv = g.inverse()?;
    let mut a = normals(&mut rng, n);
    let mut b = normals(&mut rng, n);
    let mut e = normals(&mut rng, n);
    let z: Vec<TensorAtPoint> = (0..n)
        .map(|_| {
            let raw = normals(&mut rng, n * n);
            TensorAtPoint::from_fn(n, 2, |i| 0.5 * (raw[i[0] * n + i[1]] + raw[i[1] * n + i[0]]))
        })
        .collect();
    let nb_raw = normals(&mut rng, n * n);
    let na_raw = normals(&mut rng, n * n);

    let hgf = model == SceneModel::Kind(RecurrenceKind::HyperGeneralized);
    let tied = hgf && (constraints.r_zero || constraints.r_constant);
    if let SceneModel::Kind(kind) = model {
        use RecurrenceKind::*;
        match kind {
            Recurrent | RicciRecurrent | ConcircularRecurrent | ConharmonicRecurrent | GeneralizedConcircular => {
                b = vec![0.0; n]
            }
            ConharmonicSymmetric => {
                a = vec![0.0; n];
                b = vec![0.0; n];
            }
            _ => {}
        }
    }
    if constraints.einstein_like {
        e = vec![0.0; n];
    }
    if tied {
        a = b.iter().map(|bm| -2.0 * (nf - 1.0) * bm).collect();
    }
    let nabla_forms = hgf.then(|| {
        let nb = TensorAtPoint::from_fn(n, 2, |i| nb_raw[i[0] * n + i[1]]);
        let na =
            if tied { nb.scale(-2.0 * (nf - 1.0)) } else { TensorAtPoint::from_fn(n, 2, |i| na_raw[i[0] * n + i[1]]) };
        (na, nb)
    });

    let planter = Planter { n, model, big_g: big_g(&g), g: g.clone(), ginv, a: a.clone(), b: b.clone(), e, z };

    let basis = curvature_basis(n, symmetry_class);
    let d = basis.len();
    let as_tensor = |c: &[f64]| {
        let mut v = vec![0.0; n.pow(4)];
        for (ci, bi) in c.iter().zip(&basis) {
            for (x, y) in v.iter_mut().zip(bi) {
                *x += ci * y;
            }
        }
        TensorAtPoint::from_fn(n, 4, |i| v[((i[0] * n + i[1]) * n + i[2]) * n + i[3]])
    };

    let zero = TensorAtPoint::zeros(n, 4);
    let f0 = planter.constraint_values(&constraints, &zero);
    let rows = f0.len();
    let infeasible = |rank: usize, residual: f64, reason: &str| {
        SceneError::Infeasible(Box::new(InfeasibilityReport {
            n,
            seed,
            model,
            symmetry_class,
            constraints: constraints.names().iter().map(|s| s.to_string()).collect(),
            unknowns: d,
            rank,
            residual,
            reason: reason.to_string(),
        }))
    };

    let (particular, null) = if rows == 0 {
        (vec![0.0; d], (0..d).map(|k| (0..d).map(|j| f64::from(j == k)).collect()).collect())
    } else {
        let columns: Vec<Vec<f64>> = basis
            .iter()
            .enumerate()
            .map(|(k, _)| {
                let mut unit = vec![0.0; d];
                unit[k] = 1.0;
                let fk = planter.constraint_values(&constraints, &as_tensor(&unit));
                fk.iter().zip(&f0).map(|(x, y)| x - y).collect()
            })
            .collect();
        let m = DMatrix::from_fn(rows, d, |i, j| columns[j][i]);
        let rhs = DMatrix::from_fn(rows, 1, |i, _| -f0[i]);
        let svd = m.clone().svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
        let rank = svd.singular_values.iter().filter(|&&s| s > RANK_TOL * smax).count();
        let cp = svd.solve(&rhs, RANK_TOL * smax).expect("requested");
        let particular: Vec<f64> = cp.iter().copied().collect();
        let res = (&m * &cp - &rhs).abs().max();
        let scale = f0.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
        if res > CONSTRAINT_TOL * scale {
            return Err(infeasible(rank, res, "constraints are inconsistent for the planted forms"));
        }
        (particular, nullspace(&columns, rows))
    };

    let w = normals(&mut rng, null.len());
    let mut c = particular;
    for (wk, v) in w.iter().zip(&null) {
        for (ci, vi) in c.iter_mut().zip(v) {
            *ci += wk * vi;
        }
    }
    let riem = as_tensor(&c);
    if riem.max_abs() < 1e-8 {
        return Err(infeasible(d - null.len(), 0.0, "only R = 0 satisfies the constraints"));
    }
    let constraint_residual =
        planter.constraint_values(&constraints, &riem).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if constraint_residual > CONSTRAINT_TOL * riem.max_abs().max(1.0) {
        return Err(infeasible(d - null.len(), constraint_residual, "projection residual above tolerance"));
    }
    if hgf && constraints.r_constant && planter.plant(&riem).r.abs() < 1e-8 {
        return Err(infeasible(d - null.len(), 0.0, "constant r is forced to zero"));
    }

    let p = planter.plant(&riem);
    let contracted = p.nabla_riem.contract(2, 4, &planter.ginv);
    let contraction_consistency = matches!(model, SceneModel::ProofStep(_))
        .then(|| contracted.sub(&p.nabla_ric).norm() / p.nabla_ric.norm().max(super::fit::EPSILON));
    let bianchi = cyclic_sum_args(&p.nabla_riem, (0, 1, 2)).expect("rank 5");
    let nabla_r = p.nabla_ric.contract(1, 2, &planter.ginv);
    Ok(SyntheticScene {
        n,
        seed,
        model,
        symmetry_class,
        constraints,
        g,
        diagnostics: SceneDiagnostics {
            nullspace_dim: null.len(),
            constraint_residual,
            bianchi_residual: bianchi.norm() / p.nabla_riem.norm().max(super::fit::EPSILON),
            contraction_consistency,
        },
        riem,
        ric: p.ric,
        r: p.r,
        a: OneForm(a),
        b: OneForm(b),
        nabla_riem: p.nabla_riem,
        nabla_ric: p.nabla_ric,
        nabla_r,
        nabla_forms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Symmetry;

    fn hgf() -> SceneModel {
        SceneModel::Kind(RecurrenceKind::HyperGeneralized)
    }

    #[test]
    fn basis_dimensions() {
        for n in 3..=5 {
            let p = n * (n - 1) / 2;
            assert_eq!(curvature_basis(n, SymmetryClass::Antisym).len(), p * p);
            assert_eq!(curvature_basis(n, SymmetryClass::PairSym).len(), p * (p + 1) / 2);
            assert_eq!(curvature_basis(n, SymmetryClass::Algebraic).len(), n * n * (n * n - 1) / 12);
        }
    }

    #[test]
    fn unconstrained_scene_contracts() {
        let s = synth_scene(3, 1, SymmetryClass::Algebraic, Constraints::default(), hgf()).unwrap();
        let ginv = s.g.inverse().unwrap();
        assert_eq!(s.ric, s.riem.contract(1, 3, &ginv));
        assert!(s.riem.symmetry_residual(Symmetry::PairSym) < 1e-14);
        assert!(cyclic_sum_args(&s.riem, (0, 1, 2)).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn bianchi_projection() {
        let c = Constraints { bianchi: true, ..Default::default() };
        for n in [3, 4] {
            let s = synth_scene(n, 3, SymmetryClass::Algebraic, c, hgf()).unwrap();
            assert!(s.diagnostics.bianchi_residual < 1e-10, "{}", s.diagnostics.bianchi_residual);
        }
    }

    #[test]
    fn einstein_like_forces_ricci_flat() {
        let c = Constraints { einstein_like: true, ..Default::default() };
        let s = synth_scene(4, 2, SymmetryClass::Algebraic, c, hgf()).unwrap();
        assert!(s.ric.max_abs() < 1e-10);
        assert!(s.nabla_ric.max_abs() < 1e-10);
        assert!(matches!(synth_scene(3, 2, SymmetryClass::Algebraic, c, hgf()), Err(SceneError::Infeasible(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let c = Constraints { r_zero: true, bianchi: true, ..Default::default() };
        let s = synth_scene(3, 5, SymmetryClass::Algebraic, c, hgf()).unwrap();
        let json = s.to_json();
        let back = SyntheticScene::from_json(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn model_tags() {
        assert_eq!(SceneModel::parse("hyper_generalized"), Some(hgf()));
        assert_eq!(SceneModel::parse("proof_ricci_mixed"), Some(SceneModel::ProofStep(ProofStep::RicciMixed)));
        assert_eq!(hgf().tag(), "hyper_generalized");
    }
}
