//! Subcommands.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use finsler_core::connection::{connection_data, PipelineError};
use finsler_core::curvature::h_curvature;
use finsler_core::metric::{min_eigenvalue, sample_points};
use finsler_core::recurrence::classify::attach_homogeneity;
use finsler_core::recurrence::classify::{Membership, HOMOGENEITY_LAMBDAS};
use finsler_core::recurrence::scene::{SceneError, SceneModel};
use finsler_core::recurrence::ClassificationReport;
use finsler_core::{
    classify, corpus, run_point_check, synth_scene, CheckId, CheckReport, Constraints, CurvatureSample, EvalPoint,
    MetricSpec, SymmetryClass, SyntheticScene, TheoremId,
};
use rayon::prelude::*;

use crate::config::{load_config, Checks, ConfigError, MetricRef, RunConfig, Samples};
use crate::report::{write_report, PointSummary, PointTensors, Report, SceneSummary, Summary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "FINSLER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Cartan-connection curvature and recurrence checks for Finsler metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print connection and curvature tensors at sample points.
    Eval(RunArgs),
    /// Run geometric checks and theorem checks.
    Verify(RunArgs),
    /// Fit every recurrence class.
    Classify(RunArgs),
    /// Write a synthetic curvature scene.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON run configuration; flags given alongside override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Metric file or bundled name (euclideanN, sphereN, hyperbolicN, randersN, quarticN, schwarzschild4).
    #[arg(long, conflicts_with = "scene")]
    metric: Option<String>,
    /// Scene file written by `synth`.
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Comma-separated check ids, or `all`.
    #[arg(long)]
    checks: Option<String>,
    /// Number of seeded sample points.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tolerances: Vec<String>,
    /// Report path.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Print the report JSON instead of the text summary.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated subset of bianchi, r_constant, r_zero, einstein_like.
    #[arg(long, default_value = "")]
    constraints: String,
    /// Recurrence kind or proof-step model the derivative is planted in.
    #[arg(long, alias = "kind", default_value = "hyper_generalized")]
    model: String,
    /// antisym, pair_sym or algebraic.
    #[arg(long, default_value = "algebraic")]
    symmetry: String,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug)]
enum RunError {
    Invalid(String),
    Io(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Invalid(e.to_string())
    }
}

/// Runs the command line and returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return EXIT_INVALID;
        }
    };
    let mut buf: Vec<u8> = Vec::new();
    let result = pool.install(|| match cli.command {
        Command::Eval(a) => run_report("eval", a, &mut buf),
        Command::Verify(a) => run_report("verify", a, &mut buf),
        Command::Classify(a) => run_report("classify", a, &mut buf),
        Command::Synth(a) => run_synth(a, &mut buf),
    });
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(RunError::Invalid(m) | RunError::Io(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INVALID
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize =
            v.parse().ok().filter(|n| *n >= 1).ok_or_else(|| format!("{THREADS_ENV}={v} is not a positive integer"))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

fn merge_config(a: &RunArgs) -> Result<RunConfig, RunError> {
    let mut cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &a.metric {
        cfg.metric = Some(MetricRef::Named(m.clone()));
        cfg.scene = None;
    }
    if let Some(s) = &a.scene {
        cfg.scene = Some(s.clone());
        cfg.metric = None;
    }
    if let Some(c) = &a.checks {
        cfg.checks = Checks::parse(c);
    }
    if a.samples.is_some() || a.seed.is_some() {
        let (count, seed, bounds) = match &cfg.samples {
            Samples::Seeded { count, seed, bounds } => (*count, *seed, bounds.clone()),
            Samples::Points { .. } => (crate::config::DEFAULT_SAMPLES, 0, None),
        };
        cfg.samples = Samples::Seeded { count: a.samples.unwrap_or(count), seed: a.seed.unwrap_or(seed), bounds };
    }
    let mut errs = Vec::new();
    for t in &a.tolerances {
        match t.split_once('=').map(|(k, v)| (k.trim(), v.trim().parse::<f64>())) {
            Some((k, Ok(v))) => {
                cfg.tolerances.insert(k.to_string(), v);
            }
            _ => errs.push(format!("`--tol {t}`: expected NAME=VALUE")),
        }
    }
    if a.output.is_some() {
        cfg.output = a.output.clone();
    }
    if let Err(ConfigError::Invalid(mut list)) = cfg.validate() {
        errs.append(&mut list);
    }
    if !errs.is_empty() {
        return Err(ConfigError::Invalid(errs).into());
    }
    Ok(cfg)
}

fn resolve_metric(m: &MetricRef) -> Result<MetricSpec, RunError> {
    match m {
        MetricRef::Inline(src) => {
            MetricSpec::from_source(src.clone()).map_err(|e| RunError::Invalid(format!("metric: {e}")))
        }
        MetricRef::Named(name) => {
            let path = Path::new(name);
            if path.is_file() {
                let text =
                    std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("cannot read {name}: {e}")))?;
                let src =
                    serde_json::from_str(&text).map_err(|e| RunError::Invalid(format!("metric file {name}: {e}")))?;
                MetricSpec::from_source(src).map_err(|e| RunError::Invalid(format!("metric file {name}: {e}")))
            } else {
                corpus::by_name(name)
                    .ok_or_else(|| RunError::Invalid(format!("unknown metric `{name}`: not a file or a bundled name")))
            }
        }
    }
}

fn points_for(spec: &MetricSpec, samples: &Samples) -> Result<Vec<EvalPoint>, RunError> {
    let n = spec.dim();
    match samples {
        Samples::Points { points } => {
            for (i, p) in points.iter().enumerate() {
                if p.dim() != n {
                    return Err(RunError::Invalid(format!(
                        "`samples.points[{i}]`: dimension {} does not match the metric ({n})",
                        p.dim()
                    )));
                }
            }
            Ok(points.clone())
        }
        Samples::Seeded { count, seed, bounds } => {
            let b = bounds.clone().unwrap_or_else(|| spec.sample_box());
            if b.len() != n {
                return Err(RunError::Invalid(format!(
                    "`samples.box`: {} rows for a metric of dimension {n}",
                    b.len()
                )));
            }
            Ok(sample_points(&b, *count, *seed))
        }
    }
}

fn check_ids(checks: &Checks, scene: bool) -> Result<Vec<CheckId>, RunError> {
    match checks {
        Checks::All if scene => Ok(TheoremId::ALL.into_iter().map(CheckId::Theorem).collect()),
        Checks::All => Ok(CheckId::all()),
        Checks::List(ids) => {
            let mut out = Vec::new();
            for id in ids {
                let c = CheckId::parse(id).ok_or_else(|| RunError::Invalid(format!("unknown check id `{id}`")))?;
                if scene && matches!(c, CheckId::Geometric(_)) {
                    return Err(RunError::Invalid(format!("check `{id}` needs a metric, not a scene")));
                }
                out.push(c);
            }
            Ok(out)
        }
    }
}

fn pipeline_error(i: usize, e: PipelineError) -> RunError {
    RunError::Invalid(format!("evaluation failed at sample {i}: {e}"))
}

fn point_summary(spec: &MetricSpec, i: usize, p: &EvalPoint, full: bool) -> Result<PointSummary, RunError> {
    let err = |e: PipelineError| pipeline_error(i, e);
    let g = spec.fundamental_tensor_unchecked(p).map_err(|e| err(e.into()))?;
    let l = spec.eval_l(p).map_err(|e| err(e.into()))?;
    let c = h_curvature(spec, p).map_err(err)?;
    let tensors = if full {
        let cd = connection_data(spec, p).map_err(err)?;
        Some(PointTensors {
            g: g.dump(),
            spray: cd.spray.clone(),
            nonlinear: cd.nonlinear.dump(),
            cartan_h: cd.f.dump(),
            cartan_v: cd.cv.dump(),
            riem: c.riem.dump(),
            ric: c.ric.dump(),
            residuals: cd.residuals(&p.y),
        })
    } else {
        None
    };
    Ok(PointSummary {
        index: i,
        x: p.x.clone(),
        y: p.y.clone(),
        l,
        min_eigenvalue: min_eigenvalue(&g),
        r: c.r,
        riem_max_abs: c.riem.max_abs(),
        tensors,
    })
}

fn load_scene(path: &Path) -> Result<SyntheticScene, RunError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("cannot read {}: {e}", path.display())))?;
    SyntheticScene::from_json(&text).map_err(|e| RunError::Invalid(format!("scene {}: {e}", path.display())))
}

fn run_report(command: &str, a: RunArgs, out: &mut dyn Write) -> Result<i32, RunError> {
    let start = Instant::now();
    let cfg = merge_config(&a)?;
    let tol = cfg.tolerances();
    let mut report = Report::new(command, cfg.clone(), tol);

    match (&cfg.metric, &cfg.scene) {
        (Some(m), None) => {
            let spec = resolve_metric(m)?;
            report.metric = Some(spec.name().to_string());
            let points = points_for(&spec, &cfg.samples)?;
            let full = command == "eval";
            report.points = points
                .par_iter()
                .enumerate()
                .map(|(i, p)| point_summary(&spec, i, p, full))
                .collect::<Result<_, _>>()?;
            match command {
                "verify" => {
                    let ids = check_ids(&cfg.checks, false)?;
                    let per_point: Vec<Vec<CheckReport>> = points
                        .par_iter()
                        .enumerate()
                        .map(|(i, p)| {
                            ids.iter()
                                .map(|&id| run_point_check(id, &spec, p, i, &tol).map_err(|e| pipeline_error(i, e)))
                                .collect::<Result<Vec<_>, _>>()
                        })
                        .collect::<Result<_, _>>()?;
                    report.checks = (0..ids.len())
                        .map(|k| CheckReport::merge(per_point.iter().map(|row| row[k].clone()).collect()))
                        .collect();
                }
                "classify" => {
                    if spec.dim() < 3 {
                        return Err(RunError::Invalid(format!(
                            "classification needs n ≥ 3, metric has n = {}",
                            spec.dim()
                        )));
                    }
                    let sample = |p: &EvalPoint, i: usize| {
                        CurvatureSample::from_metric(&spec, p).map_err(|e| pipeline_error(i, e))
                    };
                    let base: Vec<CurvatureSample> =
                        points.par_iter().enumerate().map(|(i, p)| sample(p, i)).collect::<Result<_, _>>()?;
                    let scaled: Vec<Vec<CurvatureSample>> = HOMOGENEITY_LAMBDAS
                        .iter()
                        .map(|&l| {
                            points
                                .par_iter()
                                .enumerate()
                                .map(|(i, p)| sample(&p.scaled(l), i))
                                .collect::<Result<_, _>>()
                        })
                        .collect::<Result<_, _>>()?;
                    let mut rep = classify(&base, &tol).map_err(|e| RunError::Invalid(e.to_string()))?;
                    attach_homogeneity(&mut rep, &scaled, &tol);
                    report.classification = Some(rep);
                }
                _ => {}
            }
        }
        (None, Some(path)) => {
            if command == "eval" {
                return Err(RunError::Invalid("eval needs --metric".into()));
            }
            let scene = load_scene(path)?;
            report.scene = Some(SceneSummary {
                path: path.display().to_string(),
                n: scene.n,
                seed: scene.seed,
                model: scene.model.tag(),
                constraints: scene.constraints.names().iter().map(|s| s.to_string()).collect(),
            });
            let s = scene.sample().map_err(|e| RunError::Invalid(format!("scene {}: {e}", path.display())))?;
            match command {
                "verify" => {
                    report.checks = check_ids(&cfg.checks, true)?
                        .into_par_iter()
                        .map(|id| match id {
                            CheckId::Theorem(t) => finsler_core::verify_theorem(t, &s, &tol),
                            CheckId::Geometric(_) => unreachable!("rejected for scenes"),
                        })
                        .collect();
                }
                "classify" => {
                    report.classification =
                        Some(classify(std::slice::from_ref(&s), &tol).map_err(|e| RunError::Invalid(e.to_string()))?);
                }
                _ => {}
            }
        }
        _ => return Err(RunError::Invalid("exactly one of --metric or --scene is required".into())),
    }

    report.summary = Summary::of(&report.checks);
    let code = if command == "verify" && !report.summary.all_pass() { EXIT_FAIL } else { EXIT_OK };
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    if let Some(path) = &cfg.output {
        write_report(&report, path).map_err(|e| RunError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    if a.json {
        let _ = write!(out, "{}", report.to_json());
    } else {
        print_summary(&report, out);
    }
    Ok(code)
}

fn form_text(f: &Option<finsler_core::OneForm>) -> String {
    match f {
        Some(f) => format!("[{}]", f.components().iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", ")),
        None => "indeterminate".into(),
    }
}

fn print_classification(c: &ClassificationReport, out: &mut dyn Write) {
    if let Some(note) = &c.note {
        let _ = writeln!(out, "note: {note}");
    }
    for k in &c.kinds {
        let verdict = match k.membership {
            Membership::Member => "pass",
            Membership::NotMember => "fail",
            Membership::Vacuous => "vacuous",
        };
        let _ = write!(out, "{}: {verdict} residual={:.3e}", k.kind.tag(), k.max_residual);
        if k.is_member() {
            if let Some(s) = k.samples.first() {
                let _ = write!(out, " A={}", form_text(&s.a));
                if k.kind.basis().len() == 2 {
                    let _ = write!(out, " B={}", form_text(&s.b));
                }
            }
            if k.degenerate_b {
                let _ = write!(out, " (degenerate B)");
            }
        }
        let _ = writeln!(out);
    }
}

fn print_summary(r: &Report, out: &mut dyn Write) {
    if let Some(m) = &r.metric {
        let _ = writeln!(out, "metric {m}, {} sample(s)", r.points.len());
    }
    if let Some(s) = &r.scene {
        let _ = writeln!(out, "scene {} (n={}, seed={}, model={})", s.path, s.n, s.seed, s.model);
    }
    if r.command == "eval" {
        for p in &r.points {
            let _ = writeln!(
                out,
                "point {}: L={:.12} r={:.12} max|R|={:.6e} min eig g={:.6e}",
                p.index, p.l, p.r, p.riem_max_abs, p.min_eigenvalue
            );
            if let Some(t) = &p.tensors {
                let _ = writeln!(out, "  g = {:?}", t.g.data);
                let _ = writeln!(out, "  G = {:?}", t.spray);
                let _ = writeln!(out, "  Ric = {:?}", t.ric.data);
            }
        }
    }
    for c in &r.checks {
        let status =
            serde_json::to_value(c.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
        let _ = write!(out, "{}: {status}", c.id);
        for m in c.hypotheses.iter().filter(|m| !m.holds()) {
            let _ = write!(out, " [hypothesis {} = {:.3e}]", m.name, m.value);
        }
        for m in &c.conclusions {
            let _ = write!(out, " {}={:.3e}", m.name, m.value);
        }
        let _ = writeln!(out);
    }
    if let Some(c) = &r.classification {
        print_classification(c, out);
    }
    if r.command == "verify" {
        let s = r.summary;
        let _ = writeln!(out, "{} pass, {} fail, {} not applicable", s.pass, s.fail, s.not_applicable);
    }
}

fn run_synth(a: SynthArgs, out: &mut dyn Write) -> Result<i32, RunError> {
    let mut errs = Vec::new();
    let constraints = Constraints::parse(&a.constraints).unwrap_or_else(|e| {
        errs.push(format!("`--constraints`: {e}"));
        Constraints::default()
    });
    let model = SceneModel::parse(&a.model);
    if model.is_none() {
        errs.push(format!("`--model`: unknown model `{}`", a.model));
    }
    let symmetry = SymmetryClass::parse(&a.symmetry);
    if symmetry.is_none() {
        errs.push(format!("`--symmetry`: unknown class `{}`", a.symmetry));
    }
    if !(3..=5).contains(&a.n) {
        errs.push(format!("`--n`: {} is outside 3..=5", a.n));
    }
    if !errs.is_empty() {
        return Err(ConfigError::Invalid(errs).into());
    }
    let (model, symmetry) = (model.expect("checked"), symmetry.expect("checked"));
    match synth_scene(a.n, a.seed, symmetry, constraints, model) {
        Ok(scene) => {
            std::fs::write(&a.output, scene.to_json())
                .map_err(|e| RunError::Io(format!("cannot write {}: {e}", a.output.display())))?;
            let _ = writeln!(
                out,
                "wrote {} (n={}, seed={}, model={}, nullspace dim {}, constraint residual {:.2e})",
                a.output.display(),
                scene.n,
                scene.seed,
                scene.model.tag(),
                scene.diagnostics.nullspace_dim,
                scene.diagnostics.constraint_residual
            );
            Ok(EXIT_OK)
        }
        Err(SceneError::Infeasible(rep)) => {
            let _ = writeln!(out, "infeasible: {}", serde_json::to_string_pretty(&rep).expect("serializes"));
            Ok(EXIT_FAIL)
        }
        Err(e) => Err(RunError::Invalid(e.to_string())),
    }
}
