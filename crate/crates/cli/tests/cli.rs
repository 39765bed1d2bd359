use std::path::{Path, PathBuf};

use finsler_cli::{
    load_config, run_cli, write_config, Checks, MetricRef, Report, RunConfig, Samples, EXIT_FAIL, EXIT_INVALID, EXIT_OK,
};
use finsler_core::corpus;
use finsler_core::metric::MetricSource;
use finsler_core::recurrence::classify::Membership;
use finsler_core::recurrence::{CheckStatus, RecurrenceKind};
use proptest::prelude::*;
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("finsler").chain(args.iter().copied());
    let code = run_cli(argv, &mut out, &mut err);
    Run { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn metrics_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../metrics")
}

fn read_report(p: &Path) -> Report {
    Report::from_json(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn bundled_metric_files_match_the_corpus() {
    let mut specs: Vec<_> = (2..=4).flat_map(corpus::standard).collect();
    specs.push(corpus::schwarzschild());
    for s in specs {
        let text = std::fs::read_to_string(metrics_dir().join(format!("{}.json", s.name()))).unwrap();
        let src: MetricSource = serde_json::from_str(&text).unwrap();
        assert_eq!(&src, s.source());
    }
}

#[test]
fn verify_cartan_axioms_on_sphere_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let metric = metrics_dir().join("sphere3.json");
    let r = run(&[
        "verify",
        "--metric",
        path_str(&metric),
        "--checks",
        "cartan-axioms",
        "--samples",
        "20",
        "--seed",
        "7",
        "-o",
        path_str(&out),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.stdout, r.stderr);
    let rep = read_report(&out);
    assert_eq!(rep.checks.len(), 1);
    assert_eq!(rep.points.len(), 20);
    let c = &rep.checks[0];
    assert_eq!(c.status, CheckStatus::Pass);
    assert!(c.conclusion("metricity").unwrap() < 1e-8);
}

#[test]
fn classify_hgf_scene() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("hgf_n4_seed11.json");
    let r = run(&["synth", "--n", "4", "--seed", "11", "--model", "hyper_generalized", "-o", path_str(&scene)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let out = dir.path().join("classify.json");
    let r = run(&["classify", "--scene", path_str(&scene), "-o", path_str(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.contains("hyper_generalized: pass"), "{}", r.stdout);
    let line = r.stdout.lines().find(|l| l.starts_with("generalized_ricci_recurrent:")).unwrap();
    assert!(line.contains(": pass") && line.contains(" A=[") && line.contains(" B=["), "{line}");

    let rep = read_report(&out).classification.unwrap();
    let scene = finsler_core::SyntheticScene::from_json(&std::fs::read_to_string(&scene).unwrap()).unwrap();
    let gr = rep.kind(RecurrenceKind::GeneralizedRicciRecurrent);
    assert_eq!(gr.membership, Membership::Member);
    let a1 = scene.a.add(&scene.b.scale(2.0));
    let b1 = scene.b.scale(scene.r);
    assert!(gr.samples[0].a.as_ref().unwrap().max_diff(&a1) < 1e-10);
    assert!(gr.samples[0].b.as_ref().unwrap().max_diff(&b1) < 1e-10);
}

#[test]
fn synth_then_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let r = run(&["synth", "--n", "3", "--constraints", "r_zero,bianchi", "--seed", "5", "-o", path_str(&scene)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let r = run(&["verify", "--scene", path_str(&scene), "--checks", "T2.7a"]);
    assert_eq!(r.code, EXIT_OK, "{}{}", r.stdout, r.stderr);
    assert!(r.stdout.starts_with("scene "));
    assert!(r.stdout.contains("T2.7a: pass"));
}

#[test]
fn unknown_check_id_is_named() {
    let r = run(&["verify", "--metric", "sphere3", "--checks", "cartan-axioms,T9.9"]);
    assert_eq!(r.code, EXIT_INVALID);
    assert!(r.stderr.contains("T9.9"), "{}", r.stderr);
}

#[test]
fn failing_and_inapplicable_checks_exit_one() {
    // Euclidean space has no curvature, so the theorem hypotheses fail.
    let r = run(&["verify", "--metric", "euclidean3", "--checks", "T2.4a", "--samples", "2"]);
    assert_eq!(r.code, EXIT_FAIL, "{}", r.stdout);
    assert!(r.stdout.contains("not applicable") && r.stdout.contains("T2.4a: not_applicable"), "{}", r.stdout);
    let tight = run(&[
        "verify",
        "--metric",
        "randers3",
        "--checks",
        "cartan-axioms",
        "--samples",
        "2",
        "--tol",
        "metricity=1e-30",
    ]);
    assert_eq!(tight.code, EXIT_FAIL, "{}", tight.stdout);
}

#[test]
fn eval_prints_tensors() {
    let r = run(&["eval", "--metric", "sphere3", "--samples", "2", "--json"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: Value = serde_json::from_str(&r.stdout).unwrap();
    let p = &v["points"][0];
    assert_eq!(p["tensors"]["riem"]["shape"], serde_json::json!([3, 3, 3, 3]));
    assert!((p["r"].as_f64().unwrap() - 6.0).abs() < 1e-9);
}

#[test]
fn infeasible_scene_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dir.path().join("scene.json");
    let r = run(&["synth", "--n", "3", "--constraints", "einstein_like", "-o", path_str(&scene)]);
    assert_eq!(r.code, EXIT_FAIL);
    assert!(r.stdout.contains("infeasible"));
    assert!(!scene.exists());
}

fn strip_wall_clock(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with("\"wall_clock_seconds\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let mut texts = Vec::new();
    for threads in ["1", "3"] {
        for cmd in ["verify", "classify"] {
            std::env::set_var(finsler_cli::THREADS_ENV, threads);
            let r = run(&[cmd, "--metric", "randers3", "--samples", "4", "--seed", "9", "-o", path_str(&out)]);
            assert_ne!(r.code, EXIT_INVALID, "{}", r.stderr);
            texts.push(strip_wall_clock(&std::fs::read_to_string(&out).unwrap()));
        }
    }
    std::env::remove_var(finsler_cli::THREADS_ENV);
    assert_eq!(texts[0], texts[2]);
    assert_eq!(texts[1], texts[3]);
}

#[test]
fn stored_decisions_recompute_from_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    run(&["verify", "--metric", "sphere4", "--samples", "3", "-o", path_str(&out)]);
    let rep = read_report(&out);
    assert_eq!(rep.checks.len(), finsler_core::CheckId::all().len());
    assert!(rep.decisions_consistent());
    // Each check decision follows from the stored numbers alone.
    let raw: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for c in raw["checks"].as_array().unwrap() {
        let holds = |m: &Value| {
            let (v, t) = (m["value"].as_f64().unwrap(), m["tol"].as_f64().unwrap());
            if m["expect"] == "below" {
                v < t
            } else {
                v > t
            }
        };
        let hyp = c["hypotheses"].as_array().unwrap().iter().all(holds);
        let concl = c["conclusions"].as_array().unwrap().iter().all(holds);
        let expected = if !hyp {
            "not_applicable"
        } else if concl {
            "pass"
        } else {
            "fail"
        };
        assert_eq!(c["status"], expected, "{}", c["id"]);
    }
}

#[test]
fn config_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let cfg = RunConfig {
        metric: Some(MetricRef::Inline(corpus::randers_varying(3).source().clone())),
        scene: None,
        samples: Samples::Seeded { count: 5, seed: 3, bounds: Some(vec![[-0.2, 0.2]; 3]) },
        checks: Checks::List(vec!["jet-fd".into(), "T3.3a".into()]),
        tolerances: [("residual".to_string(), 1e-8)].into_iter().collect(),
        output: Some(dir.path().join("out.json")),
    };
    write_config(&cfg, &path).unwrap();
    assert_eq!(load_config(&path).unwrap(), cfg);

    let minimal =
        RunConfig::from_json(r#"{"metric": "euclidean3", "samples": {"points": [{"x": [0, 0, 0], "y": [1, 0, 0]}]}}"#)
            .unwrap();
    write_config(&minimal, &path).unwrap();
    assert_eq!(load_config(&path).unwrap(), minimal);
    let r = run(&["eval", "--config", path_str(&path)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
}

#[test]
fn config_flags_override_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"metric": "sphere3", "checks": ["remark-2.2"], "samples": {"count": 2, "seed": 1}}"#)
        .unwrap();
    let out = dir.path().join("r.json");
    let r = run(&["verify", "--config", path_str(&path), "--checks", "kn-contraction", "-o", path_str(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let rep = read_report(&out);
    assert_eq!(rep.checks[0].id, "kn-contraction");
    assert_eq!(rep.points.len(), 2);
}

fn malformed_config() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("{".to_string()),
        Just("[]".to_string()),
        Just(r#"{"metric": 3}"#.to_string()),
        (0u64..5).prop_map(|s| format!(r#"{{"metric": "sphere3", "samples": {{"count": 0, "seed": {s}}}}}"#)),
        "[a-z]{1,8}".prop_map(|k| format!(r#"{{"metric": "sphere3", "unexpected_{k}": 1}}"#)),
        "[A-Z][0-9]\\.[0-9][a-z]"
            .prop_filter("not a real id", |id| finsler_core::CheckId::parse(id).is_none())
            .prop_map(|id| format!(r#"{{"metric": "sphere3", "checks": ["{id}"]}}"#)),
        (-10.0..=0.0_f64).prop_map(|t| format!(r#"{{"metric": "sphere3", "tolerances": {{"residual": {t}}}}}"#)),
        "[a-z]{3,10}".prop_map(|k| format!(r#"{{"metric": "sphere3", "tolerances": {{"no_{k}": 1e-3}}}}"#)),
        "[a-z]{3,10}".prop_map(|m| format!(r#"{{"metric": "nosuch_{m}"}}"#)),
        Just(r#"{"samples": {"count": 2, "seed": 1}}"#.to_string()),
        Just(r#"{"metric": "sphere3", "samples": {"points": []}}"#.to_string()),
        Just(r#"{"metric": "sphere3", "samples": {"points": [{"x": [0, 0], "y": [1, 0]}]}}"#.to_string()),
        Just(
            r#"{"metric": "sphere3", "samples": {"count": 2, "seed": 1, "box": [[1, 0], [0, 1], [0, 1]]}}"#.to_string()
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn malformed_configs_exit_two(text in malformed_config(), cmd in prop::sample::select(vec!["eval", "verify", "classify"])) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, &text).unwrap();
        let r = run(&[cmd, "--config", path_str(&path)]);
        prop_assert_eq!(r.code, EXIT_INVALID, "{} {}", text, r.stdout);
        prop_assert!(!r.stderr.is_empty());
    }

    #[test]
    fn malformed_flags_exit_two(args in prop_oneof![
        Just(vec!["frobnicate"]),
        Just(vec!["verify"]),
        Just(vec!["verify", "--metric", "sphere3", "--samples", "0"]),
        Just(vec!["verify", "--metric", "sphere3", "--samples", "-3"]),
        Just(vec!["verify", "--metric", "sphere3", "--tol", "residual"]),
        Just(vec!["verify", "--metric", "sphere3", "--tol", "residual=-1"]),
        Just(vec!["verify", "--metric", "sphere3", "--scene", "x.json"]),
        Just(vec!["synth", "--n", "7", "-o", "unused.json"]),
        Just(vec!["synth", "--n", "3", "--constraints", "bogus", "-o", "unused.json"]),
        Just(vec!["synth", "--n", "3", "--model", "bogus", "-o", "unused.json"]),
        Just(vec!["classify", "--metric", "sphere2"]),
        Just(vec!["eval", "--scene", "missing.json"]),
    ]) {
        let r = run(&args);
        prop_assert_eq!(r.code, EXIT_INVALID, "{:?}: {}", args, r.stdout);
    }
}
