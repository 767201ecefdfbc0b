//! End-to-end runs of the harness on the shipped presets.

use std::path::Path;

use super::*;
use crate::quantizer::QuantizerSpec;
use crate::solver::GridSpec;

fn preset(name: &str) -> ExperimentConfig {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../presets/{name}.json"));
    ExperimentConfig::load(&p).unwrap()
}

fn small(mut cfg: ExperimentConfig, horizon: f64) -> ExperimentConfig {
    cfg.grid = GridSpec { m: 40, ..cfg.grid };
    cfg.horizon = horizon;
    cfg
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(preset("contractive-2x2-step"), 2.0);
    let s = run(&cfg, Some(dir.path())).unwrap();
    for f in ["certificate.json", "field.csv", "boundary.csv", "monitor.csv", "summary.json"] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
    let monitor = std::fs::read_to_string(dir.path().join("monitor.csv")).unwrap();
    assert_eq!(
        monitor.lines().next().unwrap(),
        "t,V1,V2,V3,V,maxnorm,d_norm,in_SM,in_SDelta,dss_rhs,dss_slack"
    );
    // one row per step plus the header
    assert_eq!(monitor.lines().count() as u64, s.steps + 2);
    let field = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(field.lines().next().unwrap(), "t,z,X1,X2");
    let boundary = std::fs::read_to_string(dir.path().join("boundary.csv")).unwrap();
    assert_eq!(boundary.lines().next().unwrap(), "t,X1_1,X2_1,eta1,eta2,u1,u2,d1,d2");

    let back = Summary::load(&dir.path().join("summary.json")).unwrap();
    assert_eq!(back, s);
    let cert: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("certificate.json")).unwrap()).unwrap();
    assert_eq!(cert["status"], "certified");
    assert!(cert["sigma"].as_f64().unwrap() > 0.0);
}

#[test]
fn every_requested_check_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(preset("contractive-2x2-clean"), 1.0);
    cfg.checks = Some(CheckName::ALL.to_vec());
    let s = run(&cfg, Some(dir.path())).unwrap();
    assert_eq!(s.checks.len(), CheckName::ALL.len());
    // no quantizer configured
    assert_eq!(s.checks["invariant_sets"].status, CheckStatus::Inapplicable);
}

#[test]
fn zero_data_is_identically_zero() {
    let dir = tempfile::tempdir().unwrap();
    let s = run(&small(preset("zero-initial"), 2.0), Some(dir.path())).unwrap();
    assert_eq!(s.exit_code, EXIT_PASS);
    assert!(s.checks.values().all(|c| c.status == CheckStatus::Pass));
    let text = std::fs::read_to_string(dir.path().join("monitor.csv")).unwrap();
    for line in text.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').take(7).map(|v| v.parse().unwrap()).collect();
        assert!(cols[1..].iter().all(|v| *v == 0.0), "{line}");
    }
}

#[test]
fn missing_certificate_fails_dependent_checks() {
    let dir = tempfile::tempdir().unwrap();
    let s = run(&small(preset("reference-2x2-clean"), 1.0), Some(dir.path())).unwrap();
    assert_eq!(s.certificate_status, "infeasible");
    assert_eq!(s.exit_code, EXIT_CHECK_FAILED);
    assert_eq!(s.checks["compatibility"].status, CheckStatus::Pass);
    assert_eq!(s.checks["dss"].status, CheckStatus::Fail);

    let mut cfg = small(preset("reference-2x2-clean"), 1.0);
    cfg.certificate = CertificateChoice::Keyword("none".into());
    let s = run(&cfg, Some(dir.path())).unwrap();
    assert_eq!(s.checks["dss"].status, CheckStatus::Inapplicable);
    assert_eq!(s.checks["decay"].status, CheckStatus::Fail);
}

#[test]
fn explicit_certificate_with_wrong_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(preset("contractive-2x2-clean"), 1.0);
    let rep = search_cert(&cfg).unwrap();
    let mut params: CertificateParams = serde_json::from_value(rep.clone()).unwrap();
    params.alpha *= 2.0;
    cfg.certificate = CertificateChoice::Explicit(params.clone());
    assert!(matches!(run(&cfg, Some(dir.path())), Err(Error::Config(_))));

    // the searched one, given explicitly, reproduces the searched run
    params.alpha /= 2.0;
    cfg.controller.alpha = params.alpha;
    cfg.certificate = CertificateChoice::Explicit(params);
    let s = run(&cfg, Some(dir.path())).unwrap();
    assert_eq!(s.certificate_status, "certified");
}

#[test]
fn identical_runs_compare_equal() {
    let cfg = small(preset("contractive-2x2-random"), 2.0);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let sa = run(&cfg, Some(a.path())).unwrap();
    let sb = run(&cfg, Some(b.path())).unwrap();
    let ua = sa.ultimate_maxnorm.unwrap();
    assert!((ua - sb.ultimate_maxnorm.unwrap()).abs() <= 1e-12);
    for f in ["monitor.csv", "boundary.csv", "field.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
    let rep = compare_runs(&[sa, sb]).unwrap();
    assert!(!rep.strictly_decreasing);
    assert!(compare_runs(&[]).is_err());
}

#[test]
fn seed_changes_random_disturbance() {
    let mut cfg = small(preset("contractive-2x2-random"), 1.0);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run(&cfg, Some(a.path())).unwrap();
    cfg.seed = 99;
    run(&cfg, Some(b.path())).unwrap();
    assert_ne!(
        std::fs::read(a.path().join("boundary.csv")).unwrap(),
        std::fs::read(b.path().join("boundary.csv")).unwrap()
    );
}

#[test]
fn quantized_ordering_and_gamma() {
    let mut sums = Vec::new();
    for ell in [1.0, 10.0] {
        let mut cfg = small(preset("contractive-2x2-ell1"), 10.0);
        cfg.quantizer = Some(QuantizerSpec::Floor { ell });
        let dir = tempfile::tempdir().unwrap();
        sums.push(run(&cfg, Some(dir.path())).unwrap());
    }
    let rep = compare_runs(&sums).unwrap();
    assert!(rep.strictly_decreasing);
    let r = rep.gamma_ratios[0].unwrap();
    assert!((r - 100.0).abs() <= 1e-10);
    assert!(rep.entries.iter().all(|e| e.within_gamma == Some(true)));
}

#[test]
fn restart_agrees_and_rejects_bad_split() {
    let cfg = small(preset("contractive-2x2-step"), 2.0);
    let r = restart_check(&cfg, 0.7).unwrap();
    assert!(r.passed, "{r:?}");
    assert!(restart_check(&cfg, 5.0).is_err());
}

#[test]
fn blow_up_is_reported_with_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(preset("reference-2x2-clean"), 80.0);
    cfg.certificate = CertificateChoice::Keyword("none".into());
    cfg.output.field_stride = 10.0;
    let s = run(&cfg, Some(dir.path())).unwrap();
    assert_eq!(s.exit_code, EXIT_BLOW_UP);
    let b = s.blow_up.unwrap();
    assert!(b.t > 30.0 && b.t < 80.0 && b.magnitude > 1e12, "{b:?}");
}
