//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hyperbolic_dss::certificate::{check_boundary_norm, search_certificate, CertificateParams};
use hyperbolic_dss::controller::MeasurementSource;
use hyperbolic_dss::harness::{
    certify, compare_runs, restart_check, run, run_batch, simulate, CheckStatus, ExperimentConfig, Summary,
};
use hyperbolic_dss::linalg::Mat;
use hyperbolic_dss::model::{
    check_compatibility, reference_2x2, reference_profile, solve_compatible_eta0, ControllerParams,
    HyperbolicSystem, ProfileSpec,
};
use hyperbolic_dss::monitor::{check_dss, check_maxnorm_ineq, check_trace_ineq, decay_time, initial_functional, Tolerance};
use hyperbolic_dss::signals::{DisturbanceSpec, Signal, SignalKind};
use hyperbolic_dss::solver::{GridSpec, Mode, Solver};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn presets() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn preset(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&presets().join(format!("{name}.json"))).expect("preset loads")
}

fn quiet(n: usize) -> MeasurementSource {
    MeasurementSource::Additive(Signal::zero(n))
}

fn rel_l2(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let num: f64 = a.iter().zip(b).flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).powi(2))).sum();
    let den: f64 = b.iter().flatten().map(|x| x * x).sum();
    (num / den).sqrt()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}

fn c1_certificate() -> Verdict {
    let (sys, ctl) = reference_2x2(1.0);
    let unit = CertificateParams {
        mu: 0.1,
        nu: 0.97,
        d: vec![1.0, 1.0],
        alpha: 1.0,
        beta1: 1.0,
        beta2: 1.0,
        beta3: 1.0,
        zeta: 0.1,
    };
    let norm = check_boundary_norm(&sys, &ctl, &unit).unwrap();
    // λmax((H+BK)ᵀ(H+BK)) = (0.9375 + √0.86328125)/2
    let oracle = ((0.9375 + 0.86328125f64.sqrt()) / 2.0).sqrt();
    let norm_ok = norm.holds && (norm.norm - oracle).abs() <= 1e-6 && norm.norm < 1.0;
    let start = Instant::now();
    let found = search_certificate(&sys, &ctl, 100_000, 0).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (search_ok, note) = match &found {
        Ok(c) => (
            hyperbolic_dss::certificate::derive_constants(&sys, &ControllerParams { alpha: c.alpha, ..ctl.clone() }, c)
                .is_ok(),
            format!("certificate found (alpha {})", c.alpha),
        ),
        Err(rep) => (false, format!("search infeasible: {} (best min eig {:.3e})", rep.reason, rep.best_min_eig)),
    };
    verdict(
        norm_ok && search_ok && secs < 60.0,
        format!(
            "|H+BK| = {:.9} (closed form {:.9}, quoted 0.966081), boundary condition {}; {note}; {:.2}s",
            norm.norm,
            oracle,
            if norm.holds { "holds" } else { "fails" },
            secs
        ),
    )
}

/// `X(z,t)` for `X_t + λX_z = 0`, `X(0,t) = h X(1,t)`, `X(z,0) = a + bz`.
fn transport_oracle(lambda: f64, h: f64, a: f64, b: f64, z: f64, t: f64) -> f64 {
    if z >= lambda * t {
        a + b * (z - lambda * t)
    } else {
        h * transport_oracle(lambda, h, a, b, 1.0, t - z / lambda)
    }
}

fn c2_transport() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;

    // closed-form shifts, n = 1
    let (lambda, h) = (1.25, 0.5);
    let sys = HyperbolicSystem::new(vec![lambda], Mat::from_rows(&[[h]]).unwrap(), Mat::identity(1)).unwrap();
    let ctl = ControllerParams {
        k: Mat::zeros(1, 1),
        alpha: 1.0,
        eta0: vec![0.0],
    };
    let m = 80;
    // a = h(a + b) keeps the data compatible, so no jump rides a characteristic
    let prof = ProfileSpec::Linear {
        slope: vec![0.2],
        offset: vec![0.2],
    };
    let mut s = Solver::new(&sys, &ctl, prof.build().unwrap(), &GridSpec { m, dt: None, mode: Mode::Exact }).unwrap();
    let mut src = quiet(1);
    let mut worst: f64 = 0.0;
    for _ in 0..300 {
        s.step(&mut src).unwrap();
        let t = s.t();
        for (j, row) in s.field().iter().enumerate() {
            let z = j as f64 / m as f64;
            worst = worst.max((row[0] - transport_oracle(lambda, h, 0.2, 0.2, z, t)).abs());
        }
    }
    ok &= worst <= 1e-12;
    parts.push(format!("shift err {worst:.1e}"));

    // unit CFL upwind = exact
    let sys2 = HyperbolicSystem::new(vec![1.5, 1.5], Mat::from_rows(&[[0.25, -0.5], [0.0, 0.5]]).unwrap(), Mat::identity(2))
        .unwrap();
    let ctl2 = ControllerParams {
        k: Mat::from_rows(&[[0.0, 0.1], [-0.05, -0.1]]).unwrap(),
        alpha: 1.0,
        eta0: vec![0.0, 0.0],
    };
    let dt = 1.0 / (60.0 * 1.5);
    let p = || reference_profile().build().unwrap();
    let mut ex = Solver::new(&sys2, &ctl2, p(), &GridSpec { m: 60, dt: Some(dt), mode: Mode::Exact }).unwrap();
    let mut up = Solver::new(&sys2, &ctl2, p(), &GridSpec { m: 60, dt: Some(dt), mode: Mode::Upwind }).unwrap();
    let (mut s1, mut s2) = (quiet(2), quiet(2));
    for _ in 0..450 {
        ex.step(&mut s1).unwrap();
        up.step(&mut s2).unwrap();
    }
    let unit = max_diff(&ex.field(), &up.field());
    ok &= unit <= 1e-12;
    parts.push(format!("unit-CFL err {unit:.1e}"));

    // upwind vs exact on the reference loop at T = 5
    let disc = |m: usize| {
        let (sys, ctl) = reference_2x2(1.0);
        let mut ex = Solver::new(&sys, &ctl, p(), &GridSpec { m, dt: None, mode: Mode::Exact }).unwrap();
        let mut up = Solver::new(&sys, &ctl, p(), &GridSpec { m, dt: None, mode: Mode::Upwind }).unwrap();
        let (mut s1, mut s2) = (quiet(2), quiet(2));
        let steps = (5.0 / ex.dt()).round() as usize;
        for _ in 0..steps {
            ex.step(&mut s1).unwrap();
            up.step(&mut s2).unwrap();
        }
        rel_l2(&up.field(), &ex.field())
    };
    let e1000 = disc(1000);
    let ratio = disc(500) / disc(250);
    ok &= e1000 <= 0.02 && (0.4..=0.6).contains(&ratio);
    parts.push(format!("upwind rel L2 {e1000:.4} at M=1000, refinement ratio {ratio:.3}"));
    verdict(ok, parts.join("; "))
}

fn c3_dissipation() -> Verdict {
    let base = preset("reference-2x2-clean");
    let mut ok = true;
    let mut parts = Vec::new();
    let cases = [
        ("zero", None),
        (
            "step",
            Some(DisturbanceSpec {
                kind: SignalKind::Step,
                amplitude: 0.5,
                t0: 1.0,
                ..Default::default()
            }),
        ),
        (
            "random",
            Some(DisturbanceSpec {
                kind: SignalKind::Random,
                amplitude: 1.0,
                seed: 1,
                ..Default::default()
            }),
        ),
    ];
    for (label, d) in cases.clone() {
        let mut cfg = base.clone();
        cfg.disturbance = d;
        cfg.grid = GridSpec { m: 400, dt: None, mode: Mode::Exact };
        cfg.checks = Some(vec![hyperbolic_dss::harness::CheckName::Dissipation]);
        let dir = tempfile::tempdir().unwrap();
        let s = run(&cfg, Some(dir.path())).unwrap();
        let c = &s.checks["dissipation"];
        ok &= c.status == CheckStatus::Pass;
        parts.push(format!("{label}: {:?} [{}]", c.status, s.certificate_status));
    }
    // same three disturbances on the certifiable companion, for reference only
    let mut side = Vec::new();
    for (label, d) in cases {
        let mut cfg = preset("contractive-2x2-clean");
        cfg.disturbance = d;
        cfg.checks = Some(vec![hyperbolic_dss::harness::CheckName::Dissipation]);
        let dir = tempfile::tempdir().unwrap();
        let s = run(&cfg, Some(dir.path())).unwrap();
        side.push(format!("{label} {:?}", s.checks["dissipation"].status));
    }
    parts.push(format!("contractive system: {}", side.join(", ")));
    verdict(ok, parts.join("; "))
}

fn c4_dss() -> Verdict {
    let mut cfg = preset("contractive-2x2-clean");
    cfg.grid = GridSpec { m: 200, dt: None, mode: Mode::Exact };
    let (cert, ctl) = certify(&cfg).unwrap();
    let Some((c, dc)) = cert.constants() else {
        return verdict(false, "no certificate for the contractive system");
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = 0;
    let mut worst_ratio: f64 = 0.0;
    for k in 0..100u64 {
        let kind = [SignalKind::Random, SignalKind::Constant, SignalKind::Step, SignalKind::Decaying][k as usize % 4];
        cfg.disturbance = Some(DisturbanceSpec {
            kind,
            amplitude: rng.gen_range(0.05..1.5),
            rate: rng.gen_range(0.1..2.0),
            t0: rng.gen_range(0.0..5.0),
            seed: k,
            dwell: rng.gen_range(0.01..0.5),
            direction: Some(vec![rng.gen_range(-1.0..1.0), rng.gen_range(0.1..1.0)]),
        });
        let traj = simulate(&cfg, &ctl, Some((c, dc))).unwrap();
        let mx0 = initial_functional(&traj.samples[0]);
        let r = check_dss(&traj.samples, &traj.d_norm, dc, mx0, &Tolerance { c_tol: cfg.c_tol, dt: traj.dt, dz: traj.dz });
        if !r.holds {
            bad += 1;
        }
        worst_ratio = worst_ratio.max(r.max_ratio);
    }
    cfg.disturbance = None;
    let traj = simulate(&cfg, &ctl, Some((c, dc))).unwrap();
    let t = decay_time(&traj.samples, 1e-3);
    verdict(
        bad == 0 && t.is_some(),
        format!("{bad}/100 disturbances violate the estimate (max lhs/rhs {worst_ratio:.3e}); d=0 decay to 1e-3 at t={t:?} [contractive system]"),
    )
}

fn c5_quantized() -> Verdict {
    let cfg = preset("contractive-2x2-range");
    let dir = tempfile::tempdir().unwrap();
    let s = run(&cfg, Some(dir.path())).unwrap();
    let c = &s.checks["invariant_sets"];
    let d = &c.detail;
    verdict(
        c.status == CheckStatus::Pass,
        format!(
            "{:?}: |X(1)| > M_q at {} samples, T_eps {:?}, max |X|^2 after T_eps {} vs gamma {}, S_M kept {} [contractive system, range quantizer]",
            c.status, d["x1_violations"], s.t_eps, d["ultimate_max_sq"], d["gamma"], d["sm_ok"]
        ),
    )
}

fn ordering(names: [&str; 3]) -> (Vec<Summary>, hyperbolic_dss::harness::CompareReport) {
    let dirs: Vec<tempfile::TempDir> = names.iter().map(|_| tempfile::tempdir().unwrap()).collect();
    let jobs: Vec<_> = names
        .iter()
        .zip(&dirs)
        .map(|(n, d)| (preset(n), Some(d.path().to_path_buf())))
        .collect();
    let sums: Vec<Summary> = run_batch(&jobs).into_iter().map(|r| r.unwrap()).collect();
    let rep = compare_runs(&sums).unwrap();
    (sums, rep)
}

fn c6_figures() -> Verdict {
    let (sums, rep) = ordering(["reference-2x2-ell0.1", "reference-2x2-ell1", "reference-2x2-ell10"]);
    let (_, side) = ordering(["contractive-2x2-ell0.1", "contractive-2x2-ell1", "contractive-2x2-ell10"]);
    let converged = sums.iter().all(|s| s.blow_up.is_none() && s.ultimate_maxnorm.is_some_and(|u| u < s.initial_maxnorm));
    let ratio = rep.gamma_ratios.get(1).copied().flatten();
    let ratio_ok = ratio.is_some_and(|r| (r - 100.0).abs() <= 1e-12 * 100.0);
    let ult: Vec<String> = sums
        .iter()
        .map(|s| s.ultimate_maxnorm.map_or("n/a".into(), |u| format!("{u:.3e}")))
        .collect();
    verdict(
        converged && rep.strictly_decreasing && ratio_ok,
        format!(
            "ultimate maxnorm (l=0.1,1,10) = [{}] vs initial {:.3}, strictly decreasing {}, gamma ratio l=1/l=10 {:?}, certificate {}; contractive system: decreasing {}, gamma ratios {:?}",
            ult.join(", "),
            sums[0].initial_maxnorm,
            rep.strictly_decreasing,
            ratio,
            sums[0].certificate_status,
            side.strictly_decreasing,
            side.gamma_ratios
        ),
    )
}

fn random_trig(rng: &mut ChaCha8Rng) -> ProfileSpec {
    let n = rng.gen_range(1..=3);
    let mut coefs = || {
        let k = rng.gen_range(0..=4);
        (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>()
    };
    let cos: Vec<Vec<f64>> = (0..n).map(|_| coefs()).collect();
    let sin: Vec<Vec<f64>> = (0..n).map(|_| coefs()).collect();
    let constant = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ProfileSpec::Trig { constant, cos, sin }
}

fn c7_inequalities() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = 2000;
    let (mut p_bad, mut t_bad) = (0, 0);
    for _ in 0..100 {
        let s = random_trig(&mut rng).build().unwrap().sample_grid(m);
        if !check_maxnorm_ineq(&s).holds {
            p_bad += 1;
        }
        let s = random_trig(&mut rng).build().unwrap().sample_grid(m);
        if !check_trace_ineq(&s).holds {
            t_bad += 1;
        }
    }
    let big = 40_000;
    let sin: Vec<Vec<f64>> = (0..=big)
        .map(|j| vec![(2.0 * std::f64::consts::PI * j as f64 / big as f64).sin()])
        .collect();
    let r = check_maxnorm_ineq(&sin);
    let want = 0.5 + 2.0 * std::f64::consts::PI.powi(2);
    let err = (r.rhs - want).abs();
    verdict(
        p_bad == 0 && t_bad == 0 && err <= 1e-6,
        format!("max-norm inequality violations {p_bad}/100, trace inequality violations {t_bad}/100, sin(2 pi z) RHS error {err:.1e}"),
    )
}

fn c8_restart() -> Verdict {
    let cfg = preset("reference-2x2-clean");
    let r = restart_check(&cfg, cfg.horizon / 2.0).unwrap();
    let r0 = restart_check(&cfg, 0.0).unwrap();
    let dec = preset("contractive-2x2-decaying");
    let dir = tempfile::tempdir().unwrap();
    let s = run(&dec, Some(dir.path())).unwrap();
    let fin = s.final_maxnorm.unwrap_or(f64::INFINITY);
    let vanish = fin < 1e-3 * s.initial_maxnorm;
    verdict(
        r.passed && r.grid_aligned && r0.passed && vanish,
        format!(
            "split T/2 diff {:.1e} (tol {:.0e}), split 0 diff {:.1e}; d=e^-t final/initial maxnorm {:.2e} at T={} [contractive system]",
            r.max_abs_diff.max(r.eta_max_abs_diff),
            r.tolerance,
            r0.max_abs_diff,
            fin / s.initial_maxnorm,
            dec.horizon
        ),
    )
}

fn c9_compatibility() -> Verdict {
    let (sys, mut ctl) = reference_2x2(1.0);
    let prof = reference_profile().build().unwrap();
    let forced = solve_compatible_eta0(&sys, &ctl, &prof).unwrap();
    let forced_zero = forced.as_ref().is_some_and(|e| e.iter().all(|v| v.abs() <= 1e-14));
    let r0 = check_compatibility(&sys, &ctl, &prof).unwrap().residual;
    ctl.eta0 = vec![1.0, 1.0];
    let r1 = check_compatibility(&sys, &ctl, &prof).unwrap().residual;
    verdict(
        forced_zero && r0 == 0.0 && r1 > 0.5,
        format!("forced eta0 {forced:?}, residual {r0} at eta0=0, {r1:.6} at eta0=(1,1)"),
    )
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    ["field.csv", "boundary.csv", "monitor.csv"]
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
        .collect()
}

fn c10_determinism() -> Verdict {
    let mut names: Vec<String> = std::fs::read_dir(presets())
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "json").then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    names.sort();
    let mut differing = Vec::new();
    for n in &names {
        let cfg = preset(n);
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run(&cfg, Some(a.path())).unwrap();
        run(&cfg, Some(b.path())).unwrap();
        if read_all(a.path()) != read_all(b.path()) {
            differing.push(n.clone());
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} presets run twice, differing: {differing:?}", names.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("certificate reproduction", c1_certificate),
        ("exact transport fidelity", c2_transport),
        ("dissipation inequality on the reference loop", c3_dissipation),
        ("DSS estimate over 100 disturbances", c4_dss),
        ("quantized loop invariant sets", c5_quantized),
        ("quantized reference presets ordering", c6_figures),
        ("inequality property suites", c7_inequalities),
        ("restart and vanishing disturbance", c8_restart),
        ("compatibility check", c9_compatibility),
        ("determinism", c10_determinism),
    ];
    // optional criterion numbers on the command line select a subset
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        ran += 1;
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {:>2} {:<46} {} | {}", i + 1, name, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} passed, {failed} failed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
