//! Experiment runner: certificate, simulation, checks, artifacts.

mod config;
mod output;
#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use config::{
    CertificateChoice, CheckName, ExperimentConfig, OutputConfig, SearchConfig, DEFAULT_BUDGET,
    DEFAULT_FIELD_STRIDE,
};
pub use output::{write_boundary_csv, write_field_csv, write_monitor_csv, FieldRow, MonitorRow};

use crate::certificate::{
    check_boundary_norm, derive_constants_with, search_certificate, CertificateParams, CertificateReport,
    DerivedConstants,
};
use crate::controller::MeasurementSource;
use crate::error::{Error, Result};
use crate::model::{check_compatibility, ControllerParams};
use crate::monitor::{
    check_dissipation, check_dss, check_invariant_sets, check_iss_combined, check_sandwich,
    choose_eps, classify, decay_time, dss_rhs, eval_v, initial_functional, running_max,
    sdelta_level, sm_level, InvariantSetReport, LyapunovSample, Tolerance,
};
use crate::solver::{BoundaryRecord, Solver};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOW_UP: i32 = 3;

/// Fraction of the horizon after which the ultimate maxnorm is measured.
pub const ULTIMATE_WINDOW: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub status: CheckStatus,
    pub detail: Value,
}

impl CheckOutcome {
    fn of(pass: bool, detail: Value) -> Self {
        Self {
            status: if pass { CheckStatus::Pass } else { CheckStatus::Fail },
            detail,
        }
    }

    fn inapplicable(reason: &str) -> Self {
        Self {
            status: CheckStatus::Inapplicable,
            detail: json!({ "reason": reason }),
        }
    }

    fn fail(reason: &str) -> Self {
        Self {
            status: CheckStatus::Fail,
            detail: json!({ "reason": reason }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowUpInfo {
    pub t: f64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub exit_code: i32,
    pub certificate_status: String,
    pub alpha: f64,
    pub checks: BTreeMap<String, CheckOutcome>,
    pub horizon: f64,
    pub dt: f64,
    pub dz: f64,
    pub steps: u64,
    pub grid_aligned: bool,
    pub compatibility_residual: f64,
    pub initial_maxnorm: f64,
    pub final_maxnorm: Option<f64>,
    /// Largest `max_z |X|` over the last fifth of the horizon.
    pub ultimate_maxnorm: Option<f64>,
    pub decay_time: Option<f64>,
    pub delta_q: Option<f64>,
    #[serde(rename = "M_q")]
    pub m_q: Option<f64>,
    pub rate_bound: Option<f64>,
    pub eps: Option<f64>,
    /// `γ_ε(Δ_q)`, bound on `max_z |X|²` after `T_ε`.
    pub gamma_eps: Option<f64>,
    pub t_eps: Option<f64>,
    pub blow_up: Option<BlowUpInfo>,
    pub warnings: Vec<String>,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.exit_code == EXIT_PASS
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Outcome of resolving the `certificate` block.
#[derive(Clone, Debug)]
pub enum Certification {
    Certified {
        cert: CertificateParams,
        dc: DerivedConstants,
        source: &'static str,
    },
    Infeasible(crate::certificate::InfeasibleReport),
    None,
}

impl Certification {
    pub fn status(&self) -> &'static str {
        match self {
            Certification::Certified { .. } => "certified",
            Certification::Infeasible(_) => "infeasible",
            Certification::None => "none",
        }
    }

    pub fn constants(&self) -> Option<(&CertificateParams, &DerivedConstants)> {
        match self {
            Certification::Certified { cert, dc, .. } => Some((cert, dc)),
            _ => None,
        }
    }
}

/// Resolves the certificate and returns the controller the loop will run with
/// (a searched certificate fixes α).
pub fn certify(cfg: &ExperimentConfig) -> Result<(Certification, ControllerParams)> {
    let sys = &cfg.system;
    let mut ctl = cfg.controller.clone();
    let cert = match &cfg.certificate {
        CertificateChoice::Keyword(k) if k == "none" => return Ok((Certification::None, ctl)),
        CertificateChoice::Keyword(_) => {
            match search_certificate(sys, &ctl, cfg.search.budget, cfg.search.seed)? {
                Ok(c) => {
                    ctl.alpha = c.alpha;
                    (c, "search")
                }
                Err(rep) => return Ok((Certification::Infeasible(rep), ctl)),
            }
        }
        CertificateChoice::Explicit(c) => {
            if c.alpha != ctl.alpha {
                return Err(Error::Config(format!(
                    "explicit certificate alpha {} differs from controller alpha {}",
                    c.alpha, ctl.alpha
                )));
            }
            (c.clone(), "explicit")
        }
    };
    match derive_constants_with(sys, &ctl, &cert.0, cfg.chi_beta) {
        Ok(dc) => Ok((
            Certification::Certified {
                cert: cert.0,
                dc,
                source: cert.1,
            },
            ctl,
        )),
        Err(Error::Infeasible(rep)) => Ok((Certification::Infeasible(rep), ctl)),
        Err(e) => Err(e),
    }
}

/// JSON written to `certificate.json`.
pub fn certificate_json(cfg: &ExperimentConfig, c: &Certification, ctl: &ControllerParams) -> Result<Value> {
    let n = cfg.system.n();
    let unit = CertificateParams {
        mu: 1.0,
        nu: 0.999_999,
        d: vec![1.0; n],
        alpha: ctl.alpha,
        beta1: 1.0,
        beta2: 1.0,
        beta3: 1.0,
        zeta: 0.0,
    };
    let norm_identity = check_boundary_norm(&cfg.system, ctl, &unit)?.norm;
    Ok(match c {
        Certification::Certified { cert, dc, source } => {
            let norm = check_boundary_norm(&cfg.system, ctl, cert)?.norm;
            let mut v = serde_json::to_value(CertificateReport::new(cert, dc, norm)?)?;
            v["status"] = json!("certified");
            v["source"] = json!(source);
            v["chi_beta"] = serde_json::to_value(cfg.chi_beta)?;
            v["boundary_norm_identity_D"] = json!(norm_identity);
            v
        }
        Certification::Infeasible(rep) => json!({
            "status": "infeasible",
            "reason": rep.reason,
            "best_norm": rep.best_norm,
            "best_min_eig": rep.best_min_eig,
            "evaluations": rep.evaluations,
            "boundary_norm_identity_D": norm_identity,
        }),
        Certification::None => json!({
            "status": "none",
            "boundary_norm_identity_D": norm_identity,
        }),
    })
}

/// Everything recorded along one simulated trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<LyapunovSample>,
    pub d_norm: Vec<f64>,
    pub boundary: Vec<BoundaryRecord>,
    pub fields: Vec<FieldRow>,
    pub blow_up: Option<BlowUpInfo>,
    pub dt: f64,
    pub dz: f64,
    pub steps: u64,
    pub grid_aligned: bool,
    pub compatibility_residual: f64,
    pub warnings: Vec<String>,
}

pub fn measurement_source(cfg: &ExperimentConfig) -> Result<MeasurementSource> {
    Ok(match &cfg.quantizer {
        Some(q) => MeasurementSource::Quantized(q.clone()),
        None => MeasurementSource::Additive(cfg.disturbance_spec().build(cfg.system.n())?),
    })
}

fn bare_sample(state: &crate::solver::FieldState) -> LyapunovSample {
    let x1 = state.x1();
    LyapunovSample {
        t: state.t,
        v1: f64::NAN,
        v2: f64::NAN,
        v3: f64::NAN,
        v: f64::NAN,
        maxnorm: state.maxnorm(),
        x1_inf: crate::linalg::norm_inf(x1),
        eta_sq: crate::linalg::dot(&state.eta, &state.eta),
        h1_sq: crate::monitor::h1_norm_sq(&state.x, &state.xz, state.dz()),
        e_sq: state.eta.iter().zip(x1).map(|(a, b)| (a - b).powi(2)).sum(),
        in_sm: false,
        in_sdelta: false,
    }
}

/// Runs the closed loop over the configured horizon.
pub fn simulate(
    cfg: &ExperimentConfig,
    ctl: &ControllerParams,
    constants: Option<(&CertificateParams, &DerivedConstants)>,
) -> Result<Trajectory> {
    let profile = cfg.initial.build()?;
    let mut solver = Solver::new(&cfg.system, ctl, profile, &cfg.grid)?;
    let mut src = measurement_source(cfg)?;
    let dt = solver.dt();
    let total = (cfg.horizon / dt).round() as u64;
    let stride = ((cfg.output.field_stride / dt).round() as u64).max(1);

    let mut traj = Trajectory {
        samples: Vec::with_capacity(total as usize + 1),
        d_norm: Vec::with_capacity(total as usize + 1),
        boundary: Vec::with_capacity(total as usize + 1),
        fields: Vec::new(),
        blow_up: None,
        dt,
        dz: solver.dz(),
        steps: 0,
        grid_aligned: solver.grid_aligned(),
        compatibility_residual: solver.compatibility_residual(),
        warnings: solver.warnings().to_vec(),
    };
    loop {
        let state = solver.snapshot();
        let rec = solver.current_record(&src)?;
        traj.d_norm.push(crate::linalg::norm2(&rec.d));
        traj.samples.push(match constants {
            Some((c, dc)) => eval_v(&state, c, dc),
            None => bare_sample(&state),
        });
        traj.boundary.push(rec);
        let k = solver.steps();
        if k % stride == 0 || k == total {
            for (z, x) in state.z.iter().zip(&state.x) {
                traj.fields.push(FieldRow {
                    t: state.t,
                    z: *z,
                    x: x.clone(),
                });
            }
        }
        if k == total {
            break;
        }
        match solver.step(&mut src) {
            Ok(()) => {}
            Err(Error::BlowUp { t, magnitude }) => {
                traj.blow_up = Some(BlowUpInfo { t, magnitude });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    traj.steps = solver.steps();
    Ok(traj)
}

fn ultimate_maxnorm(samples: &[LyapunovSample], horizon: f64) -> Option<f64> {
    let from = ULTIMATE_WINDOW * horizon;
    let tail: Vec<f64> = samples.iter().filter(|s| s.t >= from - 1e-12).map(|s| s.maxnorm).collect();
    if tail.is_empty() {
        None
    } else {
        Some(tail.into_iter().fold(0.0, f64::max))
    }
}

struct Evaluated {
    checks: BTreeMap<String, CheckOutcome>,
    invariant: Option<InvariantSetReport>,
    eps: Option<f64>,
    rate_bound: Option<f64>,
    monitor_levels: Option<(f64, f64)>,
}

fn evaluate_checks(
    cfg: &ExperimentConfig,
    cert: &Certification,
    traj: &mut Trajectory,
) -> Evaluated {
    let n = cfg.system.n();
    let tol = Tolerance {
        c_tol: cfg.c_tol,
        dt: traj.dt,
        dz: traj.dz,
    };
    let mut out = Evaluated {
        checks: BTreeMap::new(),
        invariant: None,
        eps: None,
        rate_bound: None,
        monitor_levels: None,
    };
    if let (Some((_, dc)), Some(q)) = (cert.constants(), &cfg.quantizer) {
        let rb = crate::certificate::quantizer_rate_bound(dc, n);
        out.rate_bound = Some(rb);
        let eps = choose_eps(dc, n, q, cfg.eps).unwrap_or(cfg.eps);
        out.eps = Some(eps);
        let (sm, sd) = (sm_level(dc, q), sdelta_level(dc, n, q, eps));
        classify(&mut traj.samples, sm, sd);
        out.monitor_levels = Some((sm, sd));
        out.invariant = Some(check_invariant_sets(&traj.samples, dc, q, n, eps, &tol));
    } else if let Some((_, dc)) = cert.constants() {
        out.rate_bound = Some(crate::certificate::quantizer_rate_bound(dc, n));
    }

    let blown = traj.blow_up.is_some();
    let no_constants = match cert {
        Certification::Certified { .. } => None,
        Certification::Infeasible(_) => Some(CheckStatus::Fail),
        Certification::None => Some(CheckStatus::Inapplicable),
    };
    for check in cfg.checks() {
        let name = check.as_str().to_string();
        let outcome = match check {
            CheckName::Compatibility => {
                let r = traj.compatibility_residual;
                CheckOutcome::of(r <= crate::model::COMPATIBILITY_TOL, json!({ "residual": r }))
            }
            CheckName::Decay => {
                let t = decay_time(&traj.samples, 1e-3);
                CheckOutcome::of(t.is_some() && !blown, json!({ "decay_time": t }))
            }
            _ if blown => CheckOutcome::fail("solution blew up"),
            _ => match (cert.constants(), no_constants) {
                (None, Some(CheckStatus::Fail)) => CheckOutcome::fail("no certificate could be found"),
                (None, _) => CheckOutcome::inapplicable("certificate disabled"),
                (Some((_, dc)), _) => match check {
                    CheckName::Sandwich => {
                        let mut bad = 0;
                        let mut lo = f64::INFINITY;
                        let mut hi = f64::INFINITY;
                        for s in &traj.samples {
                            let r = check_sandwich(s, dc);
                            lo = lo.min(r.lower_margin);
                            hi = hi.min(r.upper_margin);
                            if !r.holds {
                                bad += 1;
                            }
                        }
                        CheckOutcome::of(
                            bad == 0,
                            json!({ "violations": bad, "worst_lower_margin": lo, "worst_upper_margin": hi }),
                        )
                    }
                    CheckName::Dissipation => {
                        let r = check_dissipation(&traj.samples, &traj.d_norm, dc, &tol);
                        CheckOutcome::of(r.holds, serde_json::to_value(&r).unwrap_or(Value::Null))
                    }
                    CheckName::Dss => {
                        let mx0 = initial_functional(&traj.samples[0]);
                        let r = check_dss(&traj.samples, &traj.d_norm, dc, mx0, &tol);
                        CheckOutcome::of(r.holds, serde_json::to_value(&r).unwrap_or(Value::Null))
                    }
                    CheckName::Iss => {
                        let r = check_iss_combined(&traj.samples, &traj.d_norm, dc, &tol);
                        CheckOutcome::of(r.holds, serde_json::to_value(&r).unwrap_or(Value::Null))
                    }
                    CheckName::InvariantSets => match &out.invariant {
                        None => CheckOutcome::inapplicable("no quantizer configured"),
                        Some(r) if !r.applicable => CheckOutcome {
                            status: CheckStatus::Inapplicable,
                            detail: serde_json::to_value(r).unwrap_or(Value::Null),
                        },
                        Some(r) => CheckOutcome::of(r.passed(), serde_json::to_value(r).unwrap_or(Value::Null)),
                    },
                    CheckName::Compatibility | CheckName::Decay => unreachable!(),
                },
            },
        };
        out.checks.insert(name, outcome);
    }
    out
}

fn monitor_rows(
    traj: &Trajectory,
    constants: Option<(&CertificateParams, &DerivedConstants)>,
) -> Vec<MonitorRow> {
    let sup = running_max(&traj.d_norm);
    let mx0 = traj.samples.first().map(initial_functional).unwrap_or(0.0);
    traj.samples
        .iter()
        .zip(traj.d_norm.iter().zip(&sup))
        .map(|(s, (d, sd))| {
            let rhs = constants.map(|(_, dc)| dss_rhs(s.t, *sd, dc, mx0));
            MonitorRow {
                sample: s.clone(),
                d_norm: *d,
                dss_rhs: rhs,
                dss_slack: rhs.map(|r| r - s.maxnorm * s.maxnorm),
            }
        })
        .collect()
}

/// Runs one experiment and writes its artifacts under `out` (or the
/// configured directory).
pub fn run(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<Summary> {
    cfg.validate()?;
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir());
    std::fs::create_dir_all(&dir)?;

    let (cert, ctl) = certify(cfg)?;
    let cert_json = certificate_json(cfg, &cert, &ctl)?;
    std::fs::write(dir.join("certificate.json"), serde_json::to_string_pretty(&cert_json)?)?;

    let constants = cert.constants();
    let mut traj = simulate(cfg, &ctl, constants)?;
    let ev = evaluate_checks(cfg, &cert, &mut traj);

    write_field_csv(&dir.join("field.csv"), cfg.system.n(), &traj.fields)?;
    write_boundary_csv(&dir.join("boundary.csv"), cfg.system.n(), ctl.k.rows(), &traj.boundary)?;
    write_monitor_csv(&dir.join("monitor.csv"), &monitor_rows(&traj, constants))?;

    let any_fail = ev.checks.values().any(|c| c.status == CheckStatus::Fail);
    let exit_code = if traj.blow_up.is_some() {
        EXIT_BLOW_UP
    } else if any_fail {
        EXIT_CHECK_FAILED
    } else {
        EXIT_PASS
    };
    let gamma_eps = ev.invariant.as_ref().map(|r| r.gamma).filter(|g| g.is_finite());
    let summary = Summary {
        name: cfg.name.clone(),
        exit_code,
        certificate_status: cert.status().to_string(),
        alpha: ctl.alpha,
        checks: ev.checks,
        horizon: cfg.horizon,
        dt: traj.dt,
        dz: traj.dz,
        steps: traj.steps,
        grid_aligned: traj.grid_aligned,
        compatibility_residual: traj.compatibility_residual,
        initial_maxnorm: traj.samples[0].maxnorm,
        final_maxnorm: traj.samples.last().map(|s| s.maxnorm),
        ultimate_maxnorm: if traj.blow_up.is_some() {
            None
        } else {
            ultimate_maxnorm(&traj.samples, cfg.horizon)
        },
        decay_time: decay_time(&traj.samples, 1e-3),
        delta_q: cfg.quantizer.as_ref().map(|q| q.delta_q()),
        m_q: cfg.quantizer.as_ref().map(|q| q.m_q()).filter(|m| m.is_finite()),
        rate_bound: ev.rate_bound,
        eps: ev.eps,
        gamma_eps,
        t_eps: ev.invariant.as_ref().and_then(|r| r.t_eps),
        blow_up: traj.blow_up.clone(),
        warnings: traj.warnings.clone(),
    };
    std::fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Runs several experiments concurrently; results keep the input order.
pub fn run_batch(cfgs: &[(ExperimentConfig, Option<std::path::PathBuf>)]) -> Vec<Result<Summary>> {
    cfgs.par_iter().map(|(c, out)| run(c, out.as_deref())).collect()
}

/// Certificate search only.
pub fn search_cert(cfg: &ExperimentConfig) -> Result<Value> {
    let (cert, ctl) = certify(cfg)?;
    certificate_json(cfg, &cert, &ctl)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareEntry {
    pub name: String,
    pub delta_q: Option<f64>,
    pub ultimate_maxnorm: Option<f64>,
    pub gamma_eps: Option<f64>,
    /// `ultimate_maxnorm² ≤ γ_ε`, when both exist.
    pub within_gamma: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub entries: Vec<CompareEntry>,
    /// Ultimate maxnorm strictly decreasing in the given order.
    pub strictly_decreasing: bool,
    /// `γ_ε` ratios between consecutive entries.
    pub gamma_ratios: Vec<Option<f64>>,
}

pub fn compare_runs(summaries: &[Summary]) -> Result<CompareReport> {
    if summaries.is_empty() {
        return Err(Error::InvalidInput("no summaries to compare".into()));
    }
    let entries: Vec<CompareEntry> = summaries
        .iter()
        .map(|s| CompareEntry {
            name: s.name.clone(),
            delta_q: s.delta_q,
            ultimate_maxnorm: s.ultimate_maxnorm,
            gamma_eps: s.gamma_eps,
            within_gamma: match (s.ultimate_maxnorm, s.gamma_eps) {
                (Some(u), Some(g)) => Some(u * u <= g),
                _ => None,
            },
        })
        .collect();
    let strictly_decreasing = entries.windows(2).all(|w| match (w[0].ultimate_maxnorm, w[1].ultimate_maxnorm) {
        (Some(a), Some(b)) => b < a,
        _ => false,
    });
    let gamma_ratios = entries
        .windows(2)
        .map(|w| match (w[0].gamma_eps, w[1].gamma_eps) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        })
        .collect();
    Ok(CompareReport {
        entries,
        strictly_decreasing,
        gamma_ratios,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartReport {
    pub split: f64,
    pub t_final: f64,
    pub grid_aligned: bool,
    pub tolerance: f64,
    pub max_abs_diff: f64,
    pub eta_max_abs_diff: f64,
    pub passed: bool,
}

/// Compares a monolithic run on `[0, T]` with a run stopped at `s`,
/// serialized, restored and continued to `T`.
pub fn restart_check(cfg: &ExperimentConfig, split: f64) -> Result<RestartReport> {
    cfg.validate()?;
    if !(0.0..=cfg.horizon).contains(&split) {
        return Err(Error::Config(format!("split {split} outside [0, {}]", cfg.horizon)));
    }
    let (_, ctl) = certify_controller_only(cfg)?;
    let profile = || cfg.initial.build();
    let mut mono = Solver::new(&cfg.system, &ctl, profile()?, &cfg.grid)?;
    let dt = mono.dt();
    let total = (cfg.horizon / dt).round() as u64;
    let cut = (split / dt).round() as u64;

    let mut src = measurement_source(cfg)?;
    for _ in 0..total {
        mono.step(&mut src)?;
    }

    let mut first = Solver::new(&cfg.system, &ctl, profile()?, &cfg.grid)?;
    let mut src = measurement_source(cfg)?;
    for _ in 0..cut {
        first.step(&mut src)?;
    }
    let text = serde_json::to_string(&first.checkpoint())?;
    let ck = serde_json::from_str(&text)?;
    drop(first);
    let mut second = Solver::resume(&cfg.system, &ctl, profile()?, &cfg.grid, &ck)?;
    let mut src = measurement_source(cfg)?;
    for _ in cut..total {
        second.step(&mut src)?;
    }

    let (a, b) = (mono.field(), second.field());
    let diff = a
        .iter()
        .zip(&b)
        .flat_map(|(p, q)| p.iter().zip(q).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max);
    let eta_diff = mono
        .eta()
        .iter()
        .zip(second.eta())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let aligned = mono.grid_aligned();
    let tolerance = if aligned { 1e-12 } else { 1e-8 };
    Ok(RestartReport {
        split,
        t_final: mono.t(),
        grid_aligned: aligned,
        tolerance,
        max_abs_diff: diff,
        eta_max_abs_diff: eta_diff,
        passed: diff <= tolerance && eta_diff <= tolerance,
    })
}

/// The controller a run would use, without deriving constants for explicit
/// certificates.
fn certify_controller_only(cfg: &ExperimentConfig) -> Result<(Certification, ControllerParams)> {
    match &cfg.certificate {
        CertificateChoice::Keyword(k) if k == "search" => certify(cfg),
        _ => Ok((Certification::None, cfg.controller.clone())),
    }
}

/// Residual of the compatibility condition for the configured initial data.
pub fn compatibility(cfg: &ExperimentConfig) -> Result<f64> {
    let p = cfg.initial.build()?;
    Ok(check_compatibility(&cfg.system, &cfg.controller, &p)?.residual)
}

/// Maps an error from [`run`] to the CLI exit status.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::BlowUp { .. } => EXIT_BLOW_UP,
        _ => EXIT_CONFIG,
    }
}
