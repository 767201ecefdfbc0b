//! Lyapunov functional along trajectories and the stability estimates built
//! on it.

use serde::{Deserialize, Serialize};

use crate::certificate::{quantizer_rate_bound, ultimate_bound, CertificateParams, DerivedConstants};
use crate::linalg::{dot, norm2, norm_inf, Mat};
use crate::quantizer::QuantizerSpec;
use crate::solver::{gradient_field, FieldState};

pub const DEFAULT_C_TOL: f64 = 10.0;
pub const DEFAULT_EPS: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v: f64,
    /// `max_j |X(z_j, t)|`.
    pub maxnorm: f64,
    /// `|X(1, t)|∞`.
    pub x1_inf: f64,
    pub eta_sq: f64,
    /// `‖X‖²_{H¹}` (unweighted trapezoid).
    pub h1_sq: f64,
    /// `|η − X(1)|²`.
    pub e_sq: f64,
    pub in_sm: bool,
    pub in_sdelta: bool,
}

fn trapezoid_weights(m: usize, dz: f64) -> impl Iterator<Item = f64> {
    (0..=m).map(move |j| if j == 0 || j == m { 0.5 * dz } else { dz })
}

fn quad_form(p: &Mat, x: &[f64]) -> f64 {
    dot(x, &p.mul_vec(x))
}

/// `∫ |X|² + |∂X|² dz` by the trapezoid rule.
pub fn h1_norm_sq(x: &[Vec<f64>], xz: &[Vec<f64>], dz: f64) -> f64 {
    trapezoid_weights(x.len() - 1, dz)
        .zip(x.iter().zip(xz))
        .map(|(w, (a, b))| w * (dot(a, a) + dot(b, b)))
        .sum()
}

pub fn eval_v(state: &FieldState, cert: &CertificateParams, dc: &DerivedConstants) -> LyapunovSample {
    let dz = state.dz();
    let m = state.x.len() - 1;
    let mut v1 = 0.0;
    let mut v2 = 0.0;
    for ((w, z), (x, xz)) in trapezoid_weights(m, dz)
        .zip(&state.z)
        .zip(state.x.iter().zip(&state.xz))
    {
        let wt = w * (-cert.mu * z).exp();
        v1 += wt * quad_form(&dc.p1, x);
        v2 += wt * quad_form(&dc.p2, xz);
    }
    let x1 = state.x1();
    let e: Vec<f64> = state.eta.iter().zip(x1).map(|(a, b)| a - b).collect();
    let v3 = quad_form(&dc.p3, &e);
    LyapunovSample {
        t: state.t,
        v1,
        v2,
        v3,
        v: v1 + v2 + v3,
        maxnorm: state.maxnorm(),
        x1_inf: norm_inf(x1),
        eta_sq: dot(&state.eta, &state.eta),
        h1_sq: h1_norm_sq(&state.x, &state.xz, dz),
        e_sq: dot(&e, &e),
        in_sm: false,
        in_sdelta: false,
    }
}

/// `M_{X⁰} = ‖X⁰‖²_{H¹} + |η⁰ − X⁰(1)|²` from the initial sample.
pub fn initial_functional(s0: &LyapunovSample) -> f64 {
    s0.h1_sq + s0.e_sq
}

/// `running[k] = max_{j ≤ k} v[j]`.
pub fn running_max(v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(v.len());
    let mut m = 0.0f64;
    for &x in v {
        m = m.max(x);
        out.push(m);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub holds: bool,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

/// `c̲_P(‖X‖²_{H¹} + |η−X(1)|²) ≤ V ≤ c̄_P(…)` within relative tolerance 1e−6.
pub fn check_sandwich(sample: &LyapunovSample, dc: &DerivedConstants) -> SandwichReport {
    let base = sample.h1_sq + sample.e_sq;
    let lo = dc.cp_lo * base;
    let hi = dc.cp_hi * base;
    let tol = 1e-6 * hi.max(sample.v);
    let lower_margin = sample.v - lo;
    let upper_margin = hi - sample.v;
    SandwichReport {
        holds: lower_margin >= -tol && upper_margin >= -tol,
        lower_margin,
        upper_margin,
    }
}

/// Discretization allowance `C_tol (Δt + Δz) (1 + scale)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub c_tol: f64,
    pub dt: f64,
    pub dz: f64,
}

impl Tolerance {
    pub fn new(dt: f64, dz: f64) -> Self {
        Self {
            c_tol: DEFAULT_C_TOL,
            dt,
            dz,
        }
    }

    pub fn at(&self, scale: f64) -> f64 {
        self.c_tol * (self.dt + self.dz) * (1.0 + scale)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationReport {
    pub holds: bool,
    pub steps: usize,
    pub violations: usize,
    /// Smallest `rhs + tol − lhs` over steps.
    pub worst_margin: f64,
    pub first_violation: Option<f64>,
    pub integrated_violations: usize,
    pub integrated_worst_margin: f64,
}

/// Forward-difference check of `V̇ ≤ −σV + χ|d|²` and of its integrated form
/// `V(t) ≤ e^{−σt}V(0) + (χ/σ) sup|d|²`. `d_norm[k]` is `|d(t_k)|`.
pub fn check_dissipation(
    traj: &[LyapunovSample],
    d_norm: &[f64],
    dc: &DerivedConstants,
    tol: &Tolerance,
) -> DissipationReport {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut first = None;
    for k in 0..traj.len().saturating_sub(1) {
        let (a, b) = (&traj[k], &traj[k + 1]);
        let h = b.t - a.t;
        let lhs = (b.v - a.v) / h;
        let d2 = d_norm[k].powi(2).max(d_norm[k + 1].powi(2));
        let margin = -dc.sigma * a.v + dc.chi * d2 + tol.at(a.v) - lhs;
        worst = worst.min(margin);
        if margin < 0.0 {
            violations += 1;
            first.get_or_insert(a.t);
        }
    }
    let sup = running_max(d_norm);
    let v0 = traj.first().map_or(0.0, |s| s.v);
    let mut iv = 0;
    let mut iworst = f64::INFINITY;
    for (s, sd) in traj.iter().zip(&sup) {
        let rhs = (-dc.sigma * s.t).exp() * v0 + dc.chi / dc.sigma * sd * sd + tol.at(v0);
        let margin = rhs - s.v;
        iworst = iworst.min(margin);
        if margin < 0.0 {
            iv += 1;
        }
    }
    DissipationReport {
        holds: violations == 0 && iv == 0,
        steps: traj.len().saturating_sub(1),
        violations,
        worst_margin: worst,
        first_violation: first,
        integrated_violations: iv,
        integrated_worst_margin: iworst,
    }
}

/// Right side of the DSS estimate on `max_z |X|²` at time `t`.
pub fn dss_rhs(t: f64, d_sup: f64, dc: &DerivedConstants, mx0: f64) -> f64 {
    dc.c_d / dc.cp_lo * (dc.cp_hi * (-dc.sigma * t).exp() * mx0 + dc.chi / dc.sigma * d_sup * d_sup)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DssReport {
    pub holds: bool,
    pub violations: usize,
    /// Smallest `rhs + tol − maxnorm²`.
    pub worst_margin: f64,
    /// Largest `maxnorm² / rhs`.
    pub max_ratio: f64,
    /// First time `maxnorm ≤ 10⁻³ · maxnorm(0)`.
    pub decay_time: Option<f64>,
    pub mx0: f64,
}

pub fn check_dss(
    traj: &[LyapunovSample],
    d_norm: &[f64],
    dc: &DerivedConstants,
    mx0: f64,
    tol: &Tolerance,
) -> DssReport {
    let sup = running_max(d_norm);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let mut max_ratio = 0.0f64;
    for (s, sd) in traj.iter().zip(&sup) {
        let rhs = dss_rhs(s.t, *sd, dc, mx0);
        let lhs = s.maxnorm * s.maxnorm;
        let margin = rhs + tol.at(s.v) - lhs;
        worst = worst.min(margin);
        if rhs > 0.0 {
            max_ratio = max_ratio.max(lhs / rhs);
        }
        if margin < 0.0 {
            violations += 1;
        }
    }
    DssReport {
        holds: violations == 0,
        violations,
        worst_margin: worst,
        max_ratio,
        decay_time: decay_time(traj, 1e-3),
        mx0,
    }
}

/// First sample time with `maxnorm ≤ factor · maxnorm(0)`.
pub fn decay_time(traj: &[LyapunovSample], factor: f64) -> Option<f64> {
    let m0 = traj.first()?.maxnorm;
    if m0 == 0.0 {
        return Some(traj[0].t);
    }
    traj.iter().find(|s| s.maxnorm <= factor * m0).map(|s| s.t)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IssReport {
    pub holds: bool,
    pub violations: usize,
    pub worst_margin: f64,
}

/// `|η|² + max_z|X|² ≤ C₁ sup|d|² + C₂ e^{−σt}(2(max|X⁰|² + |η⁰|²) + ‖X⁰‖²_{H¹})`.
pub fn check_iss_combined(
    traj: &[LyapunovSample],
    d_norm: &[f64],
    dc: &DerivedConstants,
    tol: &Tolerance,
) -> IssReport {
    let sup = running_max(d_norm);
    let Some(s0) = traj.first() else {
        return IssReport { holds: true, violations: 0, worst_margin: f64::INFINITY };
    };
    let init = 2.0 * (s0.maxnorm * s0.maxnorm + s0.eta_sq) + s0.h1_sq;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for (s, sd) in traj.iter().zip(&sup) {
        let lhs = s.eta_sq + s.maxnorm * s.maxnorm;
        let rhs = dc.c1 * sd * sd + dc.c2 * (-dc.sigma * s.t).exp() * init;
        let margin = rhs + tol.at(s.v) - lhs;
        worst = worst.min(margin);
        if margin < 0.0 {
            violations += 1;
        }
    }
    IssReport {
        holds: violations == 0,
        violations,
        worst_margin: worst,
    }
}

/// Level of `S_M`: `(c̲_P / c_D) M_q²`.
pub fn sm_level(dc: &DerivedConstants, q: &QuantizerSpec) -> f64 {
    dc.cp_lo / dc.c_d * q.m_q().powi(2)
}

/// Level of `S_Δ`: `(nχ/σ) Δ_q² (1+ε)`.
pub fn sdelta_level(dc: &DerivedConstants, n: usize, q: &QuantizerSpec, eps: f64) -> f64 {
    n as f64 * dc.chi / dc.sigma * q.delta_q().powi(2) * (1.0 + eps)
}

/// `(M_q/Δ_q)²` strictly above the rate bound.
pub fn rate_admissible(dc: &DerivedConstants, n: usize, q: &QuantizerSpec) -> bool {
    (q.m_q() / q.delta_q()).powi(2) > quantizer_rate_bound(dc, n)
}

/// `ε` with `S_Δ ⊂ S_M`: the default unless the admissible margin is smaller,
/// then half the margin. `None` when the rate is not admissible.
pub fn choose_eps(dc: &DerivedConstants, n: usize, q: &QuantizerSpec, default: f64) -> Option<f64> {
    if !rate_admissible(dc, n, q) {
        return None;
    }
    let margin = (q.m_q() / q.delta_q()).powi(2) / quantizer_rate_bound(dc, n) - 1.0;
    Some(default.min(0.5 * margin))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSetReport {
    pub applicable: bool,
    pub reason: Option<String>,
    pub eps: f64,
    pub sm_level: f64,
    pub sdelta_level: f64,
    /// `γ_ε(Δ_q)`.
    pub gamma: f64,
    pub t_eps: Option<f64>,
    pub sm_ok: bool,
    pub ultimate_ok: bool,
    /// Largest `maxnorm²` after `T_ε`.
    pub ultimate_max_sq: Option<f64>,
    /// Samples with `|X(1,t)|∞ > M_q`.
    pub x1_violations: usize,
}

impl InvariantSetReport {
    pub fn passed(&self) -> bool {
        self.applicable && self.t_eps.is_some() && self.sm_ok && self.ultimate_ok && self.x1_violations == 0
    }
}

/// Marks `in_sm` / `in_sdelta` on each sample.
pub fn classify(traj: &mut [LyapunovSample], sm: f64, sdelta: f64) {
    for s in traj {
        s.in_sm = s.v <= sm;
        s.in_sdelta = s.v <= sdelta;
    }
}

pub fn check_invariant_sets(
    traj: &[LyapunovSample],
    dc: &DerivedConstants,
    q: &QuantizerSpec,
    n: usize,
    eps: f64,
    tol: &Tolerance,
) -> InvariantSetReport {
    let sm = sm_level(dc, q);
    let sd = sdelta_level(dc, n, q, eps);
    let gamma = ultimate_bound(dc, n, q.delta_q(), eps).unwrap_or(f64::NAN);
    let mut rep = InvariantSetReport {
        applicable: true,
        reason: None,
        eps,
        sm_level: sm,
        sdelta_level: sd,
        gamma,
        t_eps: None,
        sm_ok: false,
        ultimate_ok: false,
        ultimate_max_sq: None,
        x1_violations: traj.iter().filter(|s| s.x1_inf > q.m_q()).count(),
    };
    if !rate_admissible(dc, n, q) {
        rep.applicable = false;
        rep.reason = Some(format!(
            "(M_q/delta_q)^2 = {:.4e} does not exceed the rate bound {:.4e}",
            (q.m_q() / q.delta_q()).powi(2),
            quantizer_rate_bound(dc, n)
        ));
        return rep;
    }
    if let Some(s0) = traj.first() {
        if s0.v > sm {
            rep.applicable = false;
            rep.reason = Some(format!("V(0) = {:.4e} exceeds the S_M level {:.4e}", s0.v, sm));
            return rep;
        }
    }
    rep.sm_ok = traj.iter().all(|s| s.v <= sm + tol.at(s.v));
    rep.t_eps = traj.iter().find(|s| s.v <= sd).map(|s| s.t);
    if let Some(te) = rep.t_eps {
        let tail: Vec<&LyapunovSample> = traj.iter().filter(|s| s.t >= te).collect();
        let max_sq = tail.iter().map(|s| s.maxnorm * s.maxnorm).fold(0.0, f64::max);
        rep.ultimate_max_sq = Some(max_sq);
        rep.ultimate_ok = tail
            .iter()
            .all(|s| s.maxnorm * s.maxnorm <= gamma + tol.at(s.v) && s.x1_inf <= q.m_q());
    }
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub tol: f64,
}

fn uniform_dz(samples: &[Vec<f64>]) -> f64 {
    1.0 / (samples.len() - 1) as f64
}

fn h1_of_samples(samples: &[Vec<f64>]) -> f64 {
    let dz = uniform_dz(samples);
    h1_norm_sq(samples, &gradient_field(samples, dz), dz)
}

fn ineq_report(lhs: f64, rhs: f64, dz: f64) -> InequalityReport {
    let tol = 10.0 * dz * dz * (1.0 + rhs.abs());
    InequalityReport {
        holds: lhs <= rhs + tol,
        lhs,
        rhs,
        tol,
    }
}

/// `max_z |X(z)|² ≤ |X(0)|² + ‖X‖²_{H¹}` on uniform samples of `[0, 1]`.
pub fn check_maxnorm_ineq(samples: &[Vec<f64>]) -> InequalityReport {
    assert!(samples.len() >= 16, "need at least 16 samples");
    let lhs = samples.iter().map(|r| dot(r, r)).fold(0.0, f64::max);
    let rhs = dot(&samples[0], &samples[0]) + h1_of_samples(samples);
    ineq_report(lhs, rhs, uniform_dz(samples))
}

/// `|φ(1)|² ≤ 2‖φ‖²_{H¹}` on uniform samples of `[0, 1]`.
pub fn check_trace_ineq(samples: &[Vec<f64>]) -> InequalityReport {
    assert!(samples.len() >= 16, "need at least 16 samples");
    let last = samples.last().unwrap();
    let lhs = norm2(last).powi(2);
    let rhs = 2.0 * h1_of_samples(samples);
    ineq_report(lhs, rhs, uniform_dz(samples))
}
