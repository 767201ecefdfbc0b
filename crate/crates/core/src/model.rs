//! Plant, controller, and initial data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, sym_eigen, Mat};

/// Default absolute tolerance for the first-order compatibility residual.
pub const COMPATIBILITY_TOL: f64 = 1e-9;

/// `X_t + Λ X_z = 0` on `z ∈ [0, 1]` with boundary map
/// `X(0, t) = H X(1, t) + B u(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicSystem {
    /// Diagonal of Λ (transport speeds).
    pub lambda: Vec<f64>,
    #[serde(rename = "H")]
    pub h: Mat,
    #[serde(rename = "B")]
    pub b: Mat,
}

impl HyperbolicSystem {
    pub fn new(lambda: Vec<f64>, h: Mat, b: Mat) -> Result<Self> {
        let sys = Self { lambda, h, b };
        let violations = sys.violations();
        if let Some(v) = violations.first() {
            return Err(Error::InvalidInput(v.to_string()));
        }
        Ok(sys)
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda.iter().cloned().fold(0.0, f64::max)
    }

    pub fn lambda_mat(&self) -> Mat {
        Mat::diag(&self.lambda)
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.n();
        if n == 0 {
            out.push(Violation::new("lambda", "must have at least one entry"));
        }
        if self.lambda.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            out.push(Violation::new("lambda", "entries must be finite and strictly positive"));
        }
        if self.h.shape() != (n, n) {
            out.push(Violation::new(
                "H",
                format!("must be {n}x{n}, got {}x{}", self.h.rows(), self.h.cols()),
            ));
        }
        if self.b.rows() != n {
            out.push(Violation::new(
                "B",
                format!("must have {n} rows, got {}", self.b.rows()),
            ));
        }
        out
    }
}

/// Dynamic compensator `η' = -α(η - y)`, `u = K η`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    #[serde(rename = "K")]
    pub k: Mat,
    pub alpha: f64,
    pub eta0: Vec<f64>,
}

impl ControllerParams {
    /// `F = B K`.
    pub fn feedback(&self, sys: &HyperbolicSystem) -> Result<Mat> {
        if sys.b.cols() != self.k.rows() {
            return Err(Error::dims("B K", sys.b.cols(), self.k.rows()));
        }
        Ok(&sys.b * &self.k)
    }
}

/// A violated invariant: which field, and which rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: &str, rule: impl Into<String>) -> Self {
        Self {
            field: field.to_string(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

/// Lists every broken invariant of the plant/controller pair. Empty means valid.
pub fn validate(sys: &HyperbolicSystem, ctl: &ControllerParams) -> Vec<Violation> {
    let mut out = sys.violations();
    let (n, m) = (sys.n(), sys.m());
    if ctl.k.shape() != (m, n) {
        out.push(Violation::new(
            "K",
            format!("must be {m}x{n}, got {}x{}", ctl.k.rows(), ctl.k.cols()),
        ));
    }
    if !(ctl.alpha.is_finite() && ctl.alpha > 0.0) {
        out.push(Violation::new("alpha", "must be finite and strictly positive"));
    }
    if ctl.eta0.len() != n {
        out.push(Violation::new(
            "eta0",
            format!("must have {n} entries, got {}", ctl.eta0.len()),
        ));
    } else if ctl.eta0.iter().any(|v| !v.is_finite()) {
        out.push(Violation::new("eta0", "entries must be finite"));
    }
    out
}

fn ensure_valid(sys: &HyperbolicSystem, ctl: &ControllerParams) -> Result<()> {
    match validate(sys, ctl).first() {
        Some(v) => Err(Error::InvalidInput(v.to_string())),
        None => Ok(()),
    }
}

/// `X(0, t) = H X(1, t) + B K η(t)`.
pub fn closed_loop_boundary(
    sys: &HyperbolicSystem,
    ctl: &ControllerParams,
    x1: &[f64],
    eta: &[f64],
) -> Result<Vec<f64>> {
    let n = sys.n();
    if x1.len() != n {
        return Err(Error::dims("closed_loop_boundary x1", n, x1.len()));
    }
    if eta.len() != n {
        return Err(Error::dims("closed_loop_boundary eta", n, eta.len()));
    }
    let f = ctl.feedback(sys)?;
    if f.shape() != (n, n) {
        return Err(Error::dims("closed_loop_boundary K", format!("{n}x{n}"), format!("{:?}", f.shape())));
    }
    let hx = sys.h.mul_vec(x1);
    let fe = f.mul_vec(eta);
    Ok(hx.iter().zip(&fe).map(|(a, b)| a + b).collect())
}

type ProfileFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// Initial state `X⁰ : [0, 1] → ℝⁿ`.
#[derive(Clone)]
pub enum InitialProfile {
    Analytic { dim: usize, f: Arc<ProfileFn> },
    /// Uniform samples `values[j] = X⁰(j / (len - 1))`, linearly interpolated.
    Sampled { values: Vec<Vec<f64>> },
}

impl InitialProfile {
    pub fn analytic(dim: usize, f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        InitialProfile::Analytic { dim, f: Arc::new(f) }
    }

    pub fn sampled(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput("sampled profile needs at least 2 samples".into()));
        }
        let dim = values[0].len();
        if dim == 0 || values.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("sampled profile rows must share a non-zero width".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("sampled profile has non-finite values".into()));
        }
        Ok(InitialProfile::Sampled { values })
    }

    pub fn zero(dim: usize) -> Self {
        Self::analytic(dim, move |_| vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        match self {
            InitialProfile::Analytic { dim, .. } => *dim,
            InitialProfile::Sampled { values } => values[0].len(),
        }
    }

    /// Evaluates `X⁰(z)`; `z` is clamped to `[0, 1]`.
    pub fn eval(&self, z: f64) -> Vec<f64> {
        let z = z.clamp(0.0, 1.0);
        match self {
            InitialProfile::Analytic { f, .. } => f(z),
            InitialProfile::Sampled { values } => {
                let last = values.len() - 1;
                let pos = z * last as f64;
                let j = (pos.floor() as usize).min(last - 1);
                let w = pos - j as f64;
                values[j]
                    .iter()
                    .zip(&values[j + 1])
                    .map(|(a, b)| a + w * (b - a))
                    .collect()
            }
        }
    }

    /// Component `i` of `X⁰(z)`.
    pub fn eval_component(&self, z: f64, i: usize) -> f64 {
        self.eval(z)[i]
    }

    /// Samples on the uniform grid `z_j = j / m`, `j = 0..=m`.
    pub fn sample_grid(&self, m: usize) -> Vec<Vec<f64>> {
        (0..=m).map(|j| self.eval(j as f64 / m as f64)).collect()
    }
}

impl fmt::Debug for InitialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialProfile::Analytic { dim, .. } => write!(f, "Analytic {{ dim: {dim} }}"),
            InitialProfile::Sampled { values } => {
                write!(f, "Sampled {{ samples: {}, dim: {} }}", values.len(), values[0].len())
            }
        }
    }
}

/// Serializable description of an initial profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileSpec {
    Zero { dim: usize },
    /// `X_i(z) = amplitude · (cos(2π k_i z) − 1)`.
    CosineMinusOne {
        freqs: Vec<f64>,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `X_i(z) = slope_i · z + offset_i`.
    Linear { slope: Vec<f64>, offset: Vec<f64> },
    /// `X_i(z) = c_i + Σ_k a_ik cos(2πkz) + b_ik sin(2πkz)`, `k = 1..`.
    Trig {
        constant: Vec<f64>,
        cos: Vec<Vec<f64>>,
        sin: Vec<Vec<f64>>,
    },
    /// Uniform samples on `[0, 1]` (rows are grid points).
    Samples { values: Vec<Vec<f64>> },
}

fn one() -> f64 {
    1.0
}

impl ProfileSpec {
    pub fn build(&self) -> Result<InitialProfile> {
        Ok(match self.clone() {
            ProfileSpec::Zero { dim } => InitialProfile::zero(dim),
            ProfileSpec::CosineMinusOne { freqs, amplitude } => {
                let dim = freqs.len();
                InitialProfile::analytic(dim, move |z| {
                    freqs
                        .iter()
                        .map(|k| amplitude * ((2.0 * PI * k * z).cos() - 1.0))
                        .collect()
                })
            }
            ProfileSpec::Linear { slope, offset } => {
                if slope.len() != offset.len() {
                    return Err(Error::dims("linear profile", slope.len(), offset.len()));
                }
                let dim = slope.len();
                InitialProfile::analytic(dim, move |z| {
                    slope.iter().zip(&offset).map(|(a, b)| a * z + b).collect()
                })
            }
            ProfileSpec::Trig { constant, cos, sin } => {
                let dim = constant.len();
                if cos.len() != dim || sin.len() != dim {
                    return Err(Error::dims("trig profile", dim, cos.len().max(sin.len())));
                }
                InitialProfile::analytic(dim, move |z| trig_eval(&constant, &cos, &sin, z))
            }
            ProfileSpec::Samples { values } => InitialProfile::sampled(values)?,
        })
    }
}

pub(crate) fn trig_eval(constant: &[f64], cos: &[Vec<f64>], sin: &[Vec<f64>], z: f64) -> Vec<f64> {
    (0..constant.len())
        .map(|i| {
            let mut v = constant[i];
            for (k, a) in cos[i].iter().enumerate() {
                v += a * (2.0 * PI * (k + 1) as f64 * z).cos();
            }
            for (k, b) in sin[i].iter().enumerate() {
                v += b * (2.0 * PI * (k + 1) as f64 * z).sin();
            }
            v
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityReport {
    pub ok: bool,
    pub residual: f64,
}

/// Residual of `X⁰(0) = H X⁰(1) + B K η⁰`, the condition for H¹-regular
/// solutions.
pub fn check_compatibility(
    sys: &HyperbolicSystem,
    ctl: &ControllerParams,
    profile: &InitialProfile,
) -> Result<CompatibilityReport> {
    check_compatibility_with_tol(sys, ctl, profile, COMPATIBILITY_TOL)
}

pub fn check_compatibility_with_tol(
    sys: &HyperbolicSystem,
    ctl: &ControllerParams,
    profile: &InitialProfile,
    tol: f64,
) -> Result<CompatibilityReport> {
    ensure_valid(sys, ctl)?;
    if profile.dim() != sys.n() {
        return Err(Error::dims("initial profile", sys.n(), profile.dim()));
    }
    let x0 = profile.eval(0.0);
    let rhs = closed_loop_boundary(sys, ctl, &profile.eval(1.0), &ctl.eta0)?;
    let diff: Vec<f64> = x0.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual = norm2(&diff);
    Ok(CompatibilityReport {
        ok: residual <= tol,
        residual,
    })
}

/// Least-squares solution of `B K η⁰ = X⁰(0) − H X⁰(1)`; `None` when the
/// best fit still leaves a residual above [`COMPATIBILITY_TOL`].
pub fn solve_compatible_eta0(
    sys: &HyperbolicSystem,
    ctl: &ControllerParams,
    profile: &InitialProfile,
) -> Result<Option<Vec<f64>>> {
    let f = ctl.feedback(sys)?;
    let x0 = profile.eval(0.0);
    let hx1 = sys.h.mul_vec(&profile.eval(1.0));
    let r: Vec<f64> = x0.iter().zip(&hx1).map(|(a, b)| a - b).collect();

    // pseudo-inverse through the eigen-decomposition of FᵀF
    let mut gram = &f.transpose() * &f;
    gram.mirror_upper();
    let eig = sym_eigen(&gram)?;
    let ftr = f.transpose().mul_vec(&r);
    let n = gram.rows();
    let cutoff = 1e-12 * eig.values.last().copied().unwrap_or(0.0).max(1e-300);
    let mut eta = vec![0.0; n];
    for k in 0..n {
        let lam = eig.values[k];
        if lam <= cutoff {
            continue;
        }
        let coef: f64 = (0..n).map(|i| eig.vectors[(i, k)] * ftr[i]).sum::<f64>() / lam;
        for i in 0..n {
            eta[i] += coef * eig.vectors[(i, k)];
        }
    }
    let fit = f.mul_vec(&eta);
    let res: Vec<f64> = fit.iter().zip(&r).map(|(a, b)| a - b).collect();
    Ok((norm2(&res) <= COMPATIBILITY_TOL).then_some(eta))
}

/// The 2×2 reference plant: Λ = diag(1, 2), H = [0.25 −1; 0 1.25], B = I,
/// K = [0 0.5; −0.25 −0.5].
pub fn reference_2x2(alpha: f64) -> (HyperbolicSystem, ControllerParams) {
    let sys = HyperbolicSystem {
        lambda: vec![1.0, 2.0],
        h: Mat::from_rows(&[[0.25, -1.0], [0.0, 1.25]]).unwrap(),
        b: Mat::identity(2),
    };
    let ctl = ControllerParams {
        k: Mat::from_rows(&[[0.0, 0.5], [-0.25, -0.5]]).unwrap(),
        alpha,
        eta0: vec![0.0, 0.0],
    };
    (sys, ctl)
}

/// Initial data `X₁⁰ = cos(4πz) − 1`, `X₂⁰ = cos(2πz) − 1`.
pub fn reference_profile() -> ProfileSpec {
    ProfileSpec::CosineMinusOne {
        freqs: vec![2.0, 1.0],
        amplitude: 1.0,
    }
}

/// A certifiable 2×2 plant with the same speeds: H = [0.25 −0.5; 0 0.5],
/// K = [0 0.1; −0.05 −0.1].
pub fn contractive_2x2(alpha: f64) -> (HyperbolicSystem, ControllerParams) {
    let sys = HyperbolicSystem {
        lambda: vec![1.0, 2.0],
        h: Mat::from_rows(&[[0.25, -0.5], [0.0, 0.5]]).unwrap(),
        b: Mat::identity(2),
    };
    let ctl = ControllerParams {
        k: Mat::from_rows(&[[0.0, 0.1], [-0.05, -0.1]]).unwrap(),
        alpha,
        eta0: vec![0.0, 0.0],
    };
    (sys, ctl)
}
