//! Matrix certificate for exponential DSS of the closed loop and the constants
//! derived from it.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{max_eig_sym, min_eig_sym, spectral_norm, Mat};
use crate::model::{validate, ControllerParams, HyperbolicSystem};

/// `(μ, ν, D, α, β₁, β₂, β₃, ζ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateParams {
    pub mu: f64,
    pub nu: f64,
    /// Diagonal of D.
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub zeta: f64,
}

impl CertificateParams {
    /// `ρ = e^{−μ} − ν²`.
    pub fn rho(&self) -> f64 {
        (-self.mu).exp() - self.nu * self.nu
    }

    fn check_shape(&self, n: usize) -> Result<()> {
        if self.d.len() != n {
            return Err(Error::dims("certificate D", n, self.d.len()));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !self.d.iter().all(|&v| positive(v)) {
            return Err(Error::InvalidInput("D entries must be finite and positive".into()));
        }
        for (name, v) in [
            ("mu", self.mu),
            ("alpha", self.alpha),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("beta3", self.beta3),
        ] {
            if !positive(v) {
                return Err(Error::InvalidInput(format!("{name} must be finite and positive")));
            }
        }
        if !self.nu.is_finite() || self.nu <= 0.0 {
            return Err(Error::InvalidInput("nu must be finite and positive".into()));
        }
        if !self.zeta.is_finite() {
            return Err(Error::InvalidInput("zeta must be finite".into()));
        }
        Ok(())
    }
}

/// Which β multiplies the `‖HᵀD²F‖²` term of χ.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChiBeta {
    Beta1,
    #[default]
    Beta2,
    Beta3,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub n: usize,
    pub mu: f64,
    pub zeta: f64,
    pub rho: f64,
    pub f: Mat,
    pub q: Mat,
    pub g: Mat,
    pub omega: Mat,
    pub p1: Mat,
    pub p2: Mat,
    pub p3: Mat,
    /// Diagonal of `D̃ = DΛ`.
    pub dtilde: Vec<f64>,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma: f64,
    pub chi: f64,
    pub c_d: f64,
    pub cp_lo: f64,
    pub cp_hi: f64,
    pub dss_c: f64,
    pub dss_a: f64,
    pub dss_gamma_coef: f64,
    pub c1: f64,
    pub c2: f64,
}

impl DerivedConstants {
    /// `c_D χ / (c̲_P σ)`, the squared DSS gain.
    pub fn dss_gain_sq(&self) -> f64 {
        self.c_d * self.chi / (self.cp_lo * self.sigma)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub holds: bool,
    pub norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigReport {
    pub holds: bool,
    pub min_eig: f64,
}

/// Best values reached by an unsuccessful search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfeasibleReport {
    /// Smallest `‖D(H+BK)D⁻¹‖₂` over the diagonal scalings tried.
    pub best_norm: f64,
    /// Largest `λ_min(Ω)` reached with `max βᵢ = 1`.
    pub best_min_eig: f64,
    pub evaluations: usize,
    pub reason: String,
}

impl fmt::Display for InfeasibleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (best norm {:.6}, best normalized min eig {:.6e}, {} evaluations)",
            self.reason, self.best_norm, self.best_min_eig, self.evaluations
        )
    }
}

fn prepare(sys: &HyperbolicSystem, ctl: &ControllerParams, cert: &CertificateParams) -> Result<Mat> {
    if let Some(v) = validate(sys, ctl).first() {
        return Err(Error::InvalidInput(v.to_string()));
    }
    cert.check_shape(sys.n())?;
    ctl.feedback(sys)
}

/// Ω from the upper blocks, lower half mirrored so the result is exactly symmetric.
pub fn build_omega(sys: &HyperbolicSystem, ctl: &ControllerParams, cert: &CertificateParams) -> Result<Mat> {
    let f = prepare(sys, ctl, cert)?;
    Ok(omega_from(&sys.h, &f, cert))
}

fn omega_from(h: &Mat, f: &Mat, cert: &CertificateParams) -> Mat {
    let n = h.rows();
    let d2 = Mat::diag(&cert.d.iter().map(|v| v * v).collect::<Vec<_>>());
    let q = &(&f.transpose() * &d2) * f;
    let g = &(&h.transpose() * &d2) * f;
    let rho = cert.rho();
    let (a, b1, b2, b3) = (cert.alpha, cert.beta1, cert.beta2, cert.beta3);
    let eye = Mat::identity(n);

    let mut om = Mat::zeros(3 * n, 3 * n);
    om.set_block(0, 0, &d2.scale(rho * b1));
    om.set_block(0, n, &g.add(&q).scale(-b1));
    om.set_block(0, 2 * n, &Mat::zeros(n, n));
    om.set_block(n, n, &eye.scale(2.0 * a * b3).sub(&q.scale(b1 + a * a * b2)));
    om.set_block(n, 2 * n, &eye.scale(b3).add(&g.scale(a * b2)));
    let s33 = d2.scale(rho).add(&q).add(&g).add(&g.transpose());
    om.set_block(2 * n, 2 * n, &s33.scale(b2));
    om.mirror_upper();
    om
}

fn scaled_norm(h: &Mat, f: &Mat, d: &[f64]) -> Result<f64> {
    let n = h.rows();
    let hf = h.add(f);
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = d[i] * hf[(i, j)] / d[j];
        }
    }
    spectral_norm(&m)
}

/// `‖D(H+BK)D⁻¹‖₂ ≤ ν < 1`.
pub fn check_boundary_norm(sys: &HyperbolicSystem, ctl: &ControllerParams, cert: &CertificateParams) -> Result<NormReport> {
    let f = prepare(sys, ctl, cert)?;
    let norm = scaled_norm(&sys.h, &f, &cert.d)?;
    Ok(NormReport {
        holds: norm <= cert.nu && cert.nu < 1.0,
        norm,
    })
}

/// `Ω > ζ I`.
pub fn check_omega(sys: &HyperbolicSystem, ctl: &ControllerParams, cert: &CertificateParams) -> Result<EigReport> {
    let om = build_omega(sys, ctl, cert)?;
    let min_eig = min_eig_sym(&om)?;
    Ok(EigReport {
        holds: min_eig > cert.zeta,
        min_eig,
    })
}

/// The four summands of χ with `ζ̄ = ζ`.
pub fn chi_terms(q: &Mat, g: &Mat, cert: &CertificateParams, chi_beta: ChiBeta) -> Result<[f64; 4]> {
    let (a, z) = (cert.alpha, cert.zeta);
    let nq = spectral_norm(q)?;
    let ng = spectral_norm(g)?;
    let beta = match chi_beta {
        ChiBeta::Beta1 => cert.beta1,
        ChiBeta::Beta2 => cert.beta2,
        ChiBeta::Beta3 => cert.beta3,
    };
    Ok([
        a.powi(4) * cert.beta2.powi(2) * nq * nq / z,
        (a * beta).powi(2) * ng * ng / z,
        a * a * nq,
        2.0 * (a * cert.beta3).powi(2) / z,
    ])
}

pub fn derive_constants(
    sys: &HyperbolicSystem,
    ctl: &ControllerParams,
    cert: &CertificateParams,
) -> Result<DerivedConstants> {
    derive_constants_with(sys, ctl, cert, ChiBeta::default())
}

pub fn derive_constants_with(
    sys: &HyperbolicSystem,
    ctl: &ControllerParams,
    cert: &CertificateParams,
    chi_beta: ChiBeta,
) -> Result<DerivedConstants> {
    let f = prepare(sys, ctl, cert)?;
    if cert.alpha != ctl.alpha {
        return Err(Error::InvalidInput(format!(
            "certificate alpha {} differs from controller alpha {}",
            cert.alpha, ctl.alpha
        )));
    }
    let a = check_boundary_norm(sys, ctl, cert)?;
    let b = check_omega(sys, ctl, cert)?;
    if !(a.holds && b.holds) || cert.zeta <= 0.0 {
        let reason = if !a.holds {
            format!("boundary norm {:.6} exceeds nu = {}", a.norm, cert.nu)
        } else {
            format!("min eig of Omega {:.6e} not above zeta = {}", b.min_eig, cert.zeta)
        };
        return Err(Error::Infeasible(InfeasibleReport {
            best_norm: a.norm,
            best_min_eig: b.min_eig,
            evaluations: 1,
            reason,
        }));
    }

    let n = sys.n();
    let d = &cert.d;
    let d2: Vec<f64> = d.iter().map(|v| v * v).collect();
    let d2m = Mat::diag(&d2);
    let q = &(&f.transpose() * &d2m) * &f;
    let g = &(&sys.h.transpose() * &d2m) * &f;
    let omega = omega_from(&sys.h, &f, cert);

    let lam = &sys.lambda;
    let p1 = Mat::diag(&(0..n).map(|i| cert.beta1 * d2[i] / lam[i]).collect::<Vec<_>>());
    let p2 = Mat::diag(&(0..n).map(|i| cert.beta2 * d2[i] * lam[i]).collect::<Vec<_>>());
    let p3 = Mat::identity(n).scale(cert.beta3);
    let dtilde: Vec<f64> = (0..n).map(|i| d[i] * lam[i]).collect();

    let sigma1 = cert.mu * sys.lambda_min();
    let sigma2 = sigma1;
    let sigma = sigma1.min(sigma2).min(cert.zeta / 2.0);
    let chi: f64 = chi_terms(&q, &g, cert, chi_beta)?.iter().sum();

    let d_max = d.iter().cloned().fold(0.0, f64::max);
    let d_min = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let df = &Mat::diag(d) * &f;
    let ndf = spectral_norm(&df)?;
    let c_d = (d_max * d_max).max(ndf * ndf) / (d_min * d_min * (1.0 - cert.nu * cert.nu));

    let mut cp_lo = f64::INFINITY;
    let mut cp_hi = 0.0f64;
    for p in [&p1, &p2, &p3] {
        cp_lo = cp_lo.min(min_eig_sym(p)?);
        cp_hi = cp_hi.max(max_eig_sym(p)?);
    }

    Ok(DerivedConstants {
        n,
        mu: cert.mu,
        zeta: cert.zeta,
        rho: cert.rho(),
        f,
        q,
        g,
        omega,
        p1,
        p2,
        p3,
        dtilde,
        sigma1,
        sigma2,
        sigma,
        chi,
        c_d,
        cp_lo,
        cp_hi,
        dss_c: (c_d * cp_hi / cp_lo).sqrt(),
        dss_a: sigma / 2.0,
        dss_gamma_coef: (c_d * chi / (cp_lo * sigma)).sqrt(),
        c1: (2.0 + c_d) * chi / (cp_lo * sigma),
        c2: (2.0 + c_d) * cp_hi / cp_lo,
    })
}

/// `n c_D χ / (c̲_P σ)`; admissible quantizers have `(M_q/Δ_q)²` strictly above it.
pub fn quantizer_rate_bound(dc: &DerivedConstants, n: usize) -> f64 {
    n as f64 * dc.c_d * dc.chi / (dc.cp_lo * dc.sigma)
}

/// `γ_ε(Δ_q)`, the ultimate bound on `max_z |X(z,t)|²`.
pub fn ultimate_bound(dc: &DerivedConstants, n: usize, delta_q: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    if !(delta_q > 0.0 && delta_q.is_finite()) {
        return Err(Error::InvalidInput("delta_q must be positive".into()));
    }
    Ok(quantizer_rate_bound(dc, n) * delta_q * delta_q * (1.0 + eps))
}

/// JSON layout of a certificate together with its derived constants.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub mu: f64,
    pub nu: f64,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub zeta: f64,
    pub rho: f64,
    pub sigma: f64,
    pub chi: f64,
    #[serde(rename = "c_D")]
    pub c_d: f64,
    #[serde(rename = "cP_lo")]
    pub cp_lo: f64,
    #[serde(rename = "cP_hi")]
    pub cp_hi: f64,
    pub dss_c: f64,
    pub dss_a: f64,
    pub dss_gamma_coef: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub rate_bound: f64,
    pub omega_min_eig: f64,
    pub boundary_norm: f64,
    /// How the DSS constants are to be read.
    pub dss_form: String,
}

impl CertificateReport {
    pub fn new(cert: &CertificateParams, dc: &DerivedConstants, boundary_norm: f64) -> Result<Self> {
        Ok(Self {
            mu: cert.mu,
            nu: cert.nu,
            d: cert.d.clone(),
            alpha: cert.alpha,
            beta1: cert.beta1,
            beta2: cert.beta2,
            beta3: cert.beta3,
            zeta: cert.zeta,
            rho: dc.rho,
            sigma: dc.sigma,
            chi: dc.chi,
            c_d: dc.c_d,
            cp_lo: dc.cp_lo,
            cp_hi: dc.cp_hi,
            dss_c: dc.dss_c,
            dss_a: dc.dss_a,
            dss_gamma_coef: dc.dss_gamma_coef,
            c1: dc.c1,
            c2: dc.c2,
            rate_bound: quantizer_rate_bound(dc, dc.n),
            omega_min_eig: min_eig_sym(&dc.omega)?,
            boundary_norm,
            dss_form: "max_z|X(z,t)| <= dss_c * exp(-dss_a t) * sqrt(M_X0) + dss_gamma_coef * sup|d|".into(),
        })
    }
}

const MU_GRID: (f64, f64, usize) = (0.01, 2.0, 12);
const ALPHA_GRID: (f64, f64, usize) = (0.1, 10.0, 9);
const ZETA_FRACTION: f64 = 0.9;

fn log_grid((lo, hi, k): (f64, f64, usize)) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..k)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == k {
                hi
            } else {
                (a + (b - a) * i as f64 / (k - 1) as f64).exp()
            }
        })
        .collect()
}

/// Coordinate descent on `log dᵢ` (with `d₀ = 1`) for the smallest scaled norm.
fn minimize_scaled_norm(h: &Mat, f: &Mat, budget: usize) -> Result<(Vec<f64>, f64, usize)> {
    let n = h.rows();
    let mut logd = vec![0.0; n];
    let eval = |l: &[f64]| -> Result<f64> {
        let d: Vec<f64> = l.iter().map(|v| v.exp()).collect();
        scaled_norm(h, f, &d)
    };
    let mut best = eval(&logd)?;
    let mut evals = 1;
    let mut step = 1.0;
    while step > 1e-9 && evals < budget {
        let mut improved = false;
        for i in 1..n {
            for dir in [1.0, -1.0] {
                let mut trial = logd.clone();
                trial[i] += dir * step;
                let v = eval(&trial)?;
                evals += 1;
                if v < best {
                    best = v;
                    logd = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    Ok((logd.iter().map(|v| v.exp()).collect(), best, evals))
}

/// Nelder–Mead minimization in a few dimensions with an evaluation budget.
fn nelder_mead(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[f64],
    scale: f64,
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, f64, usize) {
    let dim = start.len();
    let mut evals = 0;
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = f(start);
    evals += 1;
    simplex.push((start.to_vec(), v0));
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += scale * rng.gen_range(0.5..1.5);
        let v = f(&p);
        evals += 1;
        simplex.push((p, v));
    }
    let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    while evals < budget {
        simplex.sort_by(|a, b| key(a.1).total_cmp(&key(b.1)));
        let spread = key(simplex[dim].1) - key(simplex[0].1);
        if spread.abs() < 1e-13 * (1.0 + key(simplex[0].1).abs()) {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|p| p.0[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |t: f64| -> Vec<f64> {
            (0..dim).map(|j| centroid[j] + t * (worst.0[j] - centroid[j])).collect()
        };
        let xr = along(-1.0);
        let fr = f(&xr);
        evals += 1;
        if key(fr) < key(simplex[0].1) {
            let xe = along(-2.0);
            let fe = f(&xe);
            evals += 1;
            simplex[dim] = if key(fe) < key(fr) { (xe, fe) } else { (xr, fr) };
        } else if key(fr) < key(simplex[dim - 1].1) {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if key(fr) < key(worst.1) {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            evals += 1;
            if key(fc) < key(worst.1).min(key(fr)) {
                simplex[dim] = (xc, fc);
            } else {
                let best = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    p.0 = (0..dim).map(|j| best[j] + 0.5 * (p.0[j] - best[j])).collect();
                    p.1 = f(&p.0);
                    evals += 1;
                }
            }
        }
    }
    simplex.sort_by(|a, b| key(a.1).total_cmp(&key(b.1)));
    let (x, v) = simplex.swap_remove(0);
    (x, v, evals)
}

struct GridOutcome {
    cert: Option<(CertificateParams, DerivedConstants)>,
    min_eig: f64,
    evals: usize,
}

/// Searches for a certificate. The ζ of the result is 0.9 of the achieved
/// `λ_min(Ω)`; among feasible grid points the one with the smallest DSS gain
/// `c_D χ / (c̲_P σ)` is returned. Deterministic for a given seed.
pub fn search_certificate(
    sys: &HyperbolicSystem,
    ctl: &ControllerParams,
    budget: usize,
    seed: u64,
) -> Result<std::result::Result<CertificateParams, InfeasibleReport>> {
    if budget == 0 {
        return Err(Error::InvalidInput("search budget must be at least 1".into()));
    }
    if let Some(v) = validate(sys, ctl).first() {
        return Err(Error::InvalidInput(v.to_string()));
    }
    let f = ctl.feedback(sys)?;
    let n = sys.n();

    let (d_opt, norm_opt, mut evaluations) = minimize_scaled_norm(&sys.h, &f, (budget / 10).max(1))?;
    let mut d_cands = vec![(d_opt, norm_opt)];
    let eye = vec![1.0; n];
    if d_cands[0].0 != eye {
        let nrm = scaled_norm(&sys.h, &f, &eye)?;
        evaluations += 1;
        d_cands.push((eye, nrm));
    }
    let best_norm = d_cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);

    let mus = log_grid(MU_GRID);
    let alphas = log_grid(ALPHA_GRID);
    let mut points = Vec::new();
    for dc in &d_cands {
        for &mu in &mus {
            for &alpha in &alphas {
                points.push((dc.0.clone(), dc.1, mu, alpha));
            }
        }
    }
    let remaining = budget.saturating_sub(evaluations);
    let per_point = (remaining / points.len()).max(8);

    let h = &sys.h;
    let outcomes: Vec<GridOutcome> = points
        .par_iter()
        .enumerate()
        .map(|(idx, (d, norm, mu, alpha))| {
            let nu = norm.max(1e-6);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let base = CertificateParams {
                mu: *mu,
                nu,
                d: d.clone(),
                alpha: *alpha,
                beta1: 1.0,
                beta2: 1.0,
                beta3: 1.0,
                zeta: 0.0,
            };
            let objective = |x: &[f64]| -> f64 {
                let b: Vec<f64> = x.iter().map(|v| v.exp()).collect();
                let bmax = b.iter().cloned().fold(0.0, f64::max);
                let c = CertificateParams {
                    beta1: b[0] / bmax,
                    beta2: b[1] / bmax,
                    beta3: b[2] / bmax,
                    ..base.clone()
                };
                match min_eig_sym(&omega_from(h, &f, &c)) {
                    Ok(v) => -v,
                    Err(_) => f64::INFINITY,
                }
            };
            let mut evals = 0;
            let mut start = vec![0.0; 3];
            let mut best = f64::INFINITY;
            let mut scale = 2.0;
            while evals + 4 <= per_point {
                let (x, v, e) = nelder_mead(objective, &start, scale, per_point - evals, &mut rng);
                evals += e;
                if v < best - 1e-12 {
                    best = v;
                    start = x;
                } else {
                    scale *= 0.5;
                    if scale < 1e-3 {
                        break;
                    }
                }
            }
            let min_eig = -best;
            let mut cert_out = None;
            if nu < 1.0 && min_eig > 0.0 {
                let b: Vec<f64> = start.iter().map(|v| v.exp()).collect();
                let bmax = b.iter().cloned().fold(0.0, f64::max);
                let cert = CertificateParams {
                    beta1: b[0] / bmax,
                    beta2: b[1] / bmax,
                    beta3: b[2] / bmax,
                    zeta: ZETA_FRACTION * min_eig,
                    ..base.clone()
                };
                let ctl_a = ControllerParams {
                    alpha: *alpha,
                    ..ctl.clone()
                };
                if let Ok(dc) = derive_constants(sys, &ctl_a, &cert) {
                    cert_out = Some((cert, dc));
                }
            }
            GridOutcome {
                cert: cert_out,
                min_eig,
                evals,
            }
        })
        .collect();

    let mut best_min_eig = f64::NEG_INFINITY;
    let mut chosen: Option<(CertificateParams, f64)> = None;
    for o in outcomes {
        evaluations += o.evals;
        best_min_eig = best_min_eig.max(o.min_eig);
        if let Some((cert, dc)) = o.cert {
            let gain = dc.dss_gain_sq();
            if gain.is_finite() && chosen.as_ref().is_none_or(|c| gain < c.1) {
                chosen = Some((cert, gain));
            }
        }
    }

    match chosen {
        Some((cert, _)) => {
            let ctl_a = ControllerParams {
                alpha: cert.alpha,
                ..ctl.clone()
            };
            let a = check_boundary_norm(sys, &ctl_a, &cert)?;
            let b = check_omega(sys, &ctl_a, &cert)?;
            if a.holds && b.holds {
                Ok(Ok(cert))
            } else {
                Ok(Err(InfeasibleReport {
                    best_norm,
                    best_min_eig,
                    evaluations,
                    reason: "candidate failed re-verification".into(),
                }))
            }
        }
        None => {
            let reason = if best_norm >= 1.0 {
                "no diagonal scaling makes the boundary map contractive".to_string()
            } else {
                "no grid point makes Omega positive definite".to_string()
            };
            Ok(Err(InfeasibleReport {
                best_norm,
                best_min_eig,
                evaluations,
                reason,
            }))
        }
    }
}
