//! Closed-loop transport solver.
//!
//! `Exact` mode treats each component as a delay line: with speeds λᵢ,
//! `Xᵢ(z, t) = bᵢ(t − z/λᵢ)` where `bᵢ` is the boundary value at `z = 0` and
//! `bᵢ(s) = X⁰ᵢ(−λᵢ s)` for `s < 0`. Only `bᵢ` on the last `1/λᵢ` time units is
//! stored. `Upwind` mode is a first-order finite-difference scheme kept as an
//! independent reference.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::controller::{advance_eta, control, MeasurementSource};
use crate::error::{Error, Result};
use crate::linalg::{norm2, Mat};
use crate::model::{check_compatibility, validate, ControllerParams, HyperbolicSystem, InitialProfile};

pub const DEFAULT_M: usize = 200;
pub const MIN_M: usize = 16;
pub const BLOW_UP: f64 = 1e12;
const MAX_SUBDIVISION: usize = 16;
const ALIGN_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Exact,
    Upwind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(rename = "M", default = "default_m")]
    pub m: usize,
    /// Time step; chosen automatically when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub mode: Mode,
}

fn default_m() -> usize {
    DEFAULT_M
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            m: DEFAULT_M,
            dt: None,
            mode: Mode::Exact,
        }
    }
}

/// `Δz / (λ_max s)` for the smallest `s ≤ 16` that makes every delay
/// `Δz/(λᵢΔt)` an integer, else `Δz / λ_max`.
pub fn default_dt(lambda: &[f64], dz: f64) -> f64 {
    let lmax = lambda.iter().cloned().fold(0.0, f64::max);
    for s in 1..=MAX_SUBDIVISION {
        let dt = dz / (lmax * s as f64);
        if lambda.iter().all(|&l| aligned_ratio(dz, l, dt).is_some()) {
            return dt;
        }
    }
    dz / lmax
}

fn aligned_ratio(dz: f64, lambda: f64, dt: f64) -> Option<i64> {
    let r = dz / (lambda * dt);
    let rr = r.round();
    (rr >= 1.0 && (r - rr).abs() <= ALIGN_TOL * r).then_some(rr as i64)
}

/// Field samples and controller state at one instant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub z: Vec<f64>,
    /// `x[j]` is `X(z_j, t)`.
    pub x: Vec<Vec<f64>>,
    pub eta: Vec<f64>,
    /// `xz[j]` approximates `∂X/∂z(z_j, t)`.
    pub xz: Vec<Vec<f64>>,
}

impl FieldState {
    pub fn dz(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    pub fn x1(&self) -> &[f64] {
        self.x.last().unwrap()
    }

    /// `max_j |X(z_j, t)|`.
    pub fn maxnorm(&self) -> f64 {
        self.x.iter().map(|r| norm2(r)).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryRecord {
    pub t: f64,
    pub x1: Vec<f64>,
    pub eta: Vec<f64>,
    pub u: Vec<f64>,
    pub d: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub x1: Vec<f64>,
    pub x1_t: Vec<f64>,
    pub x0: Vec<f64>,
}

/// Per-component ring of boundary values `bᵢ(j Δt)`, `j ≥ base`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryBuffer {
    base: Vec<u64>,
    data: Vec<VecDeque<f64>>,
    depth: Vec<usize>,
}

impl HistoryBuffer {
    fn new(depth: Vec<usize>, b0: &[f64]) -> Self {
        Self {
            base: vec![0; depth.len()],
            data: b0.iter().map(|&v| VecDeque::from([v])).collect(),
            depth,
        }
    }

    fn push(&mut self, b: &[f64]) {
        for i in 0..b.len() {
            self.data[i].push_back(b[i]);
            while self.data[i].len() > self.depth[i] {
                self.data[i].pop_front();
                self.base[i] += 1;
            }
        }
    }

    fn get(&self, i: usize, j: u64) -> f64 {
        let off = j
            .checked_sub(self.base[i])
            .expect("history lookup older than buffer depth");
        self.data[i][off as usize]
    }

    /// Newest index stored.
    fn head(&self, i: usize) -> u64 {
        self.base[i] + self.data[i].len() as u64 - 1
    }
}

/// Serializable solver state for restarts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub k: u64,
    pub m: usize,
    pub dt: f64,
    pub mode: Mode,
    pub eta: Vec<f64>,
    pub history: Option<HistoryBuffer>,
    pub field: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug)]
pub struct Solver {
    lambda: Vec<f64>,
    h: Mat,
    f: Mat,
    ctl: ControllerParams,
    profile: InitialProfile,
    m: usize,
    dz: f64,
    dt: f64,
    mode: Mode,
    /// Integer delay per node, when `Δz/(λᵢΔt)` is an integer.
    ratio: Vec<Option<i64>>,
    k: u64,
    eta: Vec<f64>,
    history: Option<HistoryBuffer>,
    field: Option<Vec<Vec<f64>>>,
    compat_residual: f64,
    warnings: Vec<String>,
}

impl Solver {
    pub fn new(
        sys: &HyperbolicSystem,
        ctl: &ControllerParams,
        profile: InitialProfile,
        grid: &GridSpec,
    ) -> Result<Self> {
        if let Some(v) = validate(sys, ctl).first() {
            return Err(Error::InvalidInput(v.to_string()));
        }
        if profile.dim() != sys.n() {
            return Err(Error::dims("initial profile", sys.n(), profile.dim()));
        }
        if grid.m < MIN_M {
            return Err(Error::Config(format!("grid M must be at least {MIN_M}, got {}", grid.m)));
        }
        let n = sys.n();
        let m = grid.m;
        let dz = 1.0 / m as f64;
        let lmax = sys.lambda_max();
        let dt = match grid.dt {
            Some(dt) => dt,
            None => default_dt(&sys.lambda, dz),
        };
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Config("dt must be positive".into()));
        }
        if dt * lmax > 1.0 {
            return Err(Error::Config(format!(
                "dt = {dt} exceeds the shortest transit time 1/lambda_max = {}",
                1.0 / lmax
            )));
        }
        if grid.mode == Mode::Upwind {
            let cfl = lmax * dt / dz;
            if cfl > 1.0 + 1e-12 {
                return Err(Error::Config(format!("upwind CFL number {cfl} exceeds 1")));
            }
        }
        let ratio: Vec<Option<i64>> = sys.lambda.iter().map(|&l| aligned_ratio(dz, l, dt)).collect();
        let compat = check_compatibility(sys, ctl, &profile)?;
        let mut warnings = Vec::new();
        if !compat.ok {
            warnings.push(format!(
                "initial data violates the compatibility condition (residual {:.3e}); solution is not H1-regular",
                compat.residual
            ));
        }
        let b0 = profile.eval(0.0);
        let (history, field) = match grid.mode {
            Mode::Exact => {
                let depth = (0..n)
                    .map(|i| match ratio[i] {
                        Some(r) => r as usize * m + 2,
                        None => (1.0 / (sys.lambda[i] * dt)).ceil() as usize + 2,
                    })
                    .collect();
                (Some(HistoryBuffer::new(depth, &b0)), None)
            }
            Mode::Upwind => (None, Some(profile.sample_grid(m))),
        };
        Ok(Self {
            lambda: sys.lambda.clone(),
            h: sys.h.clone(),
            f: ctl.feedback(sys)?,
            ctl: ctl.clone(),
            profile,
            m,
            dz,
            dt,
            mode: grid.mode,
            ratio,
            k: 0,
            eta: ctl.eta0.clone(),
            history,
            field,
            compat_residual: compat.residual,
            warnings,
        })
    }

    pub fn resume(
        sys: &HyperbolicSystem,
        ctl: &ControllerParams,
        profile: InitialProfile,
        grid: &GridSpec,
        ckpt: &Checkpoint,
    ) -> Result<Self> {
        let mut s = Self::new(sys, ctl, profile, grid)?;
        if ckpt.m != s.m || ckpt.dt != s.dt || ckpt.mode != s.mode {
            return Err(Error::Config("checkpoint grid does not match the configuration".into()));
        }
        if ckpt.eta.len() != s.eta.len() {
            return Err(Error::dims("checkpoint eta", s.eta.len(), ckpt.eta.len()));
        }
        match s.mode {
            Mode::Exact if ckpt.history.is_none() => {
                return Err(Error::Config("exact-mode checkpoint lacks history".into()))
            }
            Mode::Upwind if ckpt.field.is_none() => {
                return Err(Error::Config("upwind checkpoint lacks field".into()))
            }
            _ => {}
        }
        s.k = ckpt.k;
        s.eta = ckpt.eta.clone();
        s.history = ckpt.history.clone();
        s.field = ckpt.field.clone();
        Ok(s)
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            k: self.k,
            m: self.m,
            dt: self.dt,
            mode: self.mode,
            eta: self.eta.clone(),
            history: self.history.clone(),
            field: self.field.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn dz(&self) -> f64 {
        self.dz
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn mode(&self) -> Mode {
        self.mode
    }
    pub fn steps(&self) -> u64 {
        self.k
    }
    pub fn t(&self) -> f64 {
        self.k as f64 * self.dt
    }
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
    pub fn compatibility_residual(&self) -> f64 {
        self.compat_residual
    }
    /// Every delay is an integer number of steps.
    pub fn grid_aligned(&self) -> bool {
        self.ratio.iter().all(|r| r.is_some())
    }

    /// `bᵢ(s)` for arbitrary `s ≤ t`.
    fn boundary_at(&self, i: usize, s: f64) -> f64 {
        if s <= 0.0 {
            return self.profile.eval_component(-self.lambda[i] * s, i);
        }
        let hist = self.history.as_ref().unwrap();
        let p = s / self.dt;
        let j = p.floor();
        let w = p - j;
        let j = j as u64;
        if w == 0.0 || j + 1 > hist.head(i) {
            return hist.get(i, j);
        }
        (1.0 - w) * hist.get(i, j) + w * hist.get(i, j + 1)
    }

    /// `Xᵢ(z_j, t_k)` in exact mode.
    fn node_value(&self, i: usize, j: usize, k: u64) -> f64 {
        match self.ratio[i] {
            Some(r) => {
                let idx = k as i64 - r * j as i64;
                if idx >= 0 {
                    self.history.as_ref().unwrap().get(i, idx as u64)
                } else {
                    let z = self.lambda[i] * self.dt * (-idx) as f64;
                    self.profile.eval_component(z, i)
                }
            }
            None => {
                let s = k as f64 * self.dt - j as f64 * self.dz / self.lambda[i];
                self.boundary_at(i, s)
            }
        }
    }

    fn x1_at(&self, k: u64) -> Vec<f64> {
        (0..self.n()).map(|i| self.node_value(i, self.m, k)).collect()
    }

    /// `X(1, t)`.
    pub fn x1(&self) -> Vec<f64> {
        match self.mode {
            Mode::Exact => self.x1_at(self.k),
            Mode::Upwind => self.field.as_ref().unwrap()[self.m].clone(),
        }
    }

    /// Advances one step of length `dt`.
    pub fn step(&mut self, src: &mut MeasurementSource) -> Result<()> {
        let t0 = self.t();
        let t1 = (self.k + 1) as f64 * self.dt;
        let n = self.n();
        let x1_now = self.x1();

        let mut new_field = None;
        let x1_next = match self.mode {
            Mode::Exact => self.x1_at(self.k + 1),
            Mode::Upwind => {
                let f = self.field.as_ref().unwrap();
                let mut nf = f.clone();
                for i in 0..n {
                    let c = self.lambda[i] * self.dt / self.dz;
                    for j in 1..=self.m {
                        nf[j][i] = f[j][i] - c * (f[j][i] - f[j - 1][i]);
                    }
                }
                let x = nf[self.m].clone();
                new_field = Some(nf);
                x
            }
        };

        let y0 = src.measure(t0, &x1_now)?.y;
        let y1 = if src.holds_over_step() {
            y0.clone()
        } else {
            src.measure(t1, &x1_next)?.y
        };
        let eta1 = advance_eta(&self.eta, &y0, &y1, self.ctl.alpha, self.dt);
        let hx = self.h.mul_vec(&x1_next);
        let fe = self.f.mul_vec(&eta1);
        let b1: Vec<f64> = hx.iter().zip(&fe).map(|(a, b)| a + b).collect();

        let worst = b1
            .iter()
            .chain(&eta1)
            .map(|v| if v.is_finite() { v.abs() } else { f64::INFINITY })
            .fold(0.0, f64::max);
        let field_worst = new_field
            .as_ref()
            .map(|nf: &Vec<Vec<f64>>| {
                nf.iter()
                    .flatten()
                    .map(|v| if v.is_finite() { v.abs() } else { f64::INFINITY })
                    .fold(0.0, f64::max)
            })
            .unwrap_or(0.0);
        let worst = worst.max(field_worst);
        if worst > BLOW_UP {
            return Err(Error::BlowUp { t: t1, magnitude: worst });
        }

        match self.mode {
            Mode::Exact => self.history.as_mut().unwrap().push(&b1),
            Mode::Upwind => {
                let mut nf = new_field.unwrap();
                nf[0] = b1;
                self.field = Some(nf);
            }
        }
        self.eta = eta1;
        self.k += 1;
        Ok(())
    }

    /// Field samples `X(z_j, t)`, `j = 0..=M`.
    pub fn field(&self) -> Vec<Vec<f64>> {
        match self.mode {
            Mode::Exact => (0..=self.m)
                .map(|j| (0..self.n()).map(|i| self.node_value(i, j, self.k)).collect())
                .collect(),
            Mode::Upwind => self.field.clone().unwrap(),
        }
    }

    pub fn snapshot(&self) -> FieldState {
        let x = self.field();
        let xz = gradient_field(&x, self.dz);
        FieldState {
            t: self.t(),
            z: (0..=self.m).map(|j| j as f64 * self.dz).collect(),
            x,
            eta: self.eta.clone(),
            xz,
        }
    }

    pub fn current_record(&self, src: &MeasurementSource) -> Result<BoundaryRecord> {
        let x1 = self.x1();
        let d = src.disturbance_at(self.t(), &x1)?;
        Ok(BoundaryRecord {
            t: self.t(),
            u: control(&self.ctl, &self.eta)?,
            eta: self.eta.clone(),
            x1,
            d,
        })
    }

    /// Boundary traces `X(1,t)`, `∂ₜX(1,t)`, `X(0,t)`.
    pub fn trace(&self) -> Trace {
        let n = self.n();
        let x1 = self.x1();
        match self.mode {
            Mode::Upwind => {
                let f = self.field.as_ref().unwrap();
                let x1_t = (0..n)
                    .map(|i| -self.lambda[i] * (f[self.m][i] - f[self.m - 1][i]) / self.dz)
                    .collect();
                Trace {
                    x1,
                    x1_t,
                    x0: f[0].clone(),
                }
            }
            Mode::Exact => {
                let t = self.t();
                let x1_t = (0..n)
                    .map(|i| {
                        let s = t - 1.0 / self.lambda[i];
                        if s < 0.0 {
                            -self.lambda[i] * profile_slope(&self.profile, i, 1.0 - self.lambda[i] * t)
                        } else {
                            self.history_slope(i, s)
                        }
                    })
                    .collect();
                Trace {
                    x1,
                    x1_t,
                    x0: (0..n).map(|i| self.node_value(i, 0, self.k)).collect(),
                }
            }
        }
    }

    /// Slope of the piecewise-linear boundary history at `s ≥ 0`; at a node
    /// the segment ending there is used.
    fn history_slope(&self, i: usize, s: f64) -> f64 {
        let hist = self.history.as_ref().unwrap();
        let p = s / self.dt;
        let mut j = p.floor() as u64;
        if (p - p.round()).abs() <= ALIGN_TOL * p.max(1.0) {
            j = p.round() as u64;
            if j == 0 {
                return (hist.get(i, 1) - hist.get(i, 0)) / self.dt;
            }
            return (hist.get(i, j) - hist.get(i, j - 1)) / self.dt;
        }
        (hist.get(i, j + 1) - hist.get(i, j)) / self.dt
    }
}

fn profile_slope(p: &InitialProfile, i: usize, z: f64) -> f64 {
    let h = 1e-6;
    let (a, b) = ((z - h).max(0.0), (z + h).min(1.0));
    (p.eval_component(b, i) - p.eval_component(a, i)) / (b - a)
}

/// Central differences inside, second-order one-sided differences at the ends.
pub fn gradient_field(x: &[Vec<f64>], dz: f64) -> Vec<Vec<f64>> {
    let m = x.len() - 1;
    let n = x[0].len();
    let mut g = vec![vec![0.0; n]; m + 1];
    for i in 0..n {
        if m == 1 {
            let s = (x[1][i] - x[0][i]) / dz;
            g[0][i] = s;
            g[1][i] = s;
            continue;
        }
        g[0][i] = (-3.0 * x[0][i] + 4.0 * x[1][i] - x[2][i]) / (2.0 * dz);
        for j in 1..m {
            g[j][i] = (x[j + 1][i] - x[j - 1][i]) / (2.0 * dz);
        }
        g[m][i] = (3.0 * x[m][i] - 4.0 * x[m - 1][i] + x[m - 2][i]) / (2.0 * dz);
    }
    g
}
