//! Disturbance signals with running essential-supremum tracking.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalKind {
    #[default]
    Zero,
    Constant,
    /// Zero before `t0`, constant after.
    Step,
    /// `amplitude · e^{−rate·t}`.
    Decaying,
    /// Piecewise constant on intervals of length `dwell`, each value of norm
    /// exactly `amplitude` in a seeded random direction.
    Random,
}

/// Config block for a disturbance. `amplitude` is the Euclidean norm; the
/// deterministic kinds point along `direction` (normalized; default
/// `(1,…,1)/√n`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisturbanceSpec {
    #[serde(default)]
    pub kind: SignalKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_rate")]
    pub rate: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dwell")]
    pub dwell: f64,
    #[serde(default)]
    pub t0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
}

fn default_rate() -> f64 {
    1.0
}

fn default_dwell() -> f64 {
    0.05
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self {
            kind: SignalKind::Zero,
            amplitude: 0.0,
            rate: default_rate(),
            seed: 0,
            dwell: default_dwell(),
            t0: 0.0,
            direction: None,
        }
    }
}

impl DisturbanceSpec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn build(&self, n: usize) -> Result<Signal> {
        Signal::new(self.clone(), n)
    }
}

#[derive(Clone, Debug)]
pub struct Signal {
    spec: DisturbanceSpec,
    n: usize,
    direction: Vec<f64>,
    running_sup: f64,
}

impl Signal {
    pub fn new(spec: DisturbanceSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("signal dimension must be positive".into()));
        }
        if !spec.amplitude.is_finite() || spec.amplitude < 0.0 {
            return Err(Error::InvalidInput("disturbance amplitude must be finite and nonnegative".into()));
        }
        if spec.kind == SignalKind::Decaying && !(spec.rate.is_finite() && spec.rate >= 0.0) {
            return Err(Error::InvalidInput("disturbance rate must be finite and nonnegative".into()));
        }
        if spec.kind == SignalKind::Random && !(spec.dwell.is_finite() && spec.dwell > 0.0) {
            return Err(Error::InvalidInput("disturbance dwell must be positive".into()));
        }
        let direction = match &spec.direction {
            Some(d) => {
                if d.len() != n {
                    return Err(Error::dims("disturbance direction", n, d.len()));
                }
                let nrm = norm2(d);
                if !(nrm.is_finite() && nrm > 0.0) {
                    return Err(Error::InvalidInput("disturbance direction must be non-zero".into()));
                }
                d.iter().map(|v| v / nrm).collect()
            }
            None => vec![1.0 / (n as f64).sqrt(); n],
        };
        Ok(Self {
            spec,
            n,
            direction,
            running_sup: 0.0,
        })
    }

    pub fn zero(n: usize) -> Self {
        Self::new(DisturbanceSpec::zero(), n).expect("zero signal")
    }

    pub fn spec(&self) -> &DisturbanceSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `d(t)` without touching the running supremum.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let a = self.spec.amplitude;
        match self.spec.kind {
            SignalKind::Zero => vec![0.0; self.n],
            SignalKind::Constant => self.along(a),
            SignalKind::Step => {
                if t >= self.spec.t0 {
                    self.along(a)
                } else {
                    vec![0.0; self.n]
                }
            }
            SignalKind::Decaying => self.along(a * (-self.spec.rate * t).exp()),
            SignalKind::Random => {
                let k = (t / self.spec.dwell).floor().max(0.0) as u64;
                let dir = random_direction(self.spec.seed, k, self.n);
                dir.iter().map(|v| a * v).collect()
            }
        }
    }

    /// `d(t)`, updating the running supremum of `|d|`.
    pub fn sample(&mut self, t: f64) -> Vec<f64> {
        let v = self.eval(t);
        self.running_sup = self.running_sup.max(norm2(&v));
        v
    }

    pub fn running_sup(&self) -> f64 {
        self.running_sup
    }

    /// `sup_{0≤s≤t} |d(s)|` in closed form.
    pub fn analytic_sup(&self, t: f64) -> f64 {
        let a = self.spec.amplitude;
        match self.spec.kind {
            SignalKind::Zero => 0.0,
            SignalKind::Constant | SignalKind::Decaying | SignalKind::Random => a,
            SignalKind::Step => {
                if t >= self.spec.t0 {
                    a
                } else {
                    0.0
                }
            }
        }
    }

    fn along(&self, s: f64) -> Vec<f64> {
        self.direction.iter().map(|v| s * v).collect()
    }
}

/// Unit vector for dwell interval `k`, uniform on the sphere.
fn random_direction(seed: u64, k: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm2(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|x| x / r).collect();
        }
    }
}
