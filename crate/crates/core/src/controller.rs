//! The first-order boundary compensator `η' = −α(η − y)`, `u = Kη`.

use crate::error::{Error, Result};
use crate::model::ControllerParams;
use crate::quantizer::QuantizerSpec;
use crate::signals::Signal;

/// One exact step of `η' = −α(η − y)` over `dt`, with `y` linear between
/// `y_now` and `y_next`.
///
/// With `h = αΔt`, `e = e^{−h}`, `g = (1 − e)/h`:
/// `η⁺ = e·η + (1 − e)·y₀ + (1 − g)·(y₁ − y₀)`. All three weights on
/// `(η, y₀, y₁)` are nonnegative and sum to one.
pub fn advance_eta(eta: &[f64], y_now: &[f64], y_next: &[f64], alpha: f64, dt: f64) -> Vec<f64> {
    let h = alpha * dt;
    let one_minus_e = -(-h).exp_m1();
    let e = 1.0 - one_minus_e;
    // 1 − (1 − e^{−h})/h
    let one_minus_g = if h < 1e-2 {
        h * (0.5 - h * (1.0 / 6.0 - h * (1.0 / 24.0 - h * (1.0 / 120.0 - h / 720.0))))
    } else {
        1.0 - one_minus_e / h
    };
    let w_eta = e;
    let w_next = one_minus_g;
    let w_now = one_minus_e - one_minus_g;
    eta.iter()
        .zip(y_now.iter().zip(y_next))
        .map(|(x, (a, b))| w_eta * x + w_now * a + w_next * b)
        .collect()
}

/// `u = K η`.
pub fn control(ctl: &ControllerParams, eta: &[f64]) -> Result<Vec<f64>> {
    if eta.len() != ctl.k.cols() {
        return Err(Error::dims("control eta", ctl.k.cols(), eta.len()));
    }
    Ok(ctl.k.mul_vec(eta))
}

/// What the compensator sees at `z = 1`.
#[derive(Clone, Debug)]
pub enum MeasurementSource {
    /// `y = X(1, t) + d(t)`.
    Additive(Signal),
    /// `y = q(X(1, t))`, held constant over each step.
    Quantized(QuantizerSpec),
}

/// A measurement together with its effective disturbance `y − X(1, t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub y: Vec<f64>,
    pub d: Vec<f64>,
    pub overflow: bool,
}

impl MeasurementSource {
    pub fn measure(&mut self, t: f64, x1: &[f64]) -> Result<Measurement> {
        match self {
            MeasurementSource::Additive(sig) => {
                let d = sig.sample(t);
                if d.len() != x1.len() {
                    return Err(Error::dims("disturbance", x1.len(), d.len()));
                }
                Ok(Measurement {
                    y: x1.iter().zip(&d).map(|(a, b)| a + b).collect(),
                    d,
                    overflow: false,
                })
            }
            MeasurementSource::Quantized(q) => {
                let qv = q.quantize(x1)?;
                let d = qv.value.iter().zip(x1).map(|(a, b)| a - b).collect();
                Ok(Measurement {
                    y: qv.value,
                    d,
                    overflow: qv.overflow,
                })
            }
        }
    }

    /// Whether `y` is held over a step instead of interpolated.
    pub fn holds_over_step(&self) -> bool {
        matches!(self, MeasurementSource::Quantized(_))
    }

    /// Disturbance value without side effects, used for logging.
    pub fn disturbance_at(&self, t: f64, x1: &[f64]) -> Result<Vec<f64>> {
        match self {
            MeasurementSource::Additive(sig) => Ok(sig.eval(t)),
            MeasurementSource::Quantized(q) => {
                let qv = q.quantize(x1)?;
                Ok(qv.value.iter().zip(x1).map(|(a, b)| a - b).collect())
            }
        }
    }
}
