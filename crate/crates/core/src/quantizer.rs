//! Static uniform quantizers for the measured boundary trace.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuantizerSpec {
    /// Cell-centred quantizer: error at most `delta_q` per component on
    /// `|x|∞ ≤ M_q`, overflow flag outside.
    RangeSensitivity {
        delta_q: f64,
        #[serde(rename = "M_q")]
        m_q: f64,
    },
    /// `q(x) = ⌊ℓx⌋/ℓ` componentwise; unbounded range.
    Floor { ell: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantizedValue {
    pub value: Vec<f64>,
    /// The overflow symbol `q₀` was emitted.
    pub overflow: bool,
    /// Row-major index over the `(2K+1)ⁿ` cells; `None` for the floor kind or
    /// when the index does not fit in 64 bits.
    pub codeword: Option<u64>,
}

impl QuantizerSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            QuantizerSpec::RangeSensitivity { delta_q, m_q } => {
                if !ok(delta_q) || !ok(m_q) {
                    return Err(Error::InvalidInput("delta_q and M_q must be finite and positive".into()));
                }
            }
            QuantizerSpec::Floor { ell } => {
                if !ok(ell) {
                    return Err(Error::InvalidInput("ell must be finite and positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Sensitivity `Δ_q`; `1/ℓ` for the floor kind.
    pub fn delta_q(&self) -> f64 {
        match *self {
            QuantizerSpec::RangeSensitivity { delta_q, .. } => delta_q,
            QuantizerSpec::Floor { ell } => 1.0 / ell,
        }
    }

    /// Range `M_q`; infinite for the floor kind.
    pub fn m_q(&self) -> f64 {
        match *self {
            QuantizerSpec::RangeSensitivity { m_q, .. } => m_q,
            QuantizerSpec::Floor { .. } => f64::INFINITY,
        }
    }

    /// Cells per side of the centre cell, per axis.
    pub fn half_cells(&self) -> Option<u64> {
        match *self {
            QuantizerSpec::RangeSensitivity { delta_q, m_q } => {
                Some(((m_q / delta_q - 1.0) / 2.0).ceil().max(0.0) as u64)
            }
            QuantizerSpec::Floor { .. } => None,
        }
    }

    /// Alphabet size excluding `q₀` (odd), or `None` when unbounded/too large.
    pub fn alphabet_size(&self, n: usize) -> Option<u64> {
        let per_axis = 2 * self.half_cells()? + 1;
        per_axis.checked_pow(n as u32)
    }

    /// Euclidean bound `√n Δ_q` on the in-range error.
    pub fn error_bound(&self, n: usize) -> f64 {
        (n as f64).sqrt() * self.delta_q()
    }

    pub fn quantize(&self, x: &[f64]) -> Result<QuantizedValue> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("quantizer input must be finite".into()));
        }
        match *self {
            QuantizerSpec::Floor { ell } => Ok(QuantizedValue {
                value: x.iter().map(|&v| floor_q(v, ell)).collect(),
                overflow: false,
                codeword: None,
            }),
            QuantizerSpec::RangeSensitivity { delta_q, m_q } => {
                let k_max = self.half_cells().unwrap() as f64;
                let overflow = x.iter().any(|v| v.abs() > m_q);
                let idx: Vec<f64> = x
                    .iter()
                    .map(|&v| (v / (2.0 * delta_q)).round().clamp(-k_max, k_max))
                    .collect();
                let per_axis = 2 * k_max as u64 + 1;
                let codeword = idx.iter().try_fold(0u64, |acc, &k| {
                    acc.checked_mul(per_axis)?.checked_add((k + k_max) as u64)
                });
                Ok(QuantizedValue {
                    value: idx.iter().map(|k| 2.0 * delta_q * k).collect(),
                    overflow,
                    codeword,
                })
            }
        }
    }
}

/// `⌊ℓx⌋/ℓ` with the integer corrected so that `q ≤ x < q + 1/ℓ` holds for the
/// rounded quotients.
fn floor_q(x: f64, ell: f64) -> f64 {
    let mut k = (ell * x).floor();
    if k / ell > x {
        k -= 1.0;
    }
    if (k + 1.0) / ell <= x {
        k += 1.0;
    }
    k / ell
}
