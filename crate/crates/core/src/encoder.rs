//! Sensor-side encoding: `b = sign(Φx)` plus the `‖x‖₂` side channel.

use ndarray::ArrayView1;

use crate::error::{Error, Result};
use crate::transform::SensingEnsemble;

/// `+1` for `y ≥ 0`, `-1` otherwise. Zero maps to `+1`.
pub fn sign_fn(y: f64) -> Result<i8> {
    if !y.is_finite() {
        return Err(Error::invalid(format!("sign of non-finite value {y}")));
    }
    Ok(if y >= 0.0 { 1 } else { -1 })
}

/// Infallible sign used inside the solvers, where inputs are finite by construction.
#[inline]
pub(crate) fn sign_f64(y: f64) -> f64 {
    if y >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// The payload a sensor transmits for one window.
#[derive(Debug, Clone, PartialEq)]
pub struct SignMeasurements {
    b: Vec<i8>,
    norm_x: f32,
    n: usize,
    seed: u64,
    source_id: Option<String>,
}

impl SignMeasurements {
    pub fn new(
        b: Vec<i8>,
        norm_x: f32,
        n: usize,
        seed: u64,
        source_id: Option<String>,
    ) -> Result<Self> {
        if b.is_empty() || n == 0 {
            return Err(Error::invalid(
                "empty measurement vector or zero signal length",
            ));
        }
        if let Some(pos) = b.iter().position(|&v| v != 1 && v != -1) {
            return Err(Error::invalid(format!(
                "measurement {pos} is {} (expected ±1)",
                b[pos]
            )));
        }
        if !(norm_x.is_finite() && norm_x >= 0.0) {
            return Err(Error::invalid(format!(
                "norm side channel must be finite and ≥ 0, got {norm_x}"
            )));
        }
        Ok(Self {
            b,
            norm_x,
            n,
            seed,
            source_id,
        })
    }

    pub fn with_source_id(mut self, source_id: impl Into<String>) -> Self {
        self.source_id = Some(source_id.into());
        self
    }

    /// Signs, each exactly `+1` or `-1`.
    pub fn b(&self) -> &[i8] {
        &self.b
    }

    /// `‖x‖₂` at single precision, as transmitted.
    pub fn norm_x(&self) -> f32 {
        self.norm_x
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source_id(&self) -> Option<&str> {
        self.source_id.as_deref()
    }

    /// Signs as `f64`, the form the solvers consume.
    pub fn signs_f64(&self) -> Vec<f64> {
        self.b.iter().map(|&v| f64::from(v)).collect()
    }
}

/// Encodes one reading window against the ensemble's `Φ` directly (no `Ψ` needed).
pub fn encode(x: ArrayView1<'_, f64>, ensemble: &SensingEnsemble) -> Result<SignMeasurements> {
    if x.len() != ensemble.n() {
        return Err(Error::invalid(format!(
            "reading has length {} but ensemble expects {}",
            x.len(),
            ensemble.n()
        )));
    }
    if let Some(pos) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("reading {pos} is not finite")));
    }
    let projections = ensemble.phi().dot(&x);
    let b = projections
        .iter()
        .map(|&y| sign_fn(y))
        .collect::<Result<Vec<_>>>()?;

    let norm = x.dot(&x).sqrt();
    let mut norm_x = norm as f32;
    if !norm_x.is_finite() {
        return Err(Error::invalid(format!(
            "reading norm {norm} overflows single precision"
        )));
    }
    if norm > 0.0 && norm_x == 0.0 {
        // keep "zero norm iff zero reading"
        norm_x = f32::from_bits(1);
    }
    SignMeasurements::new(b, norm_x, ensemble.n(), ensemble.seed(), None)
}
