//! Beamforming and task-feedback losses, forward evaluation only.
//!
//! | loss | value |
//! |------|-------|
//! | UBB | `λ · MSE(ŷ, y) + (1 − λ) · (1 − MS-SSIM(ŷ, y))` |
//! | feedback | `CE(z(ŷ), ℓ) + CE(z(y), ℓ)` |
//! | JBC | `γ · UBB + feedback` |
//! | CDCB | `UBB + CE(ẑ, ℓ)` |
//!
//! Classifier outputs are supplied as logits by the caller.

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::ssim::{ms_ssim_loss, MsSsimParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossParams {
    pub lambda: f64,
    pub gamma: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        LossParams {
            lambda: 0.8,
            gamma: 100.0,
        }
    }
}

impl LossParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::param("lambda must be in [0, 1]"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma must be non-negative"));
        }
        Ok(())
    }
}

/// Mean squared error over all pixels.
pub fn mse(yhat: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Result<f64> {
    if yhat.dim() != y.dim() {
        return Err(Error::Shape {
            expected: y.shape().to_vec(),
            got: yhat.shape().to_vec(),
        });
    }
    let n = y.len();
    if n == 0 {
        return Err(Error::param("empty image"));
    }
    let sum: f64 = yhat.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sum / n as f64)
}

pub fn ubb_loss(
    yhat: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    lp: &LossParams,
    mp: &MsSsimParams,
) -> Result<f64> {
    lp.validate()?;
    let mse = mse(yhat, y)?;
    let structural = ms_ssim_loss(yhat, y, mp)?;
    Ok(lp.lambda * mse + (1.0 - lp.lambda) * structural)
}

/// `−log softmax(logits)[label]`, evaluated with log-sum-exp.
pub fn cross_entropy(logits: &[f64], label: usize) -> Result<f64> {
    if logits.len() < 2 {
        return Err(Error::param("cross-entropy needs at least two classes"));
    }
    if logits.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("non-finite logits"));
    }
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            classes: logits.len(),
        });
    }
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    Ok(lse - logits[label])
}

pub fn feedback_loss(logits_yhat: &[f64], logits_y: &[f64], label: usize) -> Result<f64> {
    if logits_yhat.len() != logits_y.len() {
        return Err(Error::param(format!(
            "class count mismatch: {} vs {}",
            logits_yhat.len(),
            logits_y.len()
        )));
    }
    Ok(cross_entropy(logits_yhat, label)? + cross_entropy(logits_y, label)?)
}

#[allow(clippy::too_many_arguments)]
pub fn jbc_loss(
    yhat: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    logits_yhat: &[f64],
    logits_y: &[f64],
    label: usize,
    lp: &LossParams,
    mp: &MsSsimParams,
) -> Result<f64> {
    let ubb = ubb_loss(yhat, y, lp, mp)?;
    Ok(lp.gamma * ubb + feedback_loss(logits_yhat, logits_y, label)?)
}

pub fn cdcb_loss(
    yhat: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    logits: &[f64],
    label: usize,
    lp: &LossParams,
    mp: &MsSsimParams,
) -> Result<f64> {
    Ok(ubb_loss(yhat, y, lp, mp)? + cross_entropy(logits, label)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn cross_entropy_values() {
        assert!((cross_entropy(&[0.0, 0.0], 0).unwrap() - LN_2).abs() < 1e-15);
        assert!((cross_entropy(&[0.0, 0.0], 1).unwrap() - LN_2).abs() < 1e-15);
        assert!(cross_entropy(&[30.0, -30.0], 0).unwrap() < 1e-9);
        let a = cross_entropy(&[1.0, -2.0, 0.5], 2).unwrap();
        let b = cross_entropy(&[101.0, 98.0, 100.5], 2).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn cross_entropy_errors() {
        assert!(matches!(cross_entropy(&[0.0, 1.0], 2), Err(Error::LabelOutOfRange { .. })));
        assert!(cross_entropy(&[0.0], 0).is_err());
        assert!(cross_entropy(&[0.0, f64::NAN], 0).is_err());
        assert!(feedback_loss(&[0.0, 0.0], &[0.0, 0.0, 0.0], 0).is_err());
    }

    #[test]
    fn feedback_of_uniform_logits() {
        assert!((feedback_loss(&[0.0, 0.0], &[0.0, 0.0], 0).unwrap() - 2.0 * LN_2).abs() < 1e-15);
    }

    #[test]
    fn lambda_range() {
        assert!(LossParams { lambda: 1.1, gamma: 1.0 }.validate().is_err());
        assert!(LossParams { lambda: 0.5, gamma: -1.0 }.validate().is_err());
        assert!(LossParams { lambda: 0.5, gamma: 0.0 }.validate().is_ok());
    }
}
