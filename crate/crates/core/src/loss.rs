//! Per-cell adversarial loss against a domain label map, and the combined
//! detection + adversarial objective.
//!
//! The adversarial loss is the binary cross-entropy of the discriminator's
//! per-cell probability `p` (probability of "target") against the cell label
//! `d`, summed over cells with natural logarithms:
//! `-Σ [d ln p + (1 - d) ln(1 - p)]`.
//!
//! Sign convention: the returned gradient is `∂loss/∂p`. A discriminator that
//! learns to tell domains apart descends it; the feature extractor is trained
//! against it (gradient reversal), which is the consumer's job.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::labels::DomainLabelMap;

/// Predictions are clamped to `[EPSILON, 1 - EPSILON]` so the loss stays finite.
pub const EPSILON: f64 = 1e-7;

/// Weight of the adversarial term.
pub const DEFAULT_LAMBDA: f64 = 0.1;

/// Discriminator sigmoid outputs, row-major, clamped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedDomainMap {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl PredictedDomainMap {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                pred_rows: values.len() / cols.max(1),
                pred_cols: cols,
                label_rows: rows,
                label_cols: cols,
            });
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::InvalidPrediction(i));
        }
        let values = values.into_iter().map(|v| v.clamp(EPSILON, 1.0 - EPSILON)).collect();
        Ok(Self { rows, cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Sum,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialLoss {
    pub loss: f64,
    /// `∂loss/∂p` per cell, row-major.
    pub grad: Vec<f64>,
}

/// Summed adversarial loss and its gradient.
pub fn adversarial_loss(pred: &PredictedDomainMap, labels: &DomainLabelMap) -> Result<AdversarialLoss> {
    adversarial_loss_with(pred, labels, Reduction::Sum)
}

pub fn adversarial_loss_with(
    pred: &PredictedDomainMap,
    labels: &DomainLabelMap,
    reduction: Reduction,
) -> Result<AdversarialLoss> {
    if pred.rows != labels.rows() || pred.cols != labels.cols() {
        return Err(Error::ShapeMismatch {
            pred_rows: pred.rows,
            pred_cols: pred.cols,
            label_rows: labels.rows(),
            label_cols: labels.cols(),
        });
    }
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(pred.values.len());
    for (&p, d) in pred.values.iter().zip(labels.labels()) {
        if d == 1 {
            loss -= libm::log(p);
            grad.push(-1.0 / p);
        } else {
            loss -= libm::log(1.0 - p);
            grad.push(1.0 / (1.0 - p));
        }
    }
    if reduction == Reduction::Mean && !grad.is_empty() {
        let n = grad.len() as f64;
        loss /= n;
        grad.iter_mut().for_each(|g| *g /= n);
    }
    Ok(AdversarialLoss { loss, grad })
}

/// Terms of the combined objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    pub det_source: f64,
    pub det_target: f64,
    pub adv_source: f64,
    pub adv_target: f64,
    pub lambda_adv: f64,
    pub total: f64,
}

/// `det_source + det_target + lambda_adv * (adv_source + adv_target)`.
pub fn total_loss(
    det_source: f64,
    det_target: f64,
    adv_source: f64,
    adv_target: f64,
    lambda_adv: f64,
) -> Result<LossBreakdown> {
    if lambda_adv.is_nan() || lambda_adv < 0.0 {
        return Err(Error::NegativeLambda(lambda_adv));
    }
    Ok(LossBreakdown {
        det_source,
        det_target,
        adv_source,
        adv_target,
        lambda_adv,
        total: det_source + det_target + lambda_adv * (adv_source + adv_target),
    })
}
