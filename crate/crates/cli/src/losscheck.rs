//! Evaluates the adversarial loss for a stored prediction and label map.
//!
//! Predictions are JSON, `{"rows": R, "cols": C, "values": [...]}` in
//! row-major order; labels are a label-map PGM of the same cell shape.

use std::fs;
use std::path::Path;

use ocdc_core::loss::{adversarial_loss_with, Reduction};
use ocdc_core::{Domain, DomainLabelMap, ImageSize, PredictedDomainMap};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageio::decode_label_map;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictionFile {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub rows: usize,
    pub cols: usize,
    pub reduction: &'static str,
    pub loss: f64,
    pub grad: Vec<f64>,
}

pub fn run_loss_check(prediction: &Path, labels: &Path, reduction: Reduction) -> Result<LossReport> {
    let text = fs::read_to_string(prediction).map_err(|e| Error::io(prediction, e))?;
    let pred: PredictionFile =
        serde_json::from_str(&text).map_err(|e| Error::format(prediction, format!("malformed prediction: {e}")))?;
    let map = read_cell_map(labels, pred.rows, pred.cols)?;
    let pred = PredictedDomainMap::new(pred.rows, pred.cols, pred.values)?;
    let out = adversarial_loss_with(&pred, &map, reduction)?;
    Ok(LossReport {
        rows: pred.rows(),
        cols: pred.cols(),
        reduction: match reduction {
            Reduction::Sum => "sum",
            Reduction::Mean => "mean",
        },
        loss: out.loss,
        grad: out.grad,
    })
}

/// Label map read cell-for-cell: one pixel per cell at stride 1.
fn read_cell_map(path: &Path, rows: usize, cols: usize) -> Result<DomainLabelMap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let pgm = crate::imageio::decode_pgm(&bytes).map_err(|e| Error::format(path, e))?;
    if (pgm.height, pgm.width) != (rows, cols) {
        return Err(Error::Core(ocdc_core::Error::ShapeMismatch {
            pred_rows: rows,
            pred_cols: cols,
            label_rows: pgm.height,
            label_cols: pgm.width,
        }));
    }
    let size = ImageSize::new(cols as u32, rows as u32)?;
    decode_label_map(&bytes, Domain::Source, size, 1).map_err(|e| Error::format(path, e))
}
