//! Classification-map rendering as binary PPM (P6).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hsidata::GroundTruth;

/// Built-in class palette: classes 1..=16 in order; higher classes wrap
/// around. Class 0 (unlabeled) renders black.
pub const CLASS_PALETTE: [[u8; 3]; 16] = [
    [230, 25, 75],   // 1  red
    [60, 180, 75],   // 2  green
    [255, 225, 25],  // 3  yellow
    [67, 99, 216],   // 4  blue
    [245, 130, 49],  // 5  orange
    [145, 30, 180],  // 6  purple
    [70, 240, 240],  // 7  cyan
    [240, 50, 230],  // 8  magenta
    [188, 246, 12],  // 9  lime
    [250, 190, 190], // 10 pink
    [0, 128, 128],   // 11 teal
    [230, 190, 255], // 12 lavender
    [154, 99, 36],   // 13 brown
    [255, 250, 200], // 14 beige
    [128, 0, 0],     // 15 maroon
    [170, 255, 195], // 16 mint
];

/// Color for a class label.
pub fn class_color(label: u16) -> [u8; 3] {
    if label == 0 {
        [0, 0, 0]
    } else {
        CLASS_PALETTE[((label - 1) as usize) % CLASS_PALETTE.len()]
    }
}

/// Render the full-scene predictions (`width * height` entries, row-major,
/// 0 where no prediction exists). Pixels unlabeled in the ground truth
/// render black regardless of the prediction. Output bytes are
/// deterministic.
pub fn render_map(predictions: &[u16], gt: &GroundTruth, path: &Path) -> Result<()> {
    let (w, h) = (gt.width(), gt.height());
    if predictions.len() != w * h {
        return Err(Error::Contract(format!(
            "{} predictions for a {w}x{h} scene",
            predictions.len()
        )));
    }
    let mut bytes = Vec::with_capacity(20 + 3 * w * h);
    bytes.extend_from_slice(format!("P6\n{w} {h}\n255\n").as_bytes());
    for (i, &pred) in predictions.iter().enumerate() {
        let color = if gt.labels()[i] == 0 {
            [0, 0, 0]
        } else {
            class_color(pred)
        };
        bytes.extend_from_slice(&color);
    }
    fs::write(path, &bytes).map_err(|e| Error::io(path.display().to_string(), e))
}
