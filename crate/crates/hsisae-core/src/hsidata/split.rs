//! Ground-truth labels and stratified train/test splitting.

use crate::error::{Error, Result};
use crate::numkit::Rng;

/// Per-pixel class labels paired with a cube: 0 = unlabeled, 1..=C = classes.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    labels: Vec<u16>,
}

impl GroundTruth {
    pub fn new(width: usize, height: usize, labels: Vec<u16>) -> Result<GroundTruth> {
        if labels.len() != width * height {
            return Err(Error::Contract(format!(
                "label map holds {} entries but {width}x{height} needs {}",
                labels.len(),
                width * height
            )));
        }
        Ok(GroundTruth {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, row: usize, col: usize) -> u16 {
        self.labels[row * self.width + col]
    }

    /// Highest class index present (0 when nothing is labeled).
    pub fn num_classes(&self) -> u16 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    /// Count of labeled pixels per class, indexed by `class - 1`.
    pub fn class_counts(&self) -> Vec<usize> {
        let c = self.num_classes() as usize;
        let mut counts = vec![0usize; c];
        for &l in &self.labels {
            if l > 0 {
                counts[l as usize - 1] += 1;
            }
        }
        counts
    }

    /// All labeled pixel coordinates in row-major scan order.
    pub fn labeled_coords(&self) -> Vec<(usize, usize)> {
        let mut coords = Vec::new();
        for row in 0..self.height {
            for col in 0..self.width {
                if self.label(row, col) > 0 {
                    coords.push((row, col));
                }
            }
        }
        coords
    }
}

/// A disjoint train/test partition of all labeled pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitIndex {
    pub train: Vec<(usize, usize)>,
    pub test: Vec<(usize, usize)>,
    pub seed: u64,
}

/// Stratified split: per class, a seeded shuffle sends ceil(fraction * n)
/// pixels to the train side (capped at n-1 when the class has at least two
/// members, so both sides see every class). Unlabeled pixels appear in
/// neither side.
pub fn stratified_split(gt: &GroundTruth, train_fraction: f64, seed: u64) -> Result<SplitIndex> {
    if !(train_fraction.is_finite() && 0.0 < train_fraction && train_fraction < 1.0) {
        return Err(Error::Contract(format!(
            "train_fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let c = gt.num_classes();
    if c == 0 {
        return Err(Error::Contract(
            "ground truth has no labeled pixels".into(),
        ));
    }
    let mut per_class: Vec<Vec<(usize, usize)>> = vec![Vec::new(); c as usize];
    for row in 0..gt.height() {
        for col in 0..gt.width() {
            let l = gt.label(row, col);
            if l > 0 {
                per_class[l as usize - 1].push((row, col));
            }
        }
    }
    for (i, coords) in per_class.iter().enumerate() {
        if coords.is_empty() {
            return Err(Error::Contract(format!(
                "class {} has no labeled pixels but classes must cover 1..={c}",
                i + 1
            )));
        }
    }

    let mut rng = Rng::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for coords in per_class.iter_mut() {
        rng.shuffle(coords);
        let n = coords.len();
        // The 1e-9 nudge keeps exact products like 0.6 * 5 from ceiling to 4.
        let mut n_train = ((train_fraction * n as f64) - 1e-9).ceil() as usize;
        n_train = n_train.max(1);
        if n >= 2 {
            n_train = n_train.min(n - 1);
        }
        train.extend_from_slice(&coords[..n_train]);
        test.extend_from_slice(&coords[n_train..]);
    }
    Ok(SplitIndex { train, test, seed })
}
