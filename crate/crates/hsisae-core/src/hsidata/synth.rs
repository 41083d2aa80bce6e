//! Synthetic hyperspectral scenes for desk-scale experiments.

use serde::{Deserialize, Serialize};

use super::{GroundTruth, HsiCube};
use crate::error::{Error, Result};
use crate::numkit::{mix_seed, Rng};

/// Scale of the spatially correlated brightness nuisance relative to sigma.
const BRIGHTNESS_COUPLING: f64 = 1.0;

/// Parameters of a generated scene.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    /// Number of classes C >= 2.
    pub classes: u16,
    /// Smoothing passes applied to each class mean spectrum.
    pub smoothness: u32,
    /// Standard deviation of the per-value Gaussian noise.
    pub sigma: f64,
    /// Pixel pitch of the low-frequency fields that shape label blobs.
    pub blob_scale: usize,
    /// Fraction of pixels that receive a ground-truth label.
    pub labeled_fraction: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.bands == 0 {
            return Err(Error::Contract(format!(
                "scene dimensions must be positive, got {}x{}x{}",
                self.width, self.height, self.bands
            )));
        }
        if self.classes < 2 {
            return Err(Error::Contract(format!(
                "need at least 2 classes, got {}",
                self.classes
            )));
        }
        if self.sigma < 0.0 {
            return Err(Error::Contract(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        if self.blob_scale == 0 {
            return Err(Error::Contract("blob_scale must be positive".into()));
        }
        if !(self.labeled_fraction.is_finite()
            && 0.0 < self.labeled_fraction
            && self.labeled_fraction <= 1.0)
        {
            return Err(Error::Contract(format!(
                "labeled_fraction must be in (0, 1], got {}",
                self.labeled_fraction
            )));
        }
        if (self.classes as usize) > self.width * self.height {
            return Err(Error::Contract(format!(
                "{} classes cannot fit in {} pixels",
                self.classes,
                self.width * self.height
            )));
        }
        Ok(())
    }
}

/// Generate a scene: spatially contiguous class blobs, one smooth mean
/// spectrum per class, i.i.d. Gaussian noise of scale sigma, and a spatially
/// correlated brightness offset (also scaled by sigma) shared by all bands
/// of a pixel. With sigma = 0 every spectrum equals its class mean exactly.
pub fn synth_scene(spec: &SynthSpec) -> Result<(HsiCube, GroundTruth)> {
    spec.validate()?;
    let (w, h, b) = (spec.width, spec.height, spec.bands);
    let n = w * h;
    let c = spec.classes as usize;

    // Low-frequency field thresholded by rank into C equal-area regions.
    let label_field = smooth_field(w, h, spec.blob_scale, &mut Rng::new(mix_seed(spec.seed, 1)));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| label_field[i].partial_cmp(&label_field[j]).unwrap());
    let mut class_of = vec![0u16; n];
    for (rank, &pix) in order.iter().enumerate() {
        class_of[pix] = (rank * c / n) as u16 + 1;
    }

    let means = class_means(c, b, spec.smoothness, &mut Rng::new(mix_seed(spec.seed, 2)));

    let brightness = smooth_field(w, h, spec.blob_scale, &mut Rng::new(mix_seed(spec.seed, 3)));
    let mut noise_rng = Rng::new(mix_seed(spec.seed, 4));

    let mut data = vec![0.0f64; n * b];
    for pix in 0..n {
        let class = class_of[pix] as usize - 1;
        let offset = spec.sigma * BRIGHTNESS_COUPLING * (brightness[pix] - 0.5) * 2.0;
        for band in 0..b {
            let noise = if spec.sigma > 0.0 {
                spec.sigma * noise_rng.normal()
            } else {
                0.0
            };
            data[band * n + pix] = means[class][band] + noise + offset;
        }
    }

    // Label exactly round(fraction * n) pixels, chosen by a seeded shuffle.
    let n_labeled = ((spec.labeled_fraction * n as f64).round() as usize).clamp(1, n);
    let mut pix_order: Vec<usize> = (0..n).collect();
    Rng::new(mix_seed(spec.seed, 5)).shuffle(&mut pix_order);
    let mut labels = vec![0u16; n];
    for &pix in pix_order.iter().take(n_labeled) {
        labels[pix] = class_of[pix];
    }

    let cube = HsiCube::new(w, h, b, data)?;
    let gt = GroundTruth::new(w, h, labels)?;
    Ok((cube, gt))
}

/// The class map before the labeled-fraction mask is applied (all pixels).
pub fn synth_full_classes(spec: &SynthSpec) -> Result<Vec<u16>> {
    spec.validate()?;
    let n = spec.width * spec.height;
    let c = spec.classes as usize;
    let field = smooth_field(
        spec.width,
        spec.height,
        spec.blob_scale,
        &mut Rng::new(mix_seed(spec.seed, 1)),
    );
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| field[i].partial_cmp(&field[j]).unwrap());
    let mut class_of = vec![0u16; n];
    for (rank, &pix) in order.iter().enumerate() {
        class_of[pix] = (rank * c / n) as u16 + 1;
    }
    Ok(class_of)
}

/// Bilinear interpolation of a coarse random grid: values in [0, 1),
/// smooth over distances below `cell` pixels.
fn smooth_field(w: usize, h: usize, cell: usize, rng: &mut Rng) -> Vec<f64> {
    let nx = w.div_ceil(cell) + 2;
    let ny = h.div_ceil(cell) + 2;
    let coarse: Vec<f64> = (0..nx * ny).map(|_| rng.next_f64()).collect();
    let mut field = vec![0.0; w * h];
    for row in 0..h {
        let v = row as f64 / cell as f64;
        let j0 = v.floor() as usize;
        let fv = v - j0 as f64;
        for col in 0..w {
            let u = col as f64 / cell as f64;
            let i0 = u.floor() as usize;
            let fu = u - i0 as f64;
            let g = |i: usize, j: usize| coarse[j * nx + i];
            let top = g(i0, j0) * (1.0 - fu) + g(i0 + 1, j0) * fu;
            let bot = g(i0, j0 + 1) * (1.0 - fu) + g(i0 + 1, j0 + 1) * fu;
            field[row * w + col] = top * (1.0 - fv) + bot * fv;
        }
    }
    field
}

/// One smooth spectrum per class: band-wise uniform noise in [0.25, 0.75]
/// run through `smoothness` passes of a 1-2-1 moving average.
fn class_means(c: usize, bands: usize, smoothness: u32, rng: &mut Rng) -> Vec<Vec<f64>> {
    (0..c)
        .map(|_| {
            let mut mean: Vec<f64> = (0..bands).map(|_| 0.25 + 0.5 * rng.next_f64()).collect();
            for _ in 0..smoothness {
                let prev = mean.clone();
                for i in 0..bands {
                    let lo = prev[i.saturating_sub(1)];
                    let hi = prev[(i + 1).min(bands - 1)];
                    mean[i] = 0.25 * lo + 0.5 * prev[i] + 0.25 * hi;
                }
            }
            mean
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> SynthSpec {
        SynthSpec {
            width: 16,
            height: 12,
            bands: 8,
            classes: 3,
            smoothness: 4,
            sigma: 0.1,
            blob_scale: 4,
            labeled_fraction: 0.5,
            seed: 21,
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (c1, g1) = synth_scene(&spec()).unwrap();
        let (c2, g2) = synth_scene(&spec()).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(g1, g2);
    }

    #[test]
    fn noiseless_scene_hits_class_means_exactly() {
        let mut s = spec();
        s.sigma = 0.0;
        s.classes = 2;
        s.labeled_fraction = 1.0;
        let (cube, gt) = synth_scene(&s).unwrap();
        // Collect the distinct spectra; every pixel must equal one of two.
        let mut distinct: Vec<Vec<f64>> = Vec::new();
        for row in 0..s.height {
            for col in 0..s.width {
                let spec_vec = cube.spectrum(row, col);
                if !distinct.contains(&spec_vec) {
                    distinct.push(spec_vec);
                }
            }
        }
        assert_eq!(distinct.len(), 2);
        assert!(gt.labels().iter().all(|&l| l == 1 || l == 2));
    }

    #[test]
    fn noiseless_nearest_mean_classifies_perfectly() {
        // Brute-force nearest-centroid oracle on a sigma = 0 scene.
        let mut s = spec();
        s.sigma = 0.0;
        let (cube, gt) = synth_scene(&s).unwrap();
        // Recover centroids from labeled pixels.
        let c = s.classes as usize;
        let mut sums = vec![vec![0.0; s.bands]; c];
        let mut counts = vec![0usize; c];
        for (row, col) in gt.labeled_coords() {
            let class = gt.label(row, col) as usize - 1;
            for (i, v) in cube.spectrum(row, col).into_iter().enumerate() {
                sums[class][i] += v;
            }
            counts[class] += 1;
        }
        for (s_, n) in sums.iter_mut().zip(&counts) {
            assert!(*n > 0);
            for v in s_.iter_mut() {
                *v /= *n as f64;
            }
        }
        for (row, col) in gt.labeled_coords() {
            let x = cube.spectrum(row, col);
            let mut best = (f64::INFINITY, 0usize);
            for (k, centroid) in sums.iter().enumerate() {
                let d: f64 = x
                    .iter()
                    .zip(centroid)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                if d < best.0 {
                    best = (d, k);
                }
            }
            assert_eq!(best.1 as u16 + 1, gt.label(row, col));
        }
    }

    #[test]
    fn labeled_fraction_matches_within_one_pixel() {
        for frac in [0.1, 0.33, 0.75, 1.0] {
            let mut s = spec();
            s.labeled_fraction = frac;
            let (_, gt) = synth_scene(&s).unwrap();
            let labeled = gt.labels().iter().filter(|&&l| l > 0).count() as f64;
            let want = frac * (s.width * s.height) as f64;
            assert!((labeled - want).abs() <= 1.0, "frac {frac}: {labeled} vs {want}");
        }
    }

    #[test]
    fn classes_form_contiguous_range() {
        let (_, gt) = synth_scene(&spec()).unwrap();
        let c = gt.num_classes();
        assert_eq!(c, 3);
        for class in 1..=c {
            assert!(gt.labels().iter().any(|&l| l == class));
        }
    }

    #[test]
    fn blobs_are_spatially_coherent() {
        // Most 4-neighbor pairs should share a class when blobs are larger
        // than a pixel.
        let mut s = spec();
        s.width = 40;
        s.height = 40;
        s.blob_scale = 8;
        let classes = synth_full_classes(&s).unwrap();
        let mut same = 0usize;
        let mut total = 0usize;
        for row in 0..s.height {
            for col in 0..s.width.saturating_sub(1) {
                total += 1;
                if classes[row * s.width + col] == classes[row * s.width + col + 1] {
                    same += 1;
                }
            }
        }
        assert!(same as f64 / total as f64 > 0.8, "coherence {}", same as f64 / total as f64);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = spec();
        s.classes = 1;
        assert!(synth_scene(&s).is_err());
        let mut s = spec();
        s.sigma = -0.1;
        assert!(synth_scene(&s).is_err());
        let mut s = spec();
        s.labeled_fraction = 0.0;
        assert!(synth_scene(&s).is_err());
    }
}
