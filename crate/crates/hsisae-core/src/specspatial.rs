//! Spectral-spatial front end: PCA over the spectral dimension, fitted on
//! every pixel of the scene, followed by odd-window neighborhood
//! extraction with clamp-to-edge borders and flattening into
//! classifier-ready rows.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsidata::{GroundTruth, HsiCube, SplitIndex};
use crate::modelio;
use crate::numkit::{sym_eig, Matrix};

/// PCA basis over the spectral dimension.
///
/// Columns of `components` are principal axes in descending eigenvalue
/// order; each column's largest-magnitude entry is positive so the basis is
/// reproducible across platforms.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    mean: Vec<f64>,
    components: Matrix,
    eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn bands(&self) -> usize {
        self.components.rows()
    }

    pub fn k(&self) -> usize {
        self.components.cols()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &Matrix {
        &self.components
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Keep only the first `k` components.
    pub fn truncate(&self, k: usize) -> Result<PcaModel> {
        if k == 0 || k > self.k() {
            return Err(Error::Contract(format!(
                "cannot keep {k} of {} components",
                self.k()
            )));
        }
        let bands = self.bands();
        let mut components = Matrix::zeros(bands, k);
        for i in 0..bands {
            for j in 0..k {
                components.set(i, j, self.components.get(i, j));
            }
        }
        Ok(PcaModel {
            mean: self.mean.clone(),
            components,
            eigenvalues: self.eigenvalues[..k].to_vec(),
        })
    }

    /// Header `{"type":"pca","bands":..,"k":..}` plus payload: mean,
    /// components row-major, eigenvalues.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = format!(
            "{{\"type\":\"pca\",\"bands\":{},\"k\":{}}}",
            self.bands(),
            self.k()
        );
        let mut payload =
            Vec::with_capacity(self.mean.len() + self.components.data().len() + self.k());
        payload.extend_from_slice(&self.mean);
        payload.extend_from_slice(self.components.data());
        payload.extend_from_slice(&self.eigenvalues);
        modelio::write_model(path, header, &payload)
    }

    pub fn load(path: &Path) -> Result<PcaModel> {
        #[derive(Deserialize)]
        struct Header {
            r#type: String,
            bands: usize,
            k: usize,
        }
        let (header, payload): (Header, Vec<f64>) = modelio::read_model(path)?;
        if header.r#type != "pca" {
            return Err(Error::data(
                modelio::path_str(path),
                format!("expected model type \"pca\", got {:?}", header.r#type),
            ));
        }
        let (bands, k) = (header.bands, header.k);
        modelio::expect_len(path, payload.len(), bands + bands * k + k)?;
        Ok(PcaModel {
            mean: payload[..bands].to_vec(),
            components: Matrix::from_vec(bands, k, payload[bands..bands + bands * k].to_vec()),
            eigenvalues: payload[bands + bands * k..].to_vec(),
        })
    }
}

/// Neighborhood window settings: odd width, clamp-to-edge borders,
/// flattened window-row-major with the component index fastest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PatchSpec {
    pub window: usize,
}

impl Default for PatchSpec {
    fn default() -> Self {
        PatchSpec { window: 7 }
    }
}

impl PatchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(Error::Contract(format!(
                "patch window must be odd and positive, got {}",
                self.window
            )));
        }
        Ok(())
    }
}

/// Fit PCA on every pixel of the cube (labeled or not): per-band mean,
/// sample covariance (1/(n-1)) and its top-k eigenpairs.
pub fn pca_fit(cube: &HsiCube, k: usize) -> Result<PcaModel> {
    let bands = cube.bands();
    let n = cube.num_pixels();
    if k == 0 || k > bands {
        return Err(Error::Contract(format!(
            "k must be in 1..={bands}, got {k}"
        )));
    }
    if n < 2 {
        return Err(Error::Contract(
            "PCA needs at least 2 pixels to estimate covariance".into(),
        ));
    }

    let mut mean = vec![0.0; bands];
    for (b, m) in mean.iter_mut().enumerate() {
        *m = cube.band(b).iter().sum::<f64>() / n as f64;
    }

    let mut cov = Matrix::zeros(bands, bands);
    for b1 in 0..bands {
        let band1 = cube.band(b1);
        for b2 in b1..bands {
            let band2 = cube.band(b2);
            let mut acc = 0.0;
            for (&v1, &v2) in band1.iter().zip(band2) {
                acc += (v1 - mean[b1]) * (v2 - mean[b2]);
            }
            let c = acc / (n - 1) as f64;
            cov.set(b1, b2, c);
            cov.set(b2, b1, c);
        }
    }

    let (eigenvalues, vectors) = sym_eig(&cov)?;
    let mut components = Matrix::zeros(bands, k);
    for j in 0..k {
        // Sign convention: the largest-magnitude entry of each column is
        // positive.
        let mut pivot = 0usize;
        for i in 1..bands {
            if vectors.get(i, j).abs() > vectors.get(pivot, j).abs() {
                pivot = i;
            }
        }
        let flip = if vectors.get(pivot, j) < 0.0 { -1.0 } else { 1.0 };
        for i in 0..bands {
            components.set(i, j, flip * vectors.get(i, j));
        }
    }
    // Covariance is PSD; clamp the rounding-level negatives.
    let eigenvalues = eigenvalues[..k]
        .iter()
        .map(|&l| if l < 0.0 { 0.0 } else { l })
        .collect();

    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
    })
}

/// Project one spectrum: components^T (x - mean).
pub fn pca_project(model: &PcaModel, spectrum: &[f64]) -> Result<Vec<f64>> {
    if spectrum.len() != model.bands() {
        return Err(Error::Shape(format!(
            "spectrum has {} bands but the model expects {}",
            spectrum.len(),
            model.bands()
        )));
    }
    let mut out = vec![0.0; model.k()];
    for (i, (&x, &m)) in spectrum.iter().zip(&model.mean).enumerate() {
        let centered = x - m;
        if centered == 0.0 {
            continue;
        }
        for (j, o) in out.iter_mut().enumerate() {
            *o += centered * model.components.get(i, j);
        }
    }
    Ok(out)
}

/// Replace every pixel's spectrum by its k-vector of PCA scores.
pub fn reduce_cube(cube: &HsiCube, model: &PcaModel) -> Result<HsiCube> {
    if cube.bands() != model.bands() {
        return Err(Error::Shape(format!(
            "cube has {} bands but the model expects {}",
            cube.bands(),
            model.bands()
        )));
    }
    let (w, h, k) = (cube.width(), cube.height(), model.k());
    let n = w * h;
    let mut data = vec![0.0; n * k];
    for row in 0..h {
        for col in 0..w {
            let scores = pca_project(model, &cube.spectrum(row, col))?;
            for (j, s) in scores.into_iter().enumerate() {
                data[j * n + row * w + col] = s;
            }
        }
    }
    HsiCube::new(w, h, k, data)
}

/// Flatten the window x window neighborhood of (row, col): window rows
/// outermost, then window columns, then the band/component index fastest.
/// Out-of-image neighbors clamp to the nearest edge pixel.
pub fn extract_patch(
    reduced: &HsiCube,
    row: usize,
    col: usize,
    spec: &PatchSpec,
) -> Result<Vec<f64>> {
    spec.validate()?;
    if row >= reduced.height() || col >= reduced.width() {
        return Err(Error::Contract(format!(
            "center ({row},{col}) outside {}x{} image",
            reduced.height(),
            reduced.width()
        )));
    }
    let half = (spec.window / 2) as isize;
    let k = reduced.bands();
    let mut out = Vec::with_capacity(spec.window * spec.window * k);
    for dr in -half..=half {
        let rr = (row as isize + dr).clamp(0, reduced.height() as isize - 1) as usize;
        for dc in -half..=half {
            let cc = (col as isize + dc).clamp(0, reduced.width() as isize - 1) as usize;
            for comp in 0..k {
                out.push(reduced.value(comp, rr, cc));
            }
        }
    }
    Ok(out)
}

/// Patch datasets for both split sides, rescaled to [0, 1] per feature.
#[derive(Debug, Clone)]
pub struct SpatialDataset {
    pub x_train: Matrix,
    pub y_train: Vec<u16>,
    pub x_test: Matrix,
    pub y_test: Vec<u16>,
}

/// Reduce the cube through the PCA model, extract a flattened patch per
/// split pixel and min-max scale each feature over the training rows
/// (test rows use the training statistics and clamp into [0, 1], since the
/// downstream cross-entropy needs unit-interval inputs).
pub fn build_spatial_dataset(
    cube: &HsiCube,
    gt: &GroundTruth,
    pca: &PcaModel,
    split: &SplitIndex,
    spec: &PatchSpec,
) -> Result<SpatialDataset> {
    spec.validate()?;
    if split.train.is_empty() || split.test.is_empty() {
        return Err(Error::Contract(
            "both split sides must be non-empty".into(),
        ));
    }
    if gt.width() != cube.width() || gt.height() != cube.height() {
        return Err(Error::Shape(format!(
            "ground truth {}x{} does not match cube {}x{}",
            gt.width(),
            gt.height(),
            cube.width(),
            cube.height()
        )));
    }
    let reduced = reduce_cube(cube, pca)?;
    let n_features = spec.window * spec.window * pca.k();

    let gather = |coords: &[(usize, usize)]| -> Result<(Matrix, Vec<u16>)> {
        let mut data = Vec::with_capacity(coords.len() * n_features);
        let mut labels = Vec::with_capacity(coords.len());
        for &(row, col) in coords {
            data.extend_from_slice(&extract_patch(&reduced, row, col, spec)?);
            labels.push(gt.label(row, col));
        }
        Ok((Matrix::from_vec(coords.len(), n_features, data), labels))
    };
    let (mut x_train, y_train) = gather(&split.train)?;
    let (mut x_test, y_test) = gather(&split.test)?;

    // Per-feature min-max from the training rows only.
    let mut lo = vec![f64::INFINITY; n_features];
    let mut hi = vec![f64::NEG_INFINITY; n_features];
    for row in x_train.data().chunks_exact(n_features) {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    let rescale = |m: &mut Matrix| {
        for row in m.data_mut().chunks_exact_mut(n_features) {
            for (j, v) in row.iter_mut().enumerate() {
                *v = if hi[j] > lo[j] {
                    ((*v - lo[j]) / (hi[j] - lo[j])).clamp(0.0, 1.0)
                } else {
                    0.0
                };
            }
        }
    };
    rescale(&mut x_train);
    rescale(&mut x_test);

    Ok(SpatialDataset {
        x_train,
        y_train,
        x_test,
        y_test,
    })
}
