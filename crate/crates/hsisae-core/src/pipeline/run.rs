//! End-to-end experiment execution.
//!
//! Every scheme follows the same skeleton: load or synthesize the scene,
//! min-max normalize per band, stratified-split the labeled pixels, build
//! features, train on the train side only, predict, score. Training stages
//! never see test labels; PCA and normalization use scene-wide unlabeled
//! statistics only.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{DataSource, ExperimentConfig, Scheme};
use super::metrics::{compute_metrics, Metrics};
use crate::autoenc::{ae_init, sgd_train, AeHyper};
use crate::deepstack::{finetune, predict, pretrain_stack, SoftmaxHead};
use crate::error::{Error, Result};
use crate::hsidata::{load_cube, load_labels_csv, load_labels_pgm, stratified_split, synth_scene,
                     GroundTruth, HsiCube};
use crate::linsvm::{svm_predict, svm_train};
use crate::numkit::{mix_seed, Matrix};
use crate::specspatial::{build_spatial_dataset, pca_fit, pca_project};

/// Everything a finished run reports. Identical configurations produce
/// identical reports except for `wall_clock_seconds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scheme: Scheme,
    /// The fully resolved configuration this run used.
    pub config: ExperimentConfig,
    pub n_classes: u16,
    pub n_train: usize,
    pub n_test: usize,
    /// PCA components actually kept, for the schemes that use PCA.
    pub pca_components_used: Option<usize>,
    #[serde(flatten)]
    pub metrics: Metrics,
    pub wall_clock_seconds: f64,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::data("report", e.to_string()))
    }

    /// Equality ignoring the wall clock.
    pub fn same_results(&self, other: &Report) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.wall_clock_seconds = 0.0;
        b.wall_clock_seconds = 0.0;
        a == b
    }
}

/// A run's report plus what map rendering needs: the ground truth and the
/// full-scene prediction grid (row-major, 0 where unlabeled).
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: Report,
    pub ground_truth: GroundTruth,
    pub predictions: Vec<u16>,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Load the configured data source. Ground-truth paths ending in `.csv`
/// parse as `row,col,label` lists sized to the cube.
pub fn load_data(source: &DataSource) -> Result<(HsiCube, GroundTruth)> {
    match source {
        DataSource::Synth(spec) => synth_scene(spec),
        DataSource::Files { cube, gt } => {
            let (cube, _) = load_cube(std::path::Path::new(cube))?;
            let gt_path = std::path::Path::new(gt);
            let gt = if gt.to_ascii_lowercase().ends_with(".csv") {
                load_labels_csv(gt_path, cube.width(), cube.height())?
            } else {
                load_labels_pgm(gt_path)?
            };
            if gt.width() != cube.width() || gt.height() != cube.height() {
                return Err(Error::data(
                    gt_path.display().to_string(),
                    format!(
                        "ground truth {}x{} does not match cube {}x{}",
                        gt.width(),
                        gt.height(),
                        cube.width(),
                        cube.height()
                    ),
                ));
            }
            Ok((cube, gt))
        }
    }
}

fn spectra_rows(cube: &HsiCube, coords: &[(usize, usize)]) -> Matrix {
    let bands = cube.bands();
    let mut data = Vec::with_capacity(coords.len() * bands);
    for &(row, col) in coords {
        data.extend(cube.spectrum(row, col));
    }
    Matrix::from_vec(coords.len(), bands, data)
}

fn labels_at(gt: &GroundTruth, coords: &[(usize, usize)]) -> Vec<u16> {
    coords.iter().map(|&(r, c)| gt.label(r, c)).collect()
}

/// Smallest component count whose eigenvalues explain `fraction` of the
/// total variance.
fn components_for_variance(eigenvalues: &[f64], fraction: f64) -> usize {
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return 1;
    }
    let mut acc = 0.0;
    for (i, &l) in eigenvalues.iter().enumerate() {
        acc += l;
        if acc >= fraction * total {
            return i + 1;
        }
    }
    eigenvalues.len()
}

/// Run one experiment end to end.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutput> {
    let started = Instant::now();
    config.validate()?;

    let (cube, gt) = stage("data", load_data(&config.data))?;
    let cube = cube.normalize_bands();
    let split = stage(
        "split",
        stratified_split(&gt, config.split.train_fraction, config.split.seed),
    )?;
    let n_classes = gt.num_classes();
    let y_train = labels_at(&gt, &split.train);
    let y_test = labels_at(&gt, &split.test);

    let mut resolved = config.clone();
    let mut pca_components_used = None;

    let (pred_train, pred_test) = match config.scheme {
        Scheme::Svm => {
            let x_train = spectra_rows(&cube, &split.train);
            let x_test = spectra_rows(&cube, &split.test);
            let model = stage("svm-train", svm_train(&x_train, &y_train, &config.svm))?;
            (
                stage("predict", svm_predict(&model, &x_train))?,
                stage("predict", svm_predict(&model, &x_test))?,
            )
        }
        Scheme::PcaSvm => {
            // PCA over the whole scene, labeled or not.
            let full = stage("pca", pca_fit(&cube, cube.bands()))?;
            let k = config
                .pca_components
                .unwrap_or_else(|| components_for_variance(full.eigenvalues(), 0.999));
            let pca = stage("pca", full.truncate(k))?;
            pca_components_used = Some(k);
            let project = |coords: &[(usize, usize)]| -> Result<Matrix> {
                let mut data = Vec::with_capacity(coords.len() * k);
                for &(row, col) in coords {
                    data.extend(pca_project(&pca, &cube.spectrum(row, col))?);
                }
                Ok(Matrix::from_vec(coords.len(), k, data))
            };
            let x_train = stage("pca", project(&split.train))?;
            let x_test = stage("pca", project(&split.test))?;
            let model = stage("svm-train", svm_train(&x_train, &y_train, &config.svm))?;
            (
                stage("predict", svm_predict(&model, &x_train))?,
                stage("predict", svm_predict(&model, &x_test))?,
            )
        }
        Scheme::AeSvm => {
            let x_train = spectra_rows(&cube, &split.train);
            let x_test = spectra_rows(&cube, &split.test);
            let hidden = config.hidden_sizes[0];
            let init = stage("pretrain", ae_init(cube.bands(), hidden, config.ae.seed))?;
            let (ae, _) = stage("pretrain", sgd_train(init, &x_train, &config.ae))?;
            // Frozen hidden representations feed the SVM.
            let encode = |x: &Matrix| -> Result<Matrix> {
                let mut net = x.matmul(ae.weights())?;
                net.add_row_broadcast(ae.hidden_bias());
                Ok(net.map(crate::numkit::sigmoid))
            };
            let h_train = stage("encode", encode(&x_train))?;
            let h_test = stage("encode", encode(&x_test))?;
            let model = stage("svm-train", svm_train(&h_train, &y_train, &config.svm))?;
            (
                stage("predict", svm_predict(&model, &h_train))?,
                stage("predict", svm_predict(&model, &h_test))?,
            )
        }
        Scheme::SaeLr => {
            let x_train = spectra_rows(&cube, &split.train);
            let x_test = spectra_rows(&cube, &split.test);
            run_deep(config, &x_train, &y_train, &x_test, n_classes)?
        }
        Scheme::SsaeLr => {
            let k = config.pca_components.unwrap_or(3);
            resolved.pca_components = Some(k);
            pca_components_used = Some(k);
            let pca = stage("pca", pca_fit(&cube, k))?;
            let ds = stage(
                "features",
                build_spatial_dataset(&cube, &gt, &pca, &split, &config.patch),
            )?;
            run_deep(config, &ds.x_train, &y_train, &ds.x_test, n_classes)?
        }
    };

    if config.scheme == Scheme::PcaSvm {
        resolved.pca_components = pca_components_used;
    }

    let metrics = stage("metrics", compute_metrics(&y_test, &pred_test, n_classes))?;

    let mut predictions = vec![0u16; gt.width() * gt.height()];
    for (coords, preds) in [(&split.train, &pred_train), (&split.test, &pred_test)] {
        for (&(row, col), &p) in coords.iter().zip(preds) {
            predictions[row * gt.width() + col] = p;
        }
    }

    Ok(RunOutput {
        report: Report {
            scheme: config.scheme,
            config: resolved,
            n_classes,
            n_train: split.train.len(),
            n_test: split.test.len(),
            pca_components_used,
            metrics,
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
        ground_truth: gt,
        predictions,
    })
}

/// Shared SAE-LR path: pretrain on the train rows, attach a zero head,
/// fine-tune, predict both sides.
fn run_deep(
    config: &ExperimentConfig,
    x_train: &Matrix,
    y_train: &[u16],
    x_test: &Matrix,
    n_classes: u16,
) -> Result<(Vec<u16>, Vec<u16>)> {
    let mut sizes = Vec::with_capacity(config.hidden_sizes.len() + 1);
    sizes.push(x_train.cols());
    sizes.extend_from_slice(&config.hidden_sizes);
    // One hyper set per layer, seeds separated per depth.
    let hypers: Vec<AeHyper> = (0..config.hidden_sizes.len())
        .map(|i| AeHyper {
            seed: mix_seed(config.ae.seed, i as u64),
            ..config.ae.clone()
        })
        .collect();
    let model = stage("pretrain", pretrain_stack(&sizes, x_train, &hypers))?;
    let head = SoftmaxHead::zeros(*sizes.last().unwrap(), n_classes as usize);
    let model = stage("finetune", model.with_head(head))?;
    let (model, _) = stage(
        "finetune",
        finetune(model, x_train, y_train, &config.finetune),
    )?;
    Ok((
        stage("predict", predict(&model, x_train))?,
        stage("predict", predict(&model, x_test))?,
    ))
}
