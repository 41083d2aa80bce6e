//! One-vs-rest linear SVM trained by primal subgradient descent.
//!
//! Each class gets a binary scorer minimizing
//! `lambda/2 ||w||^2 + mean(max(0, 1 - s (w.x + b)))` with targets
//! s = +-1, stepped per sample with the decaying rate
//! `eta0 / (1 + t lambda)` over a seeded shuffle. Prediction takes the
//! argmax of the decision values, ties toward the lowest class index.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modelio;
use crate::numkit::{mix_seed, Matrix, Rng};

/// Trained one-vs-rest linear classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvmModel {
    /// One weight row per class, `n_classes x dim`.
    weights: Matrix,
    biases: Vec<f64>,
    lambda: f64,
}

impl LinearSvmModel {
    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn n_classes(&self) -> usize {
        self.weights.rows()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Decision value of one class scorer for a feature row.
    pub fn decision(&self, class_idx: usize, x: &[f64]) -> f64 {
        let w = self.weights.row(class_idx);
        w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.biases[class_idx]
    }

    /// Header `{"type":"linsvm","d":..,"C":..,"lambda":..}` plus payload:
    /// per-class weight rows, then the biases.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = format!(
            "{{\"type\":\"linsvm\",\"d\":{},\"C\":{},\"lambda\":{}}}",
            self.dim(),
            self.n_classes(),
            self.lambda
        );
        let mut payload = Vec::with_capacity(self.weights.data().len() + self.biases.len());
        payload.extend_from_slice(self.weights.data());
        payload.extend_from_slice(&self.biases);
        modelio::write_model(path, header, &payload)
    }

    pub fn load(path: &Path) -> Result<LinearSvmModel> {
        #[derive(Deserialize)]
        struct Header {
            r#type: String,
            d: usize,
            #[serde(rename = "C")]
            c: usize,
            lambda: f64,
        }
        let (header, payload): (Header, Vec<f64>) = modelio::read_model(path)?;
        if header.r#type != "linsvm" {
            return Err(Error::data(
                modelio::path_str(path),
                format!("expected model type \"linsvm\", got {:?}", header.r#type),
            ));
        }
        modelio::expect_len(path, payload.len(), header.c * header.d + header.c)?;
        let weights = Matrix::from_vec(header.c, header.d, payload[..header.c * header.d].to_vec());
        let biases = payload[header.c * header.d..].to_vec();
        Ok(LinearSvmModel {
            weights,
            biases,
            lambda: header.lambda,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SvmHyper {
    pub lambda: f64,
    pub eta0: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for SvmHyper {
    fn default() -> Self {
        SvmHyper {
            lambda: 1e-4,
            eta0: 1.0,
            epochs: 100,
            seed: 3,
        }
    }
}

impl SvmHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Contract(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.eta0.is_finite() && self.eta0 > 0.0) {
            return Err(Error::Contract(format!(
                "eta0 must be positive, got {}",
                self.eta0
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Contract("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Train one scorer per class. Every class in 1..=C must be present; each
/// binary problem runs on its own sub-stream of the seed so results do not
/// depend on training order.
pub fn svm_train(x: &Matrix, labels: &[u16], hyper: &SvmHyper) -> Result<LinearSvmModel> {
    hyper.validate()?;
    if labels.len() != x.rows() {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            x.rows()
        )));
    }
    let n_classes = labels.iter().copied().max().unwrap_or(0) as usize;
    if n_classes == 0 {
        return Err(Error::Contract("no labeled rows to train on".into()));
    }
    if x.rows() < n_classes {
        return Err(Error::Contract(format!(
            "{} rows cannot cover {} classes",
            x.rows(),
            n_classes
        )));
    }
    for class in 1..=n_classes as u16 {
        if !labels.contains(&class) {
            return Err(Error::Contract(format!(
                "class {class} has no training examples but classes must cover 1..={n_classes}"
            )));
        }
    }

    let dim = x.cols();
    let mut weights = Matrix::zeros(n_classes, dim);
    let mut biases = vec![0.0; n_classes];

    for (class_idx, bias) in biases.iter_mut().enumerate() {
        let targets: Vec<f64> = labels
            .iter()
            .map(|&l| if l as usize == class_idx + 1 { 1.0 } else { -1.0 })
            .collect();
        let (w, b) = train_binary(x, &targets, hyper, mix_seed(hyper.seed, class_idx as u64));
        for (j, v) in w.into_iter().enumerate() {
            weights.set(class_idx, j, v);
        }
        *bias = b;
    }

    Ok(LinearSvmModel {
        weights,
        biases,
        lambda: hyper.lambda,
    })
}

fn train_binary(x: &Matrix, targets: &[f64], hyper: &SvmHyper, seed: u64) -> (Vec<f64>, f64) {
    let dim = x.cols();
    let n = x.rows();
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::new(seed);
    let mut t = 0usize;

    for _ in 0..hyper.epochs {
        rng.shuffle(&mut order);
        for &i in &order {
            let eta = hyper.eta0 / (1.0 + t as f64 * hyper.lambda);
            t += 1;
            let row = x.row(i);
            let margin = targets[i]
                * (w.iter().zip(row).map(|(a, c)| a * c).sum::<f64>() + b);
            let shrink = 1.0 - eta * hyper.lambda;
            if margin < 1.0 {
                for (wj, &xj) in w.iter_mut().zip(row) {
                    *wj = *wj * shrink + eta * targets[i] * xj;
                }
                b += eta * targets[i];
            } else {
                for wj in w.iter_mut() {
                    *wj *= shrink;
                }
            }
        }
    }
    (w, b)
}

/// The regularized hinge objective of one class scorer over a dataset.
pub fn svm_objective(
    model: &LinearSvmModel,
    class_idx: usize,
    x: &Matrix,
    labels: &[u16],
) -> f64 {
    let w = model.weights.row(class_idx);
    let reg = 0.5 * model.lambda * w.iter().map(|v| v * v).sum::<f64>();
    let mut hinge = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        let s = if label as usize == class_idx + 1 { 1.0 } else { -1.0 };
        let margin = s * model.decision(class_idx, x.row(i));
        hinge += (1.0 - margin).max(0.0);
    }
    reg + hinge / x.rows() as f64
}

/// Argmax of the per-class decision values; ties break toward the lowest
/// class index. Labels are 1-based.
pub fn svm_predict(model: &LinearSvmModel, x: &Matrix) -> Result<Vec<u16>> {
    if x.cols() != model.dim() {
        return Err(Error::Shape(format!(
            "batch has {} columns but the model expects {}",
            x.cols(),
            model.dim()
        )));
    }
    let mut out = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let row = x.row(i);
        let mut best = 0usize;
        let mut best_score = model.decision(0, row);
        for c in 1..model.n_classes() {
            let score = model.decision(c, row);
            if score > best_score {
                best = c;
                best_score = score;
            }
        }
        out.push(best as u16 + 1);
    }
    Ok(out)
}
