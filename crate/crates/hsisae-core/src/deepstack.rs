//! Stacked autoencoders with a softmax classification head.
//!
//! Layers are pretrained greedily: the first autoencoder on the data, each
//! later one on the hidden activations of its predecessor. After
//! pretraining only the encoder halves are used forward. Supervised
//! fine-tuning backpropagates the softmax negative log-likelihood through
//! the whole stack, updating the head with the configured learning rate and
//! every pretrained layer with that rate scaled down by `alpha`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::autoenc::{ae_init, sgd_train, AeHyper, AeParams};
use crate::error::{Error, Result};
use crate::modelio;
use crate::numkit::{mix_seed, sigmoid, sigmoid_prime_from_f, Matrix, Rng};

/// Softmax output layer: `hidden_dim x n_classes` weights plus biases.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxHead {
    weights: Matrix,
    bias: Vec<f64>,
}

impl SoftmaxHead {
    pub fn zeros(hidden_dim: usize, n_classes: usize) -> SoftmaxHead {
        SoftmaxHead {
            weights: Matrix::zeros(hidden_dim, n_classes),
            bias: vec![0.0; n_classes],
        }
    }

    /// Assemble a head from raw parts; `bias.len()` must equal the weight
    /// column count.
    pub fn from_parts(weights: Matrix, bias: Vec<f64>) -> SoftmaxHead {
        assert_eq!(weights.cols(), bias.len(), "bias length must match classes");
        SoftmaxHead { weights, bias }
    }

    pub fn input_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn n_classes(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }
}

/// Encoder layers in order, optionally topped by a softmax head.
///
/// `sizes` lists the layer widths input-first, e.g. 176-100-100; decoder
/// biases stay stored so pretraining can resume, but the forward path uses
/// only weights and hidden biases.
#[derive(Debug, Clone, PartialEq)]
pub struct SaeModel {
    sizes: Vec<usize>,
    layers: Vec<AeParams>,
    head: Option<SoftmaxHead>,
    alpha: f64,
}

impl SaeModel {
    pub fn new(layers: Vec<AeParams>, head: Option<SoftmaxHead>) -> Result<SaeModel> {
        if layers.is_empty() && head.is_none() {
            return Err(Error::Contract(
                "a stacked model needs at least one layer or a head".into(),
            ));
        }
        for pair in layers.windows(2) {
            if pair[0].hidden_dim() != pair[1].input_dim() {
                return Err(Error::Shape(format!(
                    "layer chain broken: {}-{} feeds {}-{}",
                    pair[0].input_dim(),
                    pair[0].hidden_dim(),
                    pair[1].input_dim(),
                    pair[1].hidden_dim()
                )));
            }
        }
        if let (Some(head), Some(last)) = (&head, layers.last()) {
            if head.input_dim() != last.hidden_dim() {
                return Err(Error::Shape(format!(
                    "head expects {} inputs but the last layer yields {}",
                    head.input_dim(),
                    last.hidden_dim()
                )));
            }
        }
        let mut sizes = Vec::with_capacity(layers.len() + 1);
        if let Some(first) = layers.first() {
            sizes.push(first.input_dim());
            for l in &layers {
                sizes.push(l.hidden_dim());
            }
        } else if let Some(h) = &head {
            sizes.push(h.input_dim());
        }
        Ok(SaeModel {
            sizes,
            layers,
            head,
            alpha: 0.1,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn layers(&self) -> &[AeParams] {
        &self.layers
    }

    pub fn head(&self) -> Option<&SoftmaxHead> {
        self.head.as_ref()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_head(mut self, head: SoftmaxHead) -> Result<SaeModel> {
        if let Some(last) = self.layers.last() {
            if head.input_dim() != last.hidden_dim() {
                return Err(Error::Shape(format!(
                    "head expects {} inputs but the last layer yields {}",
                    head.input_dim(),
                    last.hidden_dim()
                )));
            }
        }
        self.head = Some(head);
        Ok(self)
    }

    /// Serialize with header
    /// `{"type":"sae","sizes":[..],"has_head":..,"alpha":..}` followed by
    /// each layer's payload (weights, hidden bias, output bias) and, when
    /// present, the head payload (weights, bias).
    pub fn save(&self, path: &Path) -> Result<()> {
        let sizes = self
            .sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let header = format!(
            "{{\"type\":\"sae\",\"sizes\":[{sizes}],\"has_head\":{},\"alpha\":{}}}",
            self.head.is_some(),
            self.alpha
        );
        let mut payload = Vec::new();
        for layer in &self.layers {
            payload.extend_from_slice(layer.weights().data());
            payload.extend_from_slice(layer.hidden_bias());
            payload.extend_from_slice(layer.output_bias());
        }
        if let Some(head) = &self.head {
            payload.extend_from_slice(head.weights.data());
            payload.extend_from_slice(&head.bias);
        }
        modelio::write_model(path, header, &payload)
    }

    pub fn load(path: &Path) -> Result<SaeModel> {
        #[derive(Deserialize)]
        struct Header {
            r#type: String,
            sizes: Vec<usize>,
            has_head: bool,
            alpha: f64,
        }
        let (header, payload): (Header, Vec<f64>) = modelio::read_model(path)?;
        if header.r#type != "sae" {
            return Err(Error::data(
                modelio::path_str(path),
                format!("expected model type \"sae\", got {:?}", header.r#type),
            ));
        }
        if header.sizes.len() < 2 {
            return Err(Error::data(
                modelio::path_str(path),
                "sizes must list at least input and one hidden width",
            ));
        }
        let mut want = 0usize;
        for pair in header.sizes.windows(2) {
            want += pair[0] * pair[1] + pair[1] + pair[0];
        }
        let (h_last, n_classes) = if header.has_head {
            // The head width is whatever remains beyond the layers.
            let h_last = *header.sizes.last().unwrap();
            let rest = payload.len().saturating_sub(want);
            if rest == 0 || rest % (h_last + 1) != 0 {
                return Err(Error::data(
                    modelio::path_str(path),
                    "head payload does not match the last layer width",
                ));
            }
            (h_last, rest / (h_last + 1))
        } else {
            (0, 0)
        };
        modelio::expect_len(
            path,
            payload.len(),
            want + if header.has_head { h_last * n_classes + n_classes } else { 0 },
        )?;

        let mut cursor = 0;
        let mut take = |n: usize| {
            let s = payload[cursor..cursor + n].to_vec();
            cursor += n;
            s
        };
        let mut layers = Vec::new();
        for pair in header.sizes.windows(2) {
            let (d, h) = (pair[0], pair[1]);
            let weights = Matrix::from_vec(d, h, take(d * h));
            let hidden_bias = take(h);
            let output_bias = take(d);
            layers.push(AeParams::from_parts(d, h, weights, hidden_bias, output_bias)?);
        }
        let head = if header.has_head {
            let weights = Matrix::from_vec(h_last, n_classes, take(h_last * n_classes));
            let bias = take(n_classes);
            Some(SoftmaxHead { weights, bias })
        } else {
            None
        };
        let mut model = SaeModel::new(layers, head)?;
        model.alpha = header.alpha;
        Ok(model)
    }
}

/// Fine-tuning hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct FinetuneHyper {
    pub learning_rate: f64,
    /// Learning-rate multiplier for the pretrained layers, in (0, 1]
    /// (0 freezes them entirely).
    pub alpha: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for FinetuneHyper {
    fn default() -> Self {
        FinetuneHyper {
            learning_rate: 0.1,
            alpha: 0.1,
            epochs: 100,
            batch_size: 20,
            seed: 2,
        }
    }
}

impl FinetuneHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Contract(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Contract(format!(
                "alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Contract(
                "epochs and batch_size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Greedy layer-wise pretraining. `sizes` lists widths input-first;
/// `hypers` holds one entry per layer, or a single entry reused for all.
pub fn pretrain_stack(sizes: &[usize], x_all: &Matrix, hypers: &[AeHyper]) -> Result<SaeModel> {
    if sizes.len() < 2 {
        return Err(Error::Contract(
            "need an input width and at least one hidden width".into(),
        ));
    }
    if sizes.contains(&0) {
        return Err(Error::Contract("layer widths must be positive".into()));
    }
    let n_layers = sizes.len() - 1;
    if hypers.len() != n_layers && hypers.len() != 1 {
        return Err(Error::Contract(format!(
            "got {} hyperparameter sets for {} layers",
            hypers.len(),
            n_layers
        )));
    }
    if x_all.cols() != sizes[0] {
        return Err(Error::Shape(format!(
            "dataset has {} columns but the first layer expects {}",
            x_all.cols(),
            sizes[0]
        )));
    }

    let mut layers = Vec::with_capacity(n_layers);
    let mut current = x_all.clone();
    for i in 0..n_layers {
        let hyper = if hypers.len() == 1 { &hypers[0] } else { &hypers[i] };
        let init = ae_init(sizes[i], sizes[i + 1], hyper.seed)?;
        let (trained, _) = sgd_train(init, &current, hyper)?;
        current = encode_layer(&trained, &current)?;
        layers.push(trained);
    }
    SaeModel::new(layers, None)
}

fn encode_layer(layer: &AeParams, x: &Matrix) -> Result<Matrix> {
    let mut net = x.matmul(layer.weights())?;
    net.add_row_broadcast(layer.hidden_bias());
    Ok(net.map(sigmoid))
}

/// Run the encoder stack; no head is applied. An empty stack is the
/// identity.
pub fn encode_deep(model: &SaeModel, x: &Matrix) -> Result<Matrix> {
    let mut current = x.clone();
    for layer in &model.layers {
        if current.cols() != layer.input_dim() {
            return Err(Error::Shape(format!(
                "batch has {} columns but the layer expects {}",
                current.cols(),
                layer.input_dim()
            )));
        }
        current = encode_layer(layer, &current)?;
    }
    Ok(current)
}

/// Row-wise softmax of `hidden * weights + bias`, max-shifted for
/// stability. Every output row sums to 1.
pub fn softmax_forward(head: &SoftmaxHead, hidden: &Matrix) -> Result<Matrix> {
    if hidden.cols() != head.input_dim() {
        return Err(Error::Shape(format!(
            "batch has {} columns but the head expects {}",
            hidden.cols(),
            head.input_dim()
        )));
    }
    let mut logits = hidden.matmul(&head.weights)?;
    logits.add_row_broadcast(&head.bias);
    Ok(softmax_rows(&logits))
}

fn softmax_rows(logits: &Matrix) -> Matrix {
    let mut out = logits.clone();
    let cols = out.cols();
    for row in out.data_mut().chunks_exact_mut(cols) {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    out
}

/// Gradients for every trainable tensor of a stack with a head.
#[derive(Debug, Clone)]
pub struct StackGrads {
    /// Per layer: weight gradient and hidden-bias gradient.
    pub layers: Vec<(Matrix, Vec<f64>)>,
    pub head_weights: Matrix,
    pub head_bias: Vec<f64>,
}

struct StackForward {
    /// Activations per depth: [input, layer1 out, ..., layerN out].
    activations: Vec<Matrix>,
    probabilities: Matrix,
}

fn forward_stack(model: &SaeModel, x: &Matrix) -> Result<StackForward> {
    let head = model
        .head
        .as_ref()
        .ok_or_else(|| Error::Contract("model has no classification head".into()))?;
    let mut activations = Vec::with_capacity(model.layers.len() + 1);
    activations.push(x.clone());
    for layer in &model.layers {
        let next = encode_layer(layer, activations.last().unwrap())?;
        activations.push(next);
    }
    let probabilities = softmax_forward(head, activations.last().unwrap())?;
    Ok(StackForward {
        activations,
        probabilities,
    })
}

fn check_labels(labels: &[u16], rows: usize, n_classes: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            rows
        )));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l == 0 || l as usize > n_classes) {
        return Err(Error::Contract(format!(
            "label {bad} outside 1..={n_classes}"
        )));
    }
    Ok(())
}

/// Mean negative log-likelihood of the correct classes.
pub fn nll_loss(model: &SaeModel, x: &Matrix, labels: &[u16]) -> Result<f64> {
    let fwd = forward_stack(model, x)?;
    check_labels(labels, x.rows(), fwd.probabilities.cols())?;
    let m = x.rows() as f64;
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        total += fwd.probabilities.get(i, label as usize - 1).ln();
    }
    Ok(-total / m)
}

/// Analytic gradients of [`nll_loss`] for the head and every layer.
pub fn finetune_grads(model: &SaeModel, x: &Matrix, labels: &[u16]) -> Result<StackGrads> {
    let fwd = forward_stack(model, x)?;
    check_labels(labels, x.rows(), fwd.probabilities.cols())?;
    let m = x.rows() as f64;

    // d loss / d logits = (P - onehot) / m.
    let mut delta = fwd.probabilities.clone();
    for (i, &label) in labels.iter().enumerate() {
        let j = label as usize - 1;
        delta.set(i, j, delta.get(i, j) - 1.0);
    }
    let delta = delta.map(|v| v / m);

    let last_hidden = fwd.activations.last().unwrap();
    let head = model.head.as_ref().unwrap();
    let head_weights = last_hidden.matmul_at(&delta)?;
    let head_bias = delta.col_sums();

    let mut layer_grads = vec![None; model.layers.len()];
    let mut upstream = delta.matmul_bt(&head.weights)?;
    for (l, layer) in model.layers.iter().enumerate().rev() {
        let output = &fwd.activations[l + 1];
        let mut delta_net = upstream;
        for (d, &h) in delta_net.data_mut().iter_mut().zip(output.data()) {
            *d *= sigmoid_prime_from_f(h);
        }
        let input = &fwd.activations[l];
        let w_grad = input.matmul_at(&delta_net)?;
        let b_grad = delta_net.col_sums();
        upstream = delta_net.matmul_bt(layer.weights())?;
        layer_grads[l] = Some((w_grad, b_grad));
    }

    Ok(StackGrads {
        layers: layer_grads.into_iter().map(Option::unwrap).collect(),
        head_weights,
        head_bias,
    })
}

/// Supervised fine-tuning by minibatch SGD on the NLL. The head moves with
/// the full learning rate, pretrained layers with `learning_rate * alpha`
/// (their decoder biases are untouched). Returns the model and the
/// full-dataset loss after each epoch.
pub fn finetune(
    model: SaeModel,
    x_all: &Matrix,
    labels: &[u16],
    hyper: &FinetuneHyper,
) -> Result<(SaeModel, Vec<f64>)> {
    hyper.validate()?;
    let mut model = model;
    let head = model
        .head
        .as_ref()
        .ok_or_else(|| Error::Contract("model has no classification head".into()))?;
    check_labels(labels, x_all.rows(), head.n_classes())?;
    model.alpha = hyper.alpha;

    let n = x_all.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::new(hyper.seed);
    let mut history = Vec::with_capacity(hyper.epochs);
    let layer_rate = hyper.learning_rate * hyper.alpha;

    for epoch in 1..=hyper.epochs {
        rng.shuffle(&mut order);
        for batch_idx in order.chunks(hyper.batch_size) {
            let batch = x_all.select_rows(batch_idx);
            let batch_labels: Vec<u16> = batch_idx.iter().map(|&i| labels[i]).collect();
            let grads = finetune_grads(&model, &batch, &batch_labels)?;

            let head = model.head.as_mut().unwrap();
            head.weights.add_scaled(&grads.head_weights, -hyper.learning_rate);
            for (b, &g) in head.bias.iter_mut().zip(&grads.head_bias) {
                *b -= hyper.learning_rate * g;
            }
            if layer_rate != 0.0 {
                for (layer, (w_grad, b_grad)) in model.layers.iter_mut().zip(&grads.layers) {
                    let (weights, hidden_bias, _) = layer.parts_mut();
                    weights.add_scaled(w_grad, -layer_rate);
                    for (b, &g) in hidden_bias.iter_mut().zip(b_grad) {
                        *b -= layer_rate * g;
                    }
                }
            }
        }
        let loss = nll_loss(&model, x_all, labels)?;
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(loss);
    }
    Ok((model, history))
}

/// Most probable class per row, 1-based; ties break toward the lowest
/// class index.
pub fn predict(model: &SaeModel, x: &Matrix) -> Result<Vec<u16>> {
    let fwd = forward_stack(model, x)?;
    Ok(argmax_rows(&fwd.probabilities))
}

pub(crate) fn argmax_rows(probabilities: &Matrix) -> Vec<u16> {
    let cols = probabilities.cols();
    probabilities
        .data()
        .chunks_exact(cols)
        .map(|row| {
            let mut best = 0usize;
            for (j, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = j;
                }
            }
            best as u16 + 1
        })
        .collect()
}

/// Finite-difference verification of [`finetune_grads`] on a random
/// instance shaped by `sizes` (input-first) with a `n_classes` head.
/// Returns the worst relative error, formula as in
/// [`crate::autoenc::grad_check`].
pub fn finetune_grad_check(sizes: &[usize], n_classes: usize, batch: usize, seed: u64) -> f64 {
    assert!(sizes.len() >= 2 && n_classes >= 2 && batch >= 1);
    let mut layers = Vec::new();
    for (i, pair) in sizes.windows(2).enumerate() {
        layers.push(ae_init(pair[0], pair[1], mix_seed(seed, i as u64 + 1)).unwrap());
    }
    // A zero head has zero gradients w.r.t. layer weights, so seed it
    // randomly for a meaningful check.
    let h_last = *sizes.last().unwrap();
    let mut head_rng = Rng::new(mix_seed(seed, 101));
    let mut head = SoftmaxHead::zeros(h_last, n_classes);
    for v in head.weights.data_mut() {
        *v = head_rng.next_f64() - 0.5;
    }
    for v in head.bias.iter_mut() {
        *v = head_rng.next_f64() - 0.5;
    }
    let model = SaeModel::new(layers, Some(head)).unwrap();

    let mut rng = Rng::new(mix_seed(seed, 102));
    let x = Matrix::from_fn(batch, sizes[0], |_, _| rng.next_f64());
    let labels: Vec<u16> = (0..batch)
        .map(|_| rng.below(n_classes) as u16 + 1)
        .collect();

    let grads = finetune_grads(&model, &x, &labels).unwrap();
    let fd = crate::autoenc::FD_EPSILON;
    let mut worst: f64 = 0.0;
    let mut probe = model.clone();

    // Walk every trainable coordinate: each layer's weights and hidden
    // bias, then the head.
    for l in 0..probe.layers.len() {
        let n_w = probe.layers[l].weights().data().len();
        let n_b = probe.layers[l].hidden_bias().len();
        for idx in 0..n_w + n_b {
            let analytic = if idx < n_w {
                grads.layers[l].0.data()[idx]
            } else {
                grads.layers[l].1[idx - n_w]
            };
            let bump = |p: &mut SaeModel, delta: f64| {
                let (w, hb, _) = p.layers[l].parts_mut();
                if idx < n_w {
                    w.data_mut()[idx] += delta;
                } else {
                    hb[idx - n_w] += delta;
                }
            };
            worst = worst.max(fd_probe(&mut probe, &x, &labels, analytic, fd, bump));
        }
    }
    let n_w = probe.head.as_ref().unwrap().weights.data().len();
    let n_b = probe.head.as_ref().unwrap().bias.len();
    for idx in 0..n_w + n_b {
        let analytic = if idx < n_w {
            grads.head_weights.data()[idx]
        } else {
            grads.head_bias[idx - n_w]
        };
        let bump = |p: &mut SaeModel, delta: f64| {
            let head = p.head.as_mut().unwrap();
            if idx < n_w {
                head.weights.data_mut()[idx] += delta;
            } else {
                head.bias[idx - n_w] += delta;
            }
        };
        worst = worst.max(fd_probe(&mut probe, &x, &labels, analytic, fd, bump));
    }
    worst
}

fn fd_probe(
    probe: &mut SaeModel,
    x: &Matrix,
    labels: &[u16],
    analytic: f64,
    fd: f64,
    bump: impl Fn(&mut SaeModel, f64),
) -> f64 {
    bump(probe, fd);
    let plus = nll_loss(probe, x, labels).unwrap();
    bump(probe, -2.0 * fd);
    let minus = nll_loss(probe, x, labels).unwrap();
    bump(probe, fd);
    let numeric = (plus - minus) / (2.0 * fd);
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}
