//! Tied-weight single-layer autoencoder.
//!
//! The encoder maps a batch X (rows in [0, 1]) to hidden activations
//! H = f(X W + b_hidden); the decoder reuses the same weight matrix
//! transposed, R = f(H W^T + b_out), with f the logistic sigmoid. Training
//! minimizes the minibatch-mean cross entropy between X and R by SGD. The
//! gradients follow from the chain rule with the sigmoid/cross-entropy
//! simplification d cost / d net_out = (R - X) / m, giving the weight
//! gradient its two terms (encoder role and decoder role of the shared W).
//!
//! `grad_check` verifies the analytic gradients against central finite
//! differences of the cost and is wired into the CLI and the acceptance
//! suite.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modelio;
use crate::numkit::{mix_seed, sigmoid, sigmoid_prime_from_f, Matrix, Rng};

/// Tied-weight autoencoder parameters.
///
/// One `input_dim x hidden_dim` weight matrix serves encoder and decoder;
/// the decoder reads it transposed.
#[derive(Debug, Clone, PartialEq)]
pub struct AeParams {
    input_dim: usize,
    hidden_dim: usize,
    weights: Matrix,
    hidden_bias: Vec<f64>,
    output_bias: Vec<f64>,
}

impl AeParams {
    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn hidden_bias(&self) -> &[f64] {
        &self.hidden_bias
    }

    pub fn output_bias(&self) -> &[f64] {
        &self.output_bias
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Matrix, &mut Vec<f64>, &mut Vec<f64>) {
        (
            &mut self.weights,
            &mut self.hidden_bias,
            &mut self.output_bias,
        )
    }

    /// Assemble parameters from raw parts, validating the shapes.
    pub fn from_parts(
        input_dim: usize,
        hidden_dim: usize,
        weights: Matrix,
        hidden_bias: Vec<f64>,
        output_bias: Vec<f64>,
    ) -> Result<AeParams> {
        if weights.rows() != input_dim
            || weights.cols() != hidden_dim
            || hidden_bias.len() != hidden_dim
            || output_bias.len() != input_dim
        {
            return Err(Error::Shape(format!(
                "autoencoder parts inconsistent with {input_dim}-{hidden_dim}: weights {}x{}, \
                 hidden bias {}, output bias {}",
                weights.rows(),
                weights.cols(),
                hidden_bias.len(),
                output_bias.len()
            )));
        }
        if !weights.all_finite()
            || hidden_bias.iter().any(|v| !v.is_finite())
            || output_bias.iter().any(|v| !v.is_finite())
        {
            return Err(Error::Contract(
                "autoencoder parameters must be finite".into(),
            ));
        }
        Ok(AeParams {
            input_dim,
            hidden_dim,
            weights,
            hidden_bias,
            output_bias,
        })
    }

    /// Serialize as a JSON header `{"type":"ae","d":..,"h":..}` plus a
    /// little-endian f64 payload: weights row-major, hidden bias, output bias.
    pub fn save(&self, path: &Path) -> Result<()> {
        let header = format!(
            "{{\"type\":\"ae\",\"d\":{},\"h\":{}}}",
            self.input_dim, self.hidden_dim
        );
        let mut payload =
            Vec::with_capacity(self.weights.data().len() + self.hidden_dim + self.input_dim);
        payload.extend_from_slice(self.weights.data());
        payload.extend_from_slice(&self.hidden_bias);
        payload.extend_from_slice(&self.output_bias);
        modelio::write_model(path, header, &payload)
    }

    pub fn load(path: &Path) -> Result<AeParams> {
        #[derive(Deserialize)]
        struct Header {
            r#type: String,
            d: usize,
            h: usize,
        }
        let (header, payload): (Header, Vec<f64>) = modelio::read_model(path)?;
        if header.r#type != "ae" {
            return Err(Error::data(
                modelio::path_str(path),
                format!("expected model type \"ae\", got {:?}", header.r#type),
            ));
        }
        let (d, h) = (header.d, header.h);
        modelio::expect_len(path, payload.len(), d * h + h + d)?;
        let weights = Matrix::from_vec(d, h, payload[..d * h].to_vec());
        let hidden_bias = payload[d * h..d * h + h].to_vec();
        let output_bias = payload[d * h + h..].to_vec();
        AeParams::from_parts(d, h, weights, hidden_bias, output_bias)
    }
}

/// Activations of one forward pass, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: Matrix,
    pub net_hidden: Matrix,
    pub hidden: Matrix,
    pub net_output: Matrix,
    pub reconstruction: Matrix,
}

/// Gradients matching the layout of [`AeParams`].
#[derive(Debug, Clone)]
pub struct AeGrads {
    pub weights: Matrix,
    pub hidden_bias: Vec<f64>,
    pub output_bias: Vec<f64>,
}

/// SGD hyperparameters for autoencoder pretraining.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct AeHyper {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Log clamp inside the cost; gradients need no clamp.
    pub clamp_eps: f64,
}

impl Default for AeHyper {
    fn default() -> Self {
        AeHyper {
            learning_rate: 0.1,
            batch_size: 20,
            epochs: 100,
            seed: 1,
            clamp_eps: 1e-7,
        }
    }
}

impl AeHyper {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Contract(format!(
                "learning rate must be non-negative and finite, got {}",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::Contract("batch_size must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(Error::Contract("epochs must be at least 1".into()));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps <= 1e-3) {
            return Err(Error::Contract(format!(
                "clamp_eps must be in (0, 1e-3], got {}",
                self.clamp_eps
            )));
        }
        Ok(())
    }
}

/// Fresh parameters: weights i.i.d. uniform in +-4*sqrt(6/(d+h)), biases
/// zero, deterministic for a seed.
pub fn ae_init(input_dim: usize, hidden_dim: usize, seed: u64) -> Result<AeParams> {
    if input_dim == 0 || hidden_dim == 0 {
        return Err(Error::Contract(format!(
            "layer sizes must be positive, got {input_dim}-{hidden_dim}"
        )));
    }
    let bound = 4.0 * (6.0 / (input_dim + hidden_dim) as f64).sqrt();
    let mut rng = Rng::new(seed);
    let data: Vec<f64> = (0..input_dim * hidden_dim)
        .map(|_| bound * (2.0 * rng.next_f64() - 1.0))
        .collect();
    Ok(AeParams {
        input_dim,
        hidden_dim,
        weights: Matrix::from_vec(input_dim, hidden_dim, data),
        hidden_bias: vec![0.0; hidden_dim],
        output_bias: vec![0.0; input_dim],
    })
}

/// Encode and reconstruct a batch; rows of `input` are samples.
pub fn ae_forward(params: &AeParams, input: &Matrix) -> Result<ForwardCache> {
    if input.cols() != params.input_dim {
        return Err(Error::Shape(format!(
            "batch has {} columns but the autoencoder expects {}",
            input.cols(),
            params.input_dim
        )));
    }
    let mut net_hidden = input.matmul(&params.weights)?;
    net_hidden.add_row_broadcast(&params.hidden_bias);
    let hidden = net_hidden.map(sigmoid);
    let mut net_output = hidden.matmul_bt(&params.weights)?;
    net_output.add_row_broadcast(&params.output_bias);
    let reconstruction = net_output.map(sigmoid);
    Ok(ForwardCache {
        input: input.clone(),
        net_hidden,
        hidden,
        net_output,
        reconstruction,
    })
}

/// Minibatch-mean cross entropy between input and reconstruction, with the
/// reconstruction clamped into [eps, 1 - eps] before the logs.
pub fn ae_cost(cache: &ForwardCache, eps: f64) -> f64 {
    let m = cache.input.rows() as f64;
    let mut total = 0.0;
    for (&x, &z) in cache
        .input
        .data()
        .iter()
        .zip(cache.reconstruction.data())
    {
        let z = z.clamp(eps, 1.0 - eps);
        total += x * z.ln() + (1.0 - x) * (1.0 - z).ln();
    }
    -total / m
}

/// Analytic gradients of [`ae_cost`] with respect to all parameters.
pub fn ae_grads(params: &AeParams, cache: &ForwardCache) -> Result<AeGrads> {
    if cache.input.cols() != params.input_dim
        || cache.hidden.cols() != params.hidden_dim
        || cache.input.rows() != cache.hidden.rows()
        || cache.reconstruction.rows() != cache.input.rows()
        || cache.reconstruction.cols() != params.input_dim
    {
        return Err(Error::Contract(format!(
            "stale forward cache: batch {}x{} / hidden {}x{} do not match a {}-{} autoencoder",
            cache.input.rows(),
            cache.input.cols(),
            cache.hidden.rows(),
            cache.hidden.cols(),
            params.input_dim,
            params.hidden_dim
        )));
    }
    let m = cache.input.rows() as f64;

    // d cost / d net_out, already divided by the batch size.
    let mut delta_out = cache.reconstruction.clone();
    delta_out.add_scaled(&cache.input, -1.0);
    let delta_out = delta_out.map(|v| v / m);

    let output_bias = delta_out.col_sums();

    // Back through the decoder read of W, then the sigmoid.
    let mut delta_hidden = delta_out.matmul(&params.weights)?;
    for (d, &h) in delta_hidden
        .data_mut()
        .iter_mut()
        .zip(cache.hidden.data())
    {
        *d *= sigmoid_prime_from_f(h);
    }
    let hidden_bias = delta_hidden.col_sums();

    // Encoder term X^T delta_hidden plus decoder term delta_out^T H.
    let mut weights = cache.input.matmul_at(&delta_hidden)?;
    weights.add_scaled(&delta_out.matmul_at(&cache.hidden)?, 1.0);

    Ok(AeGrads {
        weights,
        hidden_bias,
        output_bias,
    })
}

/// Minibatch SGD. Each epoch shuffles the rows with the seeded generator,
/// walks the minibatches (the last one may be smaller) and applies
/// `theta -= learning_rate * grad`. Returns the trained parameters and the
/// full-dataset mean cost after each epoch.
pub fn sgd_train(
    params: AeParams,
    x_all: &Matrix,
    hyper: &AeHyper,
) -> Result<(AeParams, Vec<f64>)> {
    hyper.validate()?;
    check_unit_interval(x_all)?;
    let mut params = params;
    if x_all.cols() != params.input_dim {
        return Err(Error::Shape(format!(
            "dataset has {} columns but the autoencoder expects {}",
            x_all.cols(),
            params.input_dim
        )));
    }
    let n = x_all.rows();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Rng::new(hyper.seed);
    let mut history = Vec::with_capacity(hyper.epochs);

    for epoch in 1..=hyper.epochs {
        rng.shuffle(&mut order);
        for batch_idx in order.chunks(hyper.batch_size) {
            let batch = x_all.select_rows(batch_idx);
            let cache = ae_forward(&params, &batch)?;
            let grads = ae_grads(&params, &cache)?;
            apply_update(&mut params, &grads, hyper.learning_rate);
        }
        let cost = dataset_cost(&params, x_all, hyper.clamp_eps)?;
        if !cost.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push(cost);
    }
    Ok((params, history))
}

/// Mean cost of the whole dataset under the current parameters.
pub fn dataset_cost(params: &AeParams, x_all: &Matrix, eps: f64) -> Result<f64> {
    Ok(ae_cost(&ae_forward(params, x_all)?, eps))
}

fn apply_update(params: &mut AeParams, grads: &AeGrads, learning_rate: f64) {
    let (weights, hidden_bias, output_bias) = params.parts_mut();
    weights.add_scaled(&grads.weights, -learning_rate);
    for (b, &g) in hidden_bias.iter_mut().zip(&grads.hidden_bias) {
        *b -= learning_rate * g;
    }
    for (b, &g) in output_bias.iter_mut().zip(&grads.output_bias) {
        *b -= learning_rate * g;
    }
}

fn check_unit_interval(x: &Matrix) -> Result<()> {
    if x.data().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return Err(Error::Contract(
            "training data must lie in [0, 1]; normalize first".into(),
        ));
    }
    Ok(())
}

/// Step used by the finite-difference probes.
pub const FD_EPSILON: f64 = 1e-5;

/// Result of one gradient check, with the worst coordinate spelled out.
#[derive(Debug, Clone, Copy)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub worst_analytic: f64,
    pub worst_numeric: f64,
}

/// Build a random instance and return the worst relative disagreement
/// between analytic gradients and central finite differences of the cost.
///
/// Relative error per parameter: |analytic - numeric| over
/// max(1e-8, |analytic| + |numeric|).
pub fn grad_check(input_dim: usize, hidden_dim: usize, batch: usize, seed: u64) -> f64 {
    grad_check_detail(input_dim, hidden_dim, batch, seed).max_rel_error
}

/// [`grad_check`] plus the analytic/numeric pair behind the reported max.
pub fn grad_check_detail(
    input_dim: usize,
    hidden_dim: usize,
    batch: usize,
    seed: u64,
) -> GradCheckReport {
    let params = ae_init(input_dim, hidden_dim, mix_seed(seed, 1)).expect("positive sizes");
    let mut rng = Rng::new(mix_seed(seed, 2));
    let x = Matrix::from_fn(batch, input_dim, |_, _| rng.next_f64());
    let eps = AeHyper::default().clamp_eps;

    let cache = ae_forward(&params, &x).expect("shapes match");
    let grads = ae_grads(&params, &cache).expect("fresh cache");

    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_analytic: 0.0,
        worst_numeric: 0.0,
    };
    let mut probe = params.clone();
    let n_weights = probe.weights().data().len();
    for idx in 0..n_weights + hidden_dim + input_dim {
        let read = |p: &AeParams, i: usize| -> f64 {
            if i < n_weights {
                p.weights().data()[i]
            } else if i < n_weights + hidden_dim {
                p.hidden_bias()[i - n_weights]
            } else {
                p.output_bias()[i - n_weights - hidden_dim]
            }
        };
        let write = |p: &mut AeParams, i: usize, v: f64| {
            let (w, hb, ob) = p.parts_mut();
            if i < n_weights {
                w.data_mut()[i] = v;
            } else if i < n_weights + hidden_dim {
                hb[i - n_weights] = v;
            } else {
                ob[i - n_weights - hidden_dim] = v;
            }
        };
        let analytic = if idx < n_weights {
            grads.weights.data()[idx]
        } else if idx < n_weights + hidden_dim {
            grads.hidden_bias[idx - n_weights]
        } else {
            grads.output_bias[idx - n_weights - hidden_dim]
        };

        let orig = read(&probe, idx);
        write(&mut probe, idx, orig + FD_EPSILON);
        let plus = ae_cost(&ae_forward(&probe, &x).unwrap(), eps);
        write(&mut probe, idx, orig - FD_EPSILON);
        let minus = ae_cost(&ae_forward(&probe, &x).unwrap(), eps);
        write(&mut probe, idx, orig);

        let numeric = (plus - minus) / (2.0 * FD_EPSILON);
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8);
        if rel > report.max_rel_error {
            report = GradCheckReport {
                max_rel_error: rel,
                worst_analytic: analytic,
                worst_numeric: numeric,
            };
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_batch(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut rng = Rng::new(seed);
        Matrix::from_fn(rows, cols, |_, _| rng.next_f64())
    }

    #[test]
    fn init_shapes_and_determinism() {
        // The KSC-sized first layer: 176 inputs, 100 hidden units.
        let p = ae_init(176, 100, 7).unwrap();
        assert_eq!((p.weights().rows(), p.weights().cols()), (176, 100));
        assert_eq!(p.hidden_bias().len(), 100);
        assert_eq!(p.output_bias().len(), 176);
        assert!(p.hidden_bias().iter().all(|&b| b == 0.0));
        assert!(p.output_bias().iter().all(|&b| b == 0.0));
        let q = ae_init(176, 100, 7).unwrap();
        assert_eq!(p, q);
        let bound = 4.0 * (6.0_f64 / 276.0).sqrt();
        assert!(p.weights().max_abs() <= bound);
    }

    #[test]
    fn forward_zero_params_give_half() {
        let p = AeParams::from_parts(4, 3, Matrix::zeros(4, 3), vec![0.0; 3], vec![0.0; 4])
            .unwrap();
        let cache = ae_forward(&p, &random_batch(5, 4, 1)).unwrap();
        assert!(cache.hidden.data().iter().all(|&v| v == 0.5));
        assert!(cache.reconstruction.data().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn forward_scalar_chain() {
        // d = h = 1, W = 1, b = 0, x = 0: y = f(0) = 0.5, z = f(0.5).
        let p = AeParams::from_parts(
            1,
            1,
            Matrix::from_vec(1, 1, vec![1.0]),
            vec![0.0],
            vec![0.0],
        )
        .unwrap();
        let cache = ae_forward(&p, &Matrix::zeros(1, 1)).unwrap();
        assert_eq!(cache.hidden.get(0, 0), 0.5);
        let want = sigmoid(0.5);
        assert!((cache.reconstruction.get(0, 0) - want).abs() < 1e-15);
        assert!((want - 0.62246).abs() < 1e-5);
    }

    #[test]
    fn forward_matches_scalar_loop_oracle() {
        // Index-by-index evaluation of the net-input sums and sigmoids.
        let (d, h, m) = (4, 3, 3);
        let p = ae_init(d, h, 5).unwrap();
        let x = random_batch(m, d, 6);
        let cache = ae_forward(&p, &x).unwrap();
        for i in 0..m {
            let mut hidden = vec![0.0; h];
            for p_ in 0..h {
                let mut net = p.hidden_bias()[p_];
                for q in 0..d {
                    net += x.get(i, q) * p.weights().get(q, p_);
                }
                hidden[p_] = sigmoid(net);
                assert!((cache.net_hidden.get(i, p_) - (net)).abs() < 1e-12);
                assert!((cache.hidden.get(i, p_) - hidden[p_]).abs() < 1e-12);
            }
            for k in 0..d {
                let mut net = p.output_bias()[k];
                for p_ in 0..h {
                    net += p.weights().get(k, p_) * hidden[p_];
                }
                assert!((cache.reconstruction.get(i, k) - sigmoid(net)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cost_at_maximum_entropy_point() {
        // x = z = 0.5 everywhere gives d * ln 2 regardless of batch size.
        let d = 6;
        let p = AeParams::from_parts(d, 2, Matrix::zeros(d, 2), vec![0.0; 2], vec![0.0; d])
            .unwrap();
        let x = Matrix::from_fn(4, d, |_, _| 0.5);
        let cache = ae_forward(&p, &x).unwrap();
        let c = ae_cost(&cache, 1e-7);
        assert!((c - d as f64 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn cost_single_term_closed_form() {
        // One element with x = 1, z = 0.9: cost is -ln 0.9.
        let cache = ForwardCache {
            input: Matrix::from_vec(1, 1, vec![1.0]),
            net_hidden: Matrix::zeros(1, 1),
            hidden: Matrix::from_vec(1, 1, vec![0.5]),
            net_output: Matrix::zeros(1, 1),
            reconstruction: Matrix::from_vec(1, 1, vec![0.9]),
        };
        let c = ae_cost(&cache, 1e-7);
        assert!((c - (-(0.9f64).ln())).abs() < 1e-12);
        assert!((c - 0.10536).abs() < 1e-5);
    }

    #[test]
    fn cost_invariant_under_row_duplication() {
        let p = ae_init(5, 3, 2).unwrap();
        let x = random_batch(4, 5, 3);
        let doubled_rows: Vec<usize> = (0..4).chain(0..4).collect();
        let x2 = x.select_rows(&doubled_rows);
        let c1 = ae_cost(&ae_forward(&p, &x).unwrap(), 1e-7);
        let c2 = ae_cost(&ae_forward(&p, &x2).unwrap(), 1e-7);
        assert!((c1 - c2).abs() < 1e-12);
    }

    #[test]
    fn grads_match_finite_differences() {
        let worst = grad_check(10, 5, 4, 33);
        assert!(worst < 1e-6, "max relative error {worst}");
    }

    #[test]
    fn grad_check_smallest_case() {
        let worst = grad_check(1, 1, 1, 2);
        assert!(worst < 1e-6, "max relative error {worst}");
    }

    #[test]
    fn grad_check_deterministic() {
        assert_eq!(grad_check(6, 4, 3, 11), grad_check(6, 4, 3, 11));
    }

    #[test]
    fn output_bias_grad_vanishes_when_reconstruction_equals_input() {
        let p = ae_init(4, 3, 9).unwrap();
        let x = random_batch(3, 4, 10);
        let mut cache = ae_forward(&p, &x).unwrap();
        cache.reconstruction = cache.input.clone();
        let grads = ae_grads(&p, &cache).unwrap();
        assert!(grads.output_bias.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn grads_invariant_under_batch_duplication() {
        let p = ae_init(5, 3, 4).unwrap();
        let x = random_batch(4, 5, 8);
        let doubled: Vec<usize> = (0..4).chain(0..4).collect();
        let x2 = x.select_rows(&doubled);
        let g1 = ae_grads(&p, &ae_forward(&p, &x).unwrap()).unwrap();
        let g2 = ae_grads(&p, &ae_forward(&p, &x2).unwrap()).unwrap();
        for (a, b) in g1.weights.data().iter().zip(g2.weights.data()) {
            assert!((a - b).abs() < 1e-14);
        }
        for (a, b) in g1.output_bias.iter().zip(&g2.output_bias) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn stale_cache_rejected() {
        let p = ae_init(4, 3, 1).unwrap();
        let other = ae_init(5, 3, 1).unwrap();
        let cache = ae_forward(&other, &random_batch(2, 5, 2)).unwrap();
        assert!(ae_grads(&p, &cache).is_err());
    }

    #[test]
    fn zero_learning_rate_changes_nothing() {
        let p = ae_init(6, 4, 3).unwrap();
        let x = random_batch(10, 6, 4);
        let hyper = AeHyper {
            learning_rate: 0.0,
            batch_size: 3,
            epochs: 5,
            seed: 5,
            clamp_eps: 1e-7,
        };
        let (trained, history) = sgd_train(p.clone(), &x, &hyper).unwrap();
        assert_eq!(trained, p);
        assert_eq!(history.len(), 5);
    }

    #[test]
    fn training_is_deterministic() {
        let x = random_batch(30, 8, 6);
        let hyper = AeHyper {
            epochs: 10,
            batch_size: 7,
            ..AeHyper::default()
        };
        let a = sgd_train(ae_init(8, 5, 1).unwrap(), &x, &hyper).unwrap();
        let b = sgd_train(ae_init(8, 5, 1).unwrap(), &x, &hyper).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn training_reduces_cost() {
        let x = random_batch(60, 12, 7);
        let hyper = AeHyper {
            epochs: 60,
            batch_size: 10,
            ..AeHyper::default()
        };
        let (_, history) = sgd_train(ae_init(12, 8, 2).unwrap(), &x, &hyper).unwrap();
        assert!(history.last().unwrap() < &history[0]);
    }

    #[test]
    fn out_of_range_data_rejected() {
        let x = Matrix::from_vec(1, 2, vec![0.5, 1.5]);
        let err = sgd_train(ae_init(2, 2, 1).unwrap(), &x, &AeHyper::default()).unwrap_err();
        assert!(err.to_string().contains("[0, 1]"));
    }

    #[test]
    fn extreme_learning_rate_saturates_but_stays_finite() {
        // The clamped sigmoid and clamped cost keep the loop finite even
        // at absurd rates: saturation zeroes the gradients before any
        // overflow. The divergence guard remains as a safety net (the
        // fine-tuning path can genuinely diverge through ln(0)).
        let x = random_batch(12, 6, 9);
        let hyper = AeHyper {
            learning_rate: 1e300,
            batch_size: 4,
            epochs: 10,
            seed: 2,
            clamp_eps: 1e-7,
        };
        let (params, history) = sgd_train(ae_init(6, 4, 1).unwrap(), &x, &hyper).unwrap();
        assert!(params.weights().all_finite());
        assert!(history.iter().all(|c| c.is_finite()));
    }

    #[test]
    fn save_load_round_trip() {
        let p = ae_init(7, 4, 13).unwrap();
        let path = tempfile::Builder::new()
            .suffix(".ae")
            .tempfile()
            .unwrap()
            .into_temp_path();
        p.save(&path).unwrap();
        let q = AeParams::load(&path).unwrap();
        assert_eq!(p, q);
    }
}
