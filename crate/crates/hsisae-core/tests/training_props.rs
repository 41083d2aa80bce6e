//! Seeded training-behavior properties: gradient correctness at scale,
//! cost descent, SVM objective behavior, softmax/encoder ranges.

use hsisae_core::autoenc::{
    ae_cost, ae_forward, ae_grads, ae_init, dataset_cost, grad_check, sgd_train, AeHyper,
    AeParams,
};
use hsisae_core::deepstack::{
    encode_deep, finetune, finetune_grad_check, pretrain_stack, softmax_forward, SoftmaxHead,
};
use hsisae_core::linsvm::{svm_objective, svm_predict, svm_train, SvmHyper};
use hsisae_core::numkit::{Matrix, Rng};

fn random_unit_batch(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = Rng::new(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.next_f64())
}

/// grad_check at the verification size stays below 1e-6 across 20 seeds.
#[test]
fn grad_check_small_size_twenty_seeds() {
    for seed in 1..=20u64 {
        let worst = grad_check(10, 5, 4, seed);
        assert!(worst < 1e-6, "seed {seed}: {worst}");
    }
}

/// At larger sizes a random instance almost surely contains a coordinate
/// whose true gradient is ~0; there the relative formula measures only
/// finite-difference noise (~1e-10 absolute with the 1e-5 probe step), so
/// correctness is checked per coordinate as "relative < 1e-6 OR absolute
/// agreement < 1e-8" with an independent test-side probe. A wrong
/// derivative fails both: its error scales with the gradient magnitude.
#[test]
fn gradients_correct_up_to_50x30_twenty_seeds() {
    let fd = 1e-5;
    let eps = 1e-7;
    for seed in 1..=20u64 {
        for &(d, h, m) in &[(30usize, 20usize, 6usize), (50, 30, 8)] {
            let params = ae_init(d, h, seed).unwrap();
            let x = random_unit_batch(m, d, seed.wrapping_add(999));
            let cache = ae_forward(&params, &x).unwrap();
            let grads = ae_grads(&params, &cache).unwrap();

            let cost_with_weight = |q: usize, p: usize, v: f64| -> f64 {
                let mut weights = params.weights().clone();
                weights.set(q, p, v);
                let probe = AeParams::from_parts(
                    d,
                    h,
                    weights,
                    params.hidden_bias().to_vec(),
                    params.output_bias().to_vec(),
                )
                .unwrap();
                ae_cost(&ae_forward(&probe, &x).unwrap(), eps)
            };

            // Probe a deterministic sample of weight coordinates; a full
            // scan of 1580 params x 20 seeds adds nothing but runtime.
            let mut rng = Rng::new(seed.wrapping_mul(77));
            for _ in 0..60 {
                let q = rng.below(d);
                let p = rng.below(h);
                let analytic = grads.weights.get(q, p);
                let base = params.weights().get(q, p);
                let numeric = (cost_with_weight(q, p, base + fd)
                    - cost_with_weight(q, p, base - fd))
                    / (2.0 * fd);
                let rel = (analytic - numeric).abs()
                    / (analytic.abs() + numeric.abs()).max(1e-8);
                let abs = (analytic - numeric).abs();
                assert!(
                    rel < 1e-6 || abs < 1e-8,
                    "d={d} h={h} seed={seed} W[{q}][{p}]: rel={rel:.3e} abs={abs:.3e}"
                );
            }
        }
    }
}

/// A full-batch step with a small learning rate strictly decreases the
/// cost, 20 seeds.
#[test]
fn single_full_batch_step_decreases_cost() {
    for seed in 1..=20u64 {
        let params = ae_init(12, 7, seed).unwrap();
        let x = random_unit_batch(16, 12, seed.wrapping_add(500));
        let before = dataset_cost(&params, &x, 1e-7).unwrap();
        let hyper = AeHyper {
            learning_rate: 1e-3,
            batch_size: 16,
            epochs: 1,
            seed,
            clamp_eps: 1e-7,
        };
        let (_, history) = sgd_train(params, &x, &hyper).unwrap();
        assert!(
            history[0] < before,
            "seed {seed}: {} -> {}",
            before,
            history[0]
        );
    }
}

/// Cost is bounded below by the data's binary entropy (mean over rows) and
/// never negative.
#[test]
fn cost_never_below_entropy_floor() {
    for seed in 1..=10u64 {
        let params = ae_init(8, 5, seed).unwrap();
        let x = random_unit_batch(6, 8, seed.wrapping_add(100));
        let cache = ae_forward(&params, &x).unwrap();
        let cost = ae_cost(&cache, 1e-7);
        let entropy: f64 = x
            .data()
            .iter()
            .map(|&v| {
                if v <= 0.0 || v >= 1.0 {
                    0.0
                } else {
                    -(v * v.ln() + (1.0 - v) * (1.0 - v).ln())
                }
            })
            .sum::<f64>()
            / x.rows() as f64;
        assert!(cost >= entropy - 1e-9, "seed {seed}: {cost} < {entropy}");
        assert!(cost >= 0.0);
    }
}

/// Hidden and reconstruction activations stay strictly inside (0, 1).
#[test]
fn activations_stay_in_open_interval() {
    for seed in 1..=10u64 {
        let params = ae_init(10, 6, seed).unwrap();
        let x = random_unit_batch(9, 10, seed.wrapping_add(50));
        let cache = ae_forward(&params, &x).unwrap();
        for &v in cache.hidden.data().iter().chain(cache.reconstruction.data()) {
            assert!(v > 0.0 && v < 1.0);
        }
    }
}

/// Full-stack NLL gradient check for 1..3 layer models: the strict
/// relative formula on fixed seeds known to avoid near-zero-gradient
/// coordinates, plus a dual-tolerance probe (relative < 1e-6 OR absolute
/// < 1e-8) over all trainable tensors for twenty seeds.
#[test]
fn full_stack_grad_check_up_to_three_layers() {
    for seed in [1u64, 2, 3, 4] {
        for layers in 1..=3usize {
            let mut sizes = vec![6usize];
            sizes.extend(std::iter::repeat(4).take(layers));
            let worst = finetune_grad_check(&sizes, 3, 5, seed);
            assert!(worst < 1e-6, "{layers} layers, seed {seed}: {worst}");
        }
    }

    // Independent probe with the dual tolerance across all 20 seeds.
    for seed in 1..=20u64 {
        for layers in 1..=3usize {
            let mut sizes = vec![6usize];
            sizes.extend(std::iter::repeat(4).take(layers));
            stack_gradients_dual_check(&sizes, 3, 5, seed);
        }
    }
}

/// Rebuild the model coordinate by coordinate and compare every analytic
/// gradient entry against a central difference of the NLL.
fn stack_gradients_dual_check(sizes: &[usize], n_classes: usize, m: usize, seed: u64) {
    use hsisae_core::deepstack::{finetune_grads, nll_loss, SaeModel};

    let mut layers = Vec::new();
    for (i, pair) in sizes.windows(2).enumerate() {
        layers.push(
            ae_init(
                pair[0],
                pair[1],
                hsisae_core::numkit::mix_seed(seed, i as u64 + 1),
            )
            .unwrap(),
        );
    }
    let h_last = *sizes.last().unwrap();
    let mut head_rng = Rng::new(hsisae_core::numkit::mix_seed(seed, 101));
    let head_weights = Matrix::from_fn(h_last, n_classes, |_, _| head_rng.next_f64() - 0.5);
    let head_bias: Vec<f64> = (0..n_classes).map(|_| head_rng.next_f64() - 0.5).collect();
    let model = SaeModel::new(
        layers.clone(),
        Some(SoftmaxHead::from_parts(head_weights.clone(), head_bias.clone())),
    )
    .unwrap();

    let mut rng = Rng::new(hsisae_core::numkit::mix_seed(seed, 102));
    let x = Matrix::from_fn(m, sizes[0], |_, _| rng.next_f64());
    let labels: Vec<u16> = (0..m).map(|_| rng.below(n_classes) as u16 + 1).collect();
    let grads = finetune_grads(&model, &x, &labels).unwrap();

    let fd = 1e-5;
    let rebuild = |layer_edit: Option<(usize, Matrix, Vec<f64>)>,
                   head_edit: Option<(Matrix, Vec<f64>)>|
     -> SaeModel {
        let mut ls = layers.clone();
        if let Some((l, w, b)) = layer_edit {
            ls[l] = AeParams::from_parts(
                ls[l].input_dim(),
                ls[l].hidden_dim(),
                w,
                b,
                ls[l].output_bias().to_vec(),
            )
            .unwrap();
        }
        let (hw, hb) = head_edit.unwrap_or((head_weights.clone(), head_bias.clone()));
        SaeModel::new(ls, Some(SoftmaxHead::from_parts(hw, hb))).unwrap()
    };
    let check = |analytic: f64, plus: f64, minus: f64, what: &str| {
        let numeric = (plus - minus) / (2.0 * fd);
        let rel = (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8);
        let abs = (analytic - numeric).abs();
        assert!(
            rel < 1e-6 || abs < 1e-8,
            "seed {seed} {what}: rel={rel:.3e} abs={abs:.3e}"
        );
    };

    for (l, layer) in layers.iter().enumerate() {
        for q in 0..layer.input_dim() {
            for p in 0..layer.hidden_dim() {
                let base = layer.weights().get(q, p);
                let probe = |delta: f64| {
                    let mut w = layer.weights().clone();
                    w.set(q, p, base + delta);
                    let model = rebuild(Some((l, w, layer.hidden_bias().to_vec())), None);
                    nll_loss(&model, &x, &labels).unwrap()
                };
                check(
                    grads.layers[l].0.get(q, p),
                    probe(fd),
                    probe(-fd),
                    &format!("layer {l} W[{q}][{p}]"),
                );
            }
        }
        for p in 0..layer.hidden_dim() {
            let probe = |delta: f64| {
                let mut b = layer.hidden_bias().to_vec();
                b[p] += delta;
                let model = rebuild(Some((l, layer.weights().clone(), b)), None);
                nll_loss(&model, &x, &labels).unwrap()
            };
            check(
                grads.layers[l].1[p],
                probe(fd),
                probe(-fd),
                &format!("layer {l} b[{p}]"),
            );
        }
    }
    for i in 0..h_last {
        for j in 0..n_classes {
            let probe = |delta: f64| {
                let mut w = head_weights.clone();
                w.set(i, j, w.get(i, j) + delta);
                let model = rebuild(None, Some((w, head_bias.clone())));
                nll_loss(&model, &x, &labels).unwrap()
            };
            check(
                grads.head_weights.get(i, j),
                probe(fd),
                probe(-fd),
                &format!("head W[{i}][{j}]"),
            );
        }
    }
    for j in 0..n_classes {
        let probe = |delta: f64| {
            let mut b = head_bias.clone();
            b[j] += delta;
            let model = rebuild(None, Some((head_weights.clone(), b)));
            nll_loss(&model, &x, &labels).unwrap()
        };
        check(
            grads.head_bias[j],
            probe(fd),
            probe(-fd),
            &format!("head b[{j}]"),
        );
    }
}

/// NLL on the full batch never increases over epochs at a tiny learning
/// rate, 20 seeds.
#[test]
fn nll_non_increasing_at_small_rate() {
    for seed in 1..=20u64 {
        let x = random_unit_batch(12, 6, seed.wrapping_add(300));
        let labels: Vec<u16> = (0..12).map(|i| (i % 3) as u16 + 1).collect();
        let pre = AeHyper {
            epochs: 2,
            batch_size: 6,
            seed,
            ..AeHyper::default()
        };
        let model = pretrain_stack(&[6, 4], &x, &[pre])
            .unwrap()
            .with_head(SoftmaxHead::zeros(4, 3))
            .unwrap();
        let ft = hsisae_core::FinetuneHyper {
            learning_rate: 1e-3,
            alpha: 0.1,
            epochs: 30,
            batch_size: 12,
            seed,
        };
        let (_, history) = finetune(model, &x, &labels, &ft).unwrap();
        for w in history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "seed {seed}: {} -> {}", w[0], w[1]);
        }
    }
}

/// encode_deep outputs stay inside (0, 1).
#[test]
fn deep_encodings_in_open_interval() {
    let x = random_unit_batch(20, 8, 17);
    let pre = AeHyper {
        epochs: 3,
        batch_size: 5,
        ..AeHyper::default()
    };
    let model = pretrain_stack(&[8, 6, 4], &x, &[pre]).unwrap();
    let reps = encode_deep(&model, &x).unwrap();
    assert!(reps.data().iter().all(|&v| v > 0.0 && v < 1.0));
}

/// Softmax argmax is invariant to adding a constant to all logits.
#[test]
fn softmax_argmax_shift_invariant() {
    let mut rng = Rng::new(23);
    for _ in 0..20 {
        let inputs = Matrix::from_fn(5, 4, |_, _| 6.0 * rng.next_f64() - 3.0);
        let head_id = SoftmaxHead::from_parts(Matrix::identity(4), vec![0.0; 4]);
        let head_shift = SoftmaxHead::from_parts(Matrix::identity(4), vec![11.5; 4]);
        let p1 = softmax_forward(&head_id, &inputs).unwrap();
        let p2 = softmax_forward(&head_shift, &inputs).unwrap();
        let arg = |row: &[f64]| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
        };
        for (r1, r2) in p1.data().chunks_exact(4).zip(p2.data().chunks_exact(4)) {
            assert_eq!(arg(r1), arg(r2));
        }
    }
}

/// Separable two-class data reaches 100% training accuracy, 10 seeds.
#[test]
fn svm_separable_data_fits_perfectly() {
    for seed in 1..=10u64 {
        let mut rng = Rng::new(seed);
        // Margin >= 0.5 between the cluster boxes.
        let x = Matrix::from_fn(30, 3, |i, _| {
            let center = if i < 15 { 0.15 } else { 0.85 };
            center + 0.1 * (rng.next_f64() - 0.5)
        });
        let labels: Vec<u16> = (0..30).map(|i| if i < 15 { 1 } else { 2 }).collect();
        let hyper = SvmHyper {
            lambda: 1e-4,
            epochs: 200,
            seed,
            ..SvmHyper::default()
        };
        let model = svm_train(&x, &labels, &hyper).unwrap();
        let pred = svm_predict(&model, &x).unwrap();
        assert_eq!(pred, labels, "seed {seed}");
    }
}

/// With the decaying schedule on separable data the per-class objective is
/// non-increasing at epoch boundaries (<= 1e-6 rise allowed), 10 seeds.
#[test]
fn svm_objective_non_increasing_at_epoch_boundaries() {
    for seed in 1..=10u64 {
        let mut rng = Rng::new(seed.wrapping_add(40));
        let x = Matrix::from_fn(24, 2, |i, _| {
            let center = if i < 12 { 0.1 } else { 0.9 };
            center + 0.08 * (rng.next_f64() - 0.5)
        });
        let labels: Vec<u16> = (0..24).map(|i| if i < 12 { 1 } else { 2 }).collect();
        // Evaluate the objective after each epoch by retraining with an
        // increasing epoch budget; shuffles replay identically because the
        // seed is fixed.
        let objectives: Vec<f64> = (1..=12)
            .map(|epochs| {
                let hyper = SvmHyper {
                    epochs,
                    seed,
                    ..SvmHyper::default()
                };
                let model = svm_train(&x, &labels, &hyper).unwrap();
                svm_objective(&model, 0, &x, &labels)
            })
            .collect();
        for (i, w) in objectives.windows(2).enumerate() {
            assert!(
                w[1] <= w[0] + 1e-6,
                "seed {seed}, epoch {}: {} -> {}",
                i + 1,
                w[0],
                w[1]
            );
        }
    }
}
