mod common;

use astute_core::generate::{generate, GeneratorKind, GeneratorSpec};
use astute_core::predict::{spectral_norm, train, Architecture, Dense, KernelConfig, LinearModel, Mlp, TrainConfig};
use astute_core::{rng, Dataset, Model, NormOrder, Predictor};
use common::*;
use rand::Rng;

fn loss(net: &Mlp, rows: &[f64], labels: &[u8]) -> f64 {
    net.loss_and_gradient(rows, labels).0
}

/// Rebuilds `net` with parameter `(layer, idx)` shifted by `h`; indices past
/// the weight count address the bias.
fn nudged(net: &Mlp, layer: usize, idx: usize, h: f64) -> Mlp {
    let mut layers: Vec<Dense> = net.layers().to_vec();
    let l = &mut layers[layer];
    let nw = l.weights.as_slice().len();
    if idx < nw {
        l.weights.as_mut_slice()[idx] += h;
    } else {
        l.bias[idx - nw] += h;
    }
    Mlp::new(layers).unwrap()
}

#[test]
fn gradients_match_central_differences() {
    let mut r = rng::stream(4, 0);
    for seed in 0..20 {
        let d = 2 + seed as usize % 5;
        let hidden: Vec<usize> = (0..1 + seed as usize % 3).map(|k| 3 + (k + seed as usize) % 5).collect();
        let net = random_mlp(seed, d, &hidden, 1.2);
        let n = 7;
        let rows: Vec<f64> = (0..n * d).map(|_| r.random_range(-2.0..2.0)).collect();
        let labels: Vec<u8> = (0..n).map(|_| r.random_range(0..2)).collect();
        let (_, grad) = net.loss_and_gradient(&rows, &labels);
        let h = 1e-5;
        for (li, (dw, db)) in grad.layers.iter().enumerate() {
            let analytic: Vec<f64> = dw.as_slice().iter().chain(db).copied().collect();
            for (idx, &g) in analytic.iter().enumerate() {
                let fd = (loss(&nudged(&net, li, idx, h), &rows, &labels)
                    - loss(&nudged(&net, li, idx, -h), &rows, &labels))
                    / (2.0 * h);
                // ReLU kinks make a few coordinates non-differentiable at the
                // sample; the absolute floor covers exactly-zero gradients.
                let err = (g - fd).abs() / g.abs().max(fd.abs()).max(1e-6);
                assert!(err <= 1e-4, "seed {seed} layer {li} param {idx}: {g} vs {fd}");
            }
        }
    }
}

fn blobs(n: usize, seed: u64) -> Dataset {
    let mut r = rng::stream(seed, 1);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let y = (i % 2) as u8;
        let c = if y == 1 { 2.0 } else { -2.0 };
        rows.push(vec![c + 0.5 * gaussian_vec(&mut r, 1)[0], c + 0.5 * gaussian_vec(&mut r, 1)[0]]);
        labels.push(y);
    }
    Dataset::from_rows(&rows, labels).unwrap()
}

#[test]
fn separable_blobs_are_learned_by_every_architecture() {
    let (tr, te) = (blobs(400, 1), blobs(200, 2));
    for arch in Architecture::ALL {
        let cfg = TrainConfig { hidden_width: 16, epochs: 20, ..TrainConfig::default() };
        let t = train(&tr, arch, &cfg, Some(&te)).unwrap();
        assert!(t.report.test_accuracy.unwrap() >= 0.95, "{arch}: {:?}", t.report);
    }
}

#[test]
fn orange_skin_mlp_beats_chance_and_untrained_does_not() {
    let data = generate(&GeneratorSpec::new(GeneratorKind::OrangeSkin, 3000, 7)).unwrap();
    let (tr, te) = data.split_at(2500).unwrap();
    let cfg = TrainConfig { hidden_width: 64, epochs: 20, ..TrainConfig::default() };
    let t = train(&tr, Architecture::Mlp2, &cfg, Some(&te)).unwrap();
    assert!(t.report.test_accuracy.unwrap() > 0.7, "{:?}", t.report);

    let idle = train(&tr, Architecture::Mlp2, &TrainConfig { epochs: 0, ..cfg }, Some(&te)).unwrap();
    assert_eq!(idle.report.steps, 0);
    assert!(idle.report.final_loss.is_none());
    let acc = idle.report.test_accuracy.unwrap();
    assert!((0.3..=0.7).contains(&acc), "{acc}");
}

#[test]
fn projection_caps_every_layer() {
    let data = generate(&GeneratorSpec::new(GeneratorKind::NonlinearAdditive, 600, 3)).unwrap();
    for cap in [0.5, 2.0] {
        for epochs in 0..3 {
            let cfg = TrainConfig {
                lipschitz_cap: Some(cap),
                hidden_width: 24,
                epochs,
                learning_rate: 0.05,
                ..TrainConfig::default()
            };
            let Model::Mlp(net) = train(&data, Architecture::Mlp4, &cfg, None).unwrap().model else {
                panic!("expected an mlp")
            };
            for layer in net.layers() {
                let s = spectral_norm(&layer.weights);
                assert!(s <= cap * (1.0 + 1e-6), "cap {cap} epochs {epochs}: {s}");
            }
        }
    }
}

#[test]
fn lipschitz_upper_bound_is_sound() {
    let data = generate(&GeneratorSpec::new(GeneratorKind::OrangeSkin, 500, 9)).unwrap();
    let cfg = TrainConfig { hidden_width: 32, epochs: 3, ..TrainConfig::default() };
    let models = [
        train(&data, Architecture::Mlp2, &cfg, None).unwrap().model,
        train(&data, Architecture::Linear, &cfg, None).unwrap().model,
        Model::Mlp(random_mlp(5, 10, &[30, 30, 30], 2.5)),
        Model::Linear(LinearModel::new((0..10).map(|i| i as f64 - 4.5).collect(), 0.3).unwrap()),
    ];
    let mut r = rng::stream(10, 0);
    for model in &models {
        for p in [1.0, 2.0, f64::INFINITY] {
            let ord = NormOrder::new(p).unwrap();
            let l = model.known_lipschitz_upper(ord).unwrap();
            for _ in 0..10_000 {
                let x = gaussian_vec(&mut r, 10);
                let scale = r.random_range(1e-3..2.0);
                let y: Vec<f64> = x.iter().map(|v| v + scale * gaussian_vec(&mut r, 1)[0]).collect();
                let gap = (model.eval(&x) - model.eval(&y)).abs();
                assert!(gap <= l * lp(&x, &y, p) * (1.0 + 1e-9), "{} p={p}", model.kind());
            }
        }
    }
    let kernel = train(&data, Architecture::Kernel, &TrainConfig::default(), None).unwrap().model;
    assert!(kernel.known_lipschitz_upper(NormOrder::L2).is_none());
}

#[test]
fn training_is_deterministic() {
    let data = generate(&GeneratorSpec::new(GeneratorKind::Switch, 400, 1)).unwrap();
    for arch in Architecture::ALL {
        let cfg = TrainConfig {
            hidden_width: 20,
            epochs: 2,
            seed: 4,
            lipschitz_cap: Some(1.0),
            kernel: KernelConfig { max_centers: 100, ..KernelConfig::default() },
            ..TrainConfig::default()
        };
        let a = train(&data, arch, &cfg, None).unwrap();
        let b = train(&data, arch, &cfg, None).unwrap();
        assert_eq!(a, b, "{arch}");
        let c = train(&data, arch, &TrainConfig { seed: 5, ..cfg }, None).unwrap();
        assert_ne!(a.model, c.model, "{arch}");
    }
}

#[test]
fn divergence_and_bad_configs_are_errors() {
    let data = blobs(100, 3);
    let huge = TrainConfig { learning_rate: 1e306, hidden_width: 8, ..TrainConfig::default() };
    let err = train(&data, Architecture::Mlp2, &huge, None).unwrap_err();
    assert!(err.is_numeric(), "{err}");
    for bad in [
        TrainConfig { batch_size: 0, ..TrainConfig::default() },
        TrainConfig { learning_rate: -1.0, ..TrainConfig::default() },
        TrainConfig { momentum: 1.0, ..TrainConfig::default() },
        TrainConfig { lipschitz_cap: Some(0.0), ..TrainConfig::default() },
    ] {
        assert!(!train(&data, Architecture::Linear, &bad, None).unwrap_err().is_numeric());
    }
}
