use bitsiege::arch::Architecture;
use bitsiege::fixtures::{build_victim, gen_synthetic, train, train_with_history, SynthSpec, TrainConfig, TrainSpec};
use bitsiege::quant::BitWidth;
use bitsiege::{Error, QuantModel32};

fn noiseless() -> SynthSpec {
    SynthSpec {
        classes: 4,
        samples_per_class: 50,
        input_shape: vec![1, 8, 8],
        noise: 0.0,
        seed: 7,
    }
}

fn cfg(epochs: usize, learning_rate: f64) -> TrainConfig {
    TrainConfig {
        epochs,
        learning_rate,
        batch_size: 16,
        seed: 7,
    }
}

#[test]
fn loss_never_rises_on_separable_data() {
    let (data, _) = gen_synthetic::<f64>(&noiseless()).unwrap();
    let arch = Architecture::desk_cnn(4).unwrap();
    let (_, history) = train_with_history(&arch, &data, &cfg(8, 0.02)).unwrap();
    assert_eq!(history.len(), 8);
    for w in history.windows(2) {
        assert!(w[1] <= w[0], "loss rose: {history:?}");
    }
    assert!(history[7] < history[0] * 0.5, "{history:?}");
}

#[test]
fn same_seed_same_weights() {
    let (data, _) = gen_synthetic::<f32>(&noiseless()).unwrap();
    let arch = Architecture::desk_cnn(4).unwrap();
    let a = train(&arch, &data, &cfg(2, 0.05)).unwrap();
    let b = train(&arch, &data, &cfg(2, 0.05)).unwrap();
    assert_eq!(a, b);
    let c = train(
        &arch,
        &data,
        &TrainConfig {
            seed: 8,
            ..cfg(2, 0.05)
        },
    )
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn overflowing_learning_rate_diverges() {
    let (data, _) = gen_synthetic::<f32>(&noiseless()).unwrap();
    let arch = Architecture::desk_cnn(4).unwrap();
    let err = train(&arch, &data, &cfg(2, 1e300)).unwrap_err();
    assert!(matches!(err, Error::Diverged { .. }), "{err}");
}

#[test]
fn desk_victim_is_accurate_before_and_after_quantization() {
    let victim = build_victim(&TrainSpec::desk()).unwrap();
    assert_eq!(victim.test.len(), 800);
    let float = victim.model.accuracy(&victim.test).unwrap();
    assert!(float >= 0.90, "float accuracy {float}");
    for bits in [8, 6] {
        let q = QuantModel32::quantize(&victim.model, BitWidth::new(bits).unwrap()).unwrap();
        let acc = q.accuracy(&victim.test).unwrap();
        assert!(acc >= float - 0.05, "{bits}-bit accuracy {acc} vs float {float}");
    }
}
