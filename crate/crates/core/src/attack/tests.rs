use proptest::prelude::*;

use super::*;
use crate::arch::{Architecture, LayerSpec};
use crate::model::{Dataset, FloatModel, LayerParams};
use crate::quant::{BitWidth, QuantLayer, QuantModel, QuantParams};
use crate::reconstruction::ReconstructionMethod;
use crate::tensor::Tensor;

fn two_filter_model(a: f64, b: f64) -> QuantModel<f64> {
    let arch = Architecture::new(vec![LayerSpec::conv(1, 2, 1), LayerSpec::Flatten], vec![1, 1, 1], 2).unwrap();
    let m = FloatModel::new(
        arch,
        vec![LayerParams {
            weight: Tensor::new(vec![2, 1, 1, 1], vec![a, b]).unwrap(),
            bias: Tensor::zeros(vec![2]),
        }],
    )
    .unwrap();
    QuantModel::quantize(&m, BitWidth::new(8).unwrap()).unwrap()
}

/// Two conv layers and a dense head with arbitrary codes.
fn coded_model(codes: [Vec<i8>; 3], scales: [f64; 3], bits: u8) -> QuantModel<f64> {
    let arch = Architecture::new(
        vec![
            LayerSpec::conv(1, 3, 2),
            LayerSpec::ReLU,
            LayerSpec::conv(3, 2, 2),
            LayerSpec::Flatten,
            LayerSpec::dense(2, 3),
        ],
        vec![1, 3, 3],
        3,
    )
    .unwrap();
    let width = BitWidth::new(bits).unwrap();
    let layers = codes
        .into_iter()
        .zip(scales)
        .zip([3usize, 2, 3])
        .map(|((codes, scale), n)| QuantLayer {
            params: QuantParams { width, scale },
            codes,
            bias: Tensor::zeros(vec![n]),
        })
        .collect();
    QuantModel::new(arch, layers).unwrap()
}

const LAYER_SIZES: [usize; 3] = [12, 24, 6];

fn arb_coded_model() -> impl Strategy<Value = QuantModel<f64>> {
    (0usize..3).prop_flat_map(|bi| {
        let width = BitWidth::new(BitWidth::SUPPORTED[bi]).unwrap();
        let code = width.min_value()..=width.max_value();
        (
            prop::collection::vec(code.clone(), LAYER_SIZES[0]),
            prop::collection::vec(code.clone(), LAYER_SIZES[1]),
            prop::collection::vec(code, LAYER_SIZES[2]),
            prop::array::uniform3(0.01f64..1.0),
        )
            .prop_map(move |(a, b, c, s)| coded_model([a, b, c], s, width.bits()))
    })
}

#[test]
fn larger_filter_wins_first() {
    let q = two_filter_model(5.0, 1.0);
    assert_eq!(q.layers()[0].codes, vec![127, 25]);
    let v = select_vulnerable_bits(&q, 1).unwrap();
    assert_eq!(v, vec![FlipRecord::new(0, 0, 0, 7)]);
}

#[test]
fn second_pick_moves_to_other_filter_after_collapse() {
    let q = two_filter_model(5.0, 1.0);
    let v = select_vulnerable_bits(&q, 2).unwrap();
    assert_eq!(v, vec![FlipRecord::new(0, 0, 0, 7), FlipRecord::new(0, 1, 0, 7)]);
}

#[test]
fn all_zero_model_picks_first_weight() {
    let q = coded_model([vec![0; 12], vec![0; 24], vec![0; 6]], [1.0; 3], 8);
    assert_eq!(
        select_vulnerable_bits(&q, 1).unwrap(),
        vec![FlipRecord::new(0, 0, 0, 7)]
    );
}

#[test]
fn rejects_bad_flip_counts() {
    let q = two_filter_model(5.0, 1.0);
    assert!(select_vulnerable_bits(&q, 0).is_err());
    assert!(select_vulnerable_bits(&q, 3).is_err());
    assert_eq!(select_vulnerable_bits(&q, 2).unwrap().len(), 2);
}

#[test]
fn normalization_compares_layers_fairly() {
    // Layer 1 filters have 12 weights, layer 0 filters 4: equal codes and
    // scales give layer 0 the larger normalized score.
    let q = coded_model([vec![50; 12], vec![50; 24], vec![0; 6]], [1.0, 1.0, 1.0], 8);
    assert_eq!(select_vulnerable_bits(&q, 1).unwrap()[0].filter.layer, 0);
}

#[test]
fn dense_rows_are_filters() {
    let q = coded_model([vec![1; 12], vec![1; 24], vec![0, 0, 90, 0, 0, 0]], [0.1, 0.1, 0.1], 8);
    assert_eq!(
        select_vulnerable_bits(&q, 1).unwrap(),
        vec![FlipRecord::new(2, 1, 0, 7)]
    );
}

#[test]
fn random_bits_are_distinct_and_seeded() {
    let q = coded_model([vec![3; 12], vec![-3; 24], vec![7; 6]], [0.1; 3], 6);
    let total = q.total_weight_bits();
    let all = select_random_bits(&q, total, 9).unwrap();
    let set: std::collections::HashSet<_> = all.iter().collect();
    assert_eq!(set.len(), total);
    assert_eq!(
        select_random_bits(&q, 20, 4).unwrap(),
        select_random_bits(&q, 20, 4).unwrap()
    );
    assert_ne!(
        select_random_bits(&q, 20, 4).unwrap(),
        select_random_bits(&q, 20, 5).unwrap()
    );
    assert!(select_random_bits(&q, total + 1, 0).is_err());
}

#[test]
fn random_bits_spread_across_layers() {
    // Per-layer hit counts over many seeds follow each layer's share of bits.
    let q = coded_model([vec![3; 12], vec![-3; 24], vec![7; 6]], [0.1; 3], 8);
    let mut hits = [0f64; 3];
    let draws = 400;
    for seed in 0..draws {
        for r in select_random_bits(&q, 5, seed).unwrap() {
            hits[r.filter.layer] += 1.0;
        }
    }
    let n = (draws * 5) as f64;
    let chi2: f64 = LAYER_SIZES
        .iter()
        .zip(hits)
        .map(|(&s, h)| {
            let e = n * s as f64 / 42.0;
            (h - e).powi(2) / e
        })
        .sum();
    // 2 degrees of freedom; 13.8 is the 0.1% critical value.
    assert!(chi2 < 13.8, "chi-square {chi2}, hits {hits:?}");
}

fn tiny_dataset() -> Dataset<f64> {
    let inputs = (0..6)
        .map(|i| {
            Tensor::new(
                vec![1, 3, 3],
                (0..9).map(|j| ((i * 9 + j) % 7) as f64 / 7.0 - 0.3).collect(),
            )
            .unwrap()
        })
        .collect();
    Dataset::new(inputs, vec![0, 1, 2, 0, 1, 2], 3, vec![1, 3, 3]).unwrap()
}

#[test]
fn gradient_ranking_flips_toward_loss_ascent() {
    let codes = [
        (0..12).map(|i| (i * 13 % 50) as i8 - 25).collect(),
        (0..24).map(|i| (i * 7 % 60) as i8 - 30).collect(),
        (0..6).map(|i| (i * 11 % 40) as i8 - 20).collect(),
    ];
    let q = coded_model(codes, [0.05, 0.05, 0.1], 8);
    let data = tiny_dataset();
    let recs = select_gradient_bits(&q, &data, 5).unwrap();
    assert_eq!(recs.len(), 5);
    let (_, grads) = crate::backprop::gradient(&q.dequantize(), &data).unwrap();
    for r in &recs {
        assert_eq!(r.bit, 7);
        let i = r.code_index(&q).unwrap();
        let g = grads[r.filter.layer].weight.data()[i];
        let c = q.layers()[r.filter.layer].codes[i];
        let delta = if c < 0 { 128.0 } else { -128.0 };
        assert!(delta * g > 0.0);
    }
    assert_eq!(recs, select_gradient_bits(&q, &data, 5).unwrap());
    let empty = Dataset::<f64>::new(vec![], vec![], 3, vec![1, 3, 3]).unwrap();
    assert!(select_gradient_bits(&q, &empty, 5).is_err());
}

#[test]
fn run_attack_trace_shape() {
    let codes = [
        (0..12).map(|i| (i * 13 % 50) as i8 - 25).collect(),
        (0..24).map(|i| (i * 7 % 60) as i8 - 30).collect(),
        (0..6).map(|i| (i * 11 % 40) as i8 - 20).collect(),
    ];
    let q = coded_model(codes, [0.05, 0.05, 0.1], 8);
    let data = tiny_dataset();
    for ranking in [
        RankingMethod::Fl2r,
        RankingMethod::RandomBits { seed: 3 },
        RankingMethod::GradientBaseline { batch: 4 },
    ] {
        let t = run_attack(&q, 0.8, 1, ranking, ReconstructionMethod::Czr, 4, &data).unwrap();
        assert_eq!(t.accuracy.len(), 5);
        assert_eq!(t.flips.len(), 4);
        assert!(t.accuracy.iter().all(|a| (0.0..=1.0).contains(a)));
        assert_eq!(t.accuracy[0], q.accuracy(&data).unwrap());
        let end = apply_flips(&q, &t.flips).unwrap();
        assert_eq!(*t.accuracy.last().unwrap(), end.accuracy(&data).unwrap());
    }
}

#[test]
fn full_recovery_attack_matches_white_box() {
    let codes = [
        (0..12).map(|i| (i * 13 % 50) as i8 - 25).collect(),
        (0..24).map(|i| (i * 7 % 60) as i8 - 30).collect(),
        (0..6).map(|i| (i * 11 % 40) as i8 - 20).collect(),
    ];
    let q = coded_model(codes, [0.05, 0.05, 0.1], 8);
    let direct = select_vulnerable_bits(&q, 10).unwrap();
    for recon in ReconstructionMethod::ALL {
        let t = run_attack(&q, 1.0, 77, RankingMethod::Fl2r, recon, 10, &tiny_dataset()).unwrap();
        assert_eq!(t.flips, direct);
    }
}

#[test]
fn ranking_names_round_trip() {
    for r in [
        RankingMethod::Fl2r,
        RankingMethod::RandomBits { seed: 12 },
        RankingMethod::GradientBaseline { batch: 32 },
    ] {
        assert_eq!(r.to_string().parse::<RankingMethod>().unwrap(), r);
    }
    assert_eq!(
        "random".parse::<RankingMethod>().unwrap(),
        RankingMethod::RandomBits { seed: 0 }
    );
    assert!("fl2r:3".parse::<RankingMethod>().is_err());
    assert!("hessian".parse::<RankingMethod>().is_err());
}

#[test]
fn apply_flips_rejects_invalid_records() {
    let q = two_filter_model(5.0, 1.0);
    assert!(apply_flips(&q, &[FlipRecord::new(1, 0, 0, 7)]).is_err());
    assert!(apply_flips(&q, &[FlipRecord::new(0, 2, 0, 7)]).is_err());
    assert!(apply_flips(&q, &[FlipRecord::new(0, 0, 1, 7)]).is_err());
    assert!(apply_flips(&q, &[FlipRecord::new(0, 0, 0, 8)]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn fl2r_never_repeats_a_weight(q in arb_coded_model(), n in 1usize..=42) {
        let v = select_vulnerable_bits(&q, n).unwrap();
        prop_assert_eq!(v.len(), n);
        let set: std::collections::HashSet<_> = v.iter().map(|r| (r.filter, r.weight)).collect();
        prop_assert_eq!(set.len(), n);
    }

    #[test]
    fn positive_scaling_keeps_selection_order(q in arb_coded_model(), k in -3i32..=3, n in 1usize..=20) {
        let lambda = 2f64.powi(k);
        let layers: Vec<_> = q.layers().iter().map(|l| {
            let mut l = l.clone();
            l.params.scale *= lambda;
            l
        }).collect();
        let scaled = QuantModel::new(q.architecture().clone(), layers).unwrap();
        prop_assert_eq!(select_vulnerable_bits(&q, n).unwrap(), select_vulnerable_bits(&scaled, n).unwrap());
    }

    #[test]
    fn double_flip_restores_victim(q in arb_coded_model(), l in 0usize..3, w in 0usize..100, bit in 0u8..8) {
        let spec = q.architecture().parametric_layer(l).unwrap();
        let idx = w % (spec.filter_count() * spec.filter_size());
        let bit = bit % q.layers()[l].params.width.bits();
        let r = FlipRecord::new(l, idx / spec.filter_size(), idx % spec.filter_size(), bit);
        let once = apply_flips(&q, &[r]).unwrap();
        prop_assert_ne!(&once, &q);
        prop_assert_eq!(apply_flips(&once, &[r]).unwrap(), q.clone());
        prop_assert_eq!(apply_flips(&q, &[r, r]).unwrap(), q);
    }
}
