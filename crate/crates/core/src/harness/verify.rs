//! Built-in self checks: exhaustive code algebra, quantization bounds,
//! finite-difference gradients and flip-selection fuzzing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::arch::{Architecture, LayerSpec};
use crate::attack::{apply_flips, select_vulnerable_bits, FlipRecord};
use crate::backprop::{gradient, mean_loss};
use crate::model::{Dataset, FloatModel, LayerParams};
use crate::quant::{compute_scale, dequantize, quantize, BitWidth, Code, QuantLayer, QuantModel, QuantParams};
use crate::reconstruction::{oracle_min_abs, reconstruct_code, ReconstructionMethod};
use crate::recovery::PartialCode;
use crate::tensor::Tensor;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, failures: Vec<String>, ok_detail: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            ok_detail
        } else {
            format!("{} failure(s); first: {}", failures.len(), failures[0])
        };
        Self { name, passed, detail }
    }
}

/// CZR equals the exhaustive minimum-magnitude completion for every (code, mask) pair.
pub fn check_czr_oracle() -> CheckOutcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for b in BitWidth::SUPPORTED {
        let width = BitWidth::new(b).unwrap();
        for bits in 0..=width.mask() {
            for mask in 0..=width.mask() {
                let p = PartialCode::new(bits, mask, width);
                pairs += 1;
                let (czr, oracle) = (reconstruct_code(p, ReconstructionMethod::Czr), oracle_min_abs(p));
                if czr != oracle {
                    failures.push(format!(
                        "{b}-bit bits={bits:#b} mask={mask:#b}: czr {czr} oracle {oracle}"
                    ));
                }
            }
        }
    }
    CheckOutcome::new("czr-oracle", failures, format!("{pairs} (code, mask) pairs"))
}

/// Sign-bit flips shift by exactly 2^(N_q−1); top-quartile codes land within 2^(N_q−3) of zero.
pub fn check_sign_bit_algebra() -> CheckOutcome {
    let mut failures = Vec::new();
    for b in BitWidth::SUPPORTED {
        let width = BitWidth::new(b).unwrap();
        let shift = 1i16 << (b - 1);
        let quarter = 1i16 << (b - 3);
        for v in width.values() {
            let c = Code::new(v, width).unwrap();
            let f = c.flip_bit(width.sign_bit()).unwrap();
            if (f.value() as i16 - v as i16).abs() != shift {
                failures.push(format!("{b}-bit {v} -> {}", f.value()));
            }
            if (v as i16) >= shift - quarter && (f.value() as i16).abs() > quarter {
                failures.push(format!("{b}-bit top-quartile {v} -> {}", f.value()));
            }
        }
    }
    CheckOutcome::new("sign-bit-algebra", failures, "N_q in {4, 6, 8}".into())
}

/// `|dequantize(quantize(w)) − clamp(w)| ≤ s/2 + 1e−9` on random weights, with
/// the scale from the weights and with a fixed scale that forces clamping.
pub fn check_quant_round_trip(samples: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for b in BitWidth::SUPPORTED {
        let width = BitWidth::new(b).unwrap();
        let weights: Vec<f64> = (0..samples).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fitted = compute_scale(&weights, width).unwrap();
        let tight = fitted * 0.5;
        for s in [fitted, tight] {
            let (lo, hi) = (width.min_value() as f64 * s, width.max_value() as f64 * s);
            for &w in &weights {
                let err = (dequantize(quantize(w, s, width), s) - w.clamp(lo, hi)).abs();
                if err > s / 2.0 + 1e-9 {
                    failures.push(format!("{b}-bit w={w} s={s} err={err}"));
                }
            }
        }
    }
    CheckOutcome::new("quant-round-trip", failures, format!("{samples} weights per bit width"))
}

/// Worst per-parameter relative error between analytic and central-difference gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub parameters: usize,
}

/// Relative error `|a − n| / max(|a|, |n|, floor)`; the floor keeps vanishing
/// gradients from dividing by zero.
pub const GRADIENT_ERROR_FLOOR: f64 = 1e-6;

pub fn finite_difference_check(model: &FloatModel<f64>, batch: &Dataset<f64>, step: f64) -> GradientCheck {
    let (_, analytic) = gradient(model, batch).expect("non-empty batch");
    let mut probe = model.clone();
    let mut worst = 0f64;
    let mut parameters = 0;
    for l in 0..model.params().len() {
        for which in 0..2 {
            let n = if which == 0 {
                model.params()[l].weight.len()
            } else {
                model.params()[l].bias.len()
            };
            for i in 0..n {
                let orig = *param_mut(&mut probe, l, which, i);
                *param_mut(&mut probe, l, which, i) = orig + step;
                let up = mean_loss(&probe, batch).unwrap();
                *param_mut(&mut probe, l, which, i) = orig - step;
                let down = mean_loss(&probe, batch).unwrap();
                *param_mut(&mut probe, l, which, i) = orig;
                let numeric = (up - down) / (2.0 * step);
                let a = if which == 0 {
                    analytic[l].weight.data()[i]
                } else {
                    analytic[l].bias.data()[i]
                };
                let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(GRADIENT_ERROR_FLOOR);
                worst = worst.max(rel);
                parameters += 1;
            }
        }
    }
    GradientCheck {
        max_relative_error: worst,
        parameters,
    }
}

/// Weight (`which == 0`) or bias entry `i` of parametric layer `l`.
fn param_mut(m: &mut FloatModel<f64>, l: usize, which: usize, i: usize) -> &mut f64 {
    let p = &mut m.params_mut()[l];
    let t = if which == 0 { &mut p.weight } else { &mut p.bias };
    &mut t.data_mut()[i]
}

/// Conv (padded) → ReLU → MaxPool → Conv → ReLU → Flatten → Dense with
/// Gaussian weights and a small random batch.
pub fn tiny_random_problem(seed: u64) -> (FloatModel<f64>, Dataset<f64>) {
    let arch = Architecture::new(
        vec![
            LayerSpec::Conv2D {
                c_in: 1,
                c_out: 2,
                kernel: 2,
                stride: 1,
                padding: 1,
            },
            LayerSpec::ReLU,
            LayerSpec::MaxPool { window: 2 },
            LayerSpec::conv(2, 3, 2),
            LayerSpec::ReLU,
            LayerSpec::Flatten,
            LayerSpec::dense(12, 3),
        ],
        vec![1, 5, 5],
        3,
    )
    .expect("valid tiny architecture");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 0.7).unwrap();
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| normal.sample(&mut rng)).collect() };
    let params = arch
        .parametric()
        .map(|(_, s)| {
            let shape = s.weight_shape().unwrap();
            let n = shape.iter().product();
            LayerParams {
                weight: Tensor::new(shape, draw(n)).unwrap(),
                bias: Tensor::new(vec![s.filter_count()], draw(s.filter_count())).unwrap(),
            }
        })
        .collect();
    let model = FloatModel::new(arch, params).unwrap();
    let inputs = (0..4).map(|_| Tensor::new(vec![1, 5, 5], draw(25)).unwrap()).collect();
    let batch = Dataset::new(inputs, vec![0, 1, 2, 1], 3, vec![1, 5, 5]).unwrap();
    (model, batch)
}

pub fn check_gradients(seed: u64) -> CheckOutcome {
    let (model, batch) = tiny_random_problem(seed);
    let g = finite_difference_check(&model, &batch, 1e-3);
    let failures = if g.max_relative_error <= 1e-4 {
        vec![]
    } else {
        vec![format!("max relative error {:e}", g.max_relative_error)]
    };
    CheckOutcome::new(
        "gradient-finite-difference",
        failures,
        format!(
            "{} parameters, max relative error {:.2e}",
            g.parameters, g.max_relative_error
        ),
    )
}

/// Random single-layer-per-kind quantized model with random codes.
pub fn random_quant_model(rng: &mut impl Rng) -> QuantModel<f64> {
    let c1 = rng.random_range(1..4);
    let k = rng.random_range(1..3);
    let classes = rng.random_range(2..5);
    let arch = Architecture::new(
        vec![
            LayerSpec::conv(1, c1, k),
            LayerSpec::ReLU,
            LayerSpec::Flatten,
            LayerSpec::dense(c1 * (4 - k) * (4 - k), classes),
        ],
        vec![1, 3, 3],
        classes,
    )
    .unwrap();
    let width = BitWidth::new(BitWidth::SUPPORTED[rng.random_range(0..3)]).unwrap();
    let layers = arch
        .parametric()
        .map(|(_, s)| QuantLayer {
            params: QuantParams {
                width,
                scale: rng.random_range(0.001..1.0),
            },
            codes: (0..s.filter_count() * s.filter_size())
                .map(|_| rng.random_range(width.min_value()..=width.max_value()))
                .collect(),
            bias: Tensor::zeros(vec![s.filter_count()]),
        })
        .collect();
    QuantModel::new(arch, layers).unwrap()
}

/// FL2R never repeats a weight; flipping any single record twice is the identity.
pub fn check_flip_fuzz(instances: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for case in 0..instances {
        let q = random_quant_model(&mut rng);
        let n_bf = rng.random_range(1..=q.weight_count());
        let recs = select_vulnerable_bits(&q, n_bf).unwrap();
        let mut seen = std::collections::HashSet::new();
        if recs.len() != n_bf || !recs.iter().all(|r| seen.insert((r.filter, r.weight, r.bit))) {
            failures.push(format!("case {case}: duplicate or missing records"));
        }
        let layer = rng.random_range(0..q.layers().len());
        let spec = q.architecture().parametric_layer(layer).unwrap();
        let r = FlipRecord::new(
            layer,
            rng.random_range(0..spec.filter_count()),
            rng.random_range(0..spec.filter_size()),
            rng.random_range(0..q.layers()[layer].params.width.bits()),
        );
        if apply_flips(&q, &[r, r]).unwrap() != q || apply_flips(&apply_flips(&q, &[r]).unwrap(), &[r]).unwrap() != q {
            failures.push(format!("case {case}: double flip of {r} is not the identity"));
        }
    }
    CheckOutcome::new("flip-fuzz", failures, format!("{instances} random instances"))
}

/// Every built-in check with its default parameters.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        check_czr_oracle(),
        check_sign_bit_algebra(),
        check_quant_round_trip(10_000, 1),
        check_gradients(7),
        check_flip_fuzz(1_000, 11),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for c in run_all() {
            println!("{}: {}", c.name, c.detail);
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
