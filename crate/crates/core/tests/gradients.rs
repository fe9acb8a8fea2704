use rand::Rng;
use stockaug::augment::Sample;
use stockaug::classifier::{Architecture, ModelParams, RmsProp};
use stockaug::{RngStream, Series};

fn batch(len: usize, n: usize, seed: u64) -> Vec<Sample> {
    let mut rng = RngStream::new(seed).rng();
    (0..n)
        .map(|i| Sample {
            values: Series::new((0..len).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap(),
            label: (i % 2) as u8,
        })
        .collect()
}

/// Worst relative error between analytic and central-difference gradients.
fn worst_rel_error(params: &ModelParams, samples: &[Sample]) -> f64 {
    let refs: Vec<&Sample> = samples.iter().collect();
    let (_, grad) = params.loss_and_grad(&refs).unwrap();
    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..params.weights.len() {
        let mut plus = params.clone();
        plus.weights[k] += step;
        let mut minus = params.clone();
        minus.weights[k] -= step;
        let fd = (plus.loss_and_grad(&refs).unwrap().0 - minus.loss_and_grad(&refs).unwrap().0) / (2.0 * step);
        let denom = grad[k].abs().max(fd.abs()).max(1e-7);
        worst = worst.max((grad[k] - fd).abs() / denom);
    }
    worst
}

#[test]
fn lstm_gradient_matches_finite_differences() {
    let data = batch(12, 3, 1);
    let p = ModelParams::init(Architecture::lstm(12, 4), &RngStream::new(10));
    let err = worst_rel_error(&p, &data);
    assert!(err < 1e-4, "relative error {err}");
}

#[test]
fn logistic_gradient_matches_finite_differences() {
    let data = batch(12, 3, 2);
    let p = ModelParams::init(Architecture::logistic(12), &RngStream::new(11));
    let err = worst_rel_error(&p, &data);
    assert!(err < 1e-4, "relative error {err}");
}

#[test]
fn softmax_sums_to_one() {
    let mut rng = RngStream::new(3).rng();
    for k in 0..50 {
        let mut p = ModelParams::init(Architecture::lstm(20, 5), &RngStream::new(k));
        p.weights.iter_mut().for_each(|w| *w *= 4.0);
        let x: Vec<f64> = (0..20).map(|_| rng.random_range(-3.0..3.0)).collect();
        let pred = p.forward(&x).unwrap();
        assert!((pred.prob_up + pred.prob_down() - 1.0).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&pred.prob_up));
    }
}

#[test]
fn full_batch_rmsprop_descends() {
    let data = batch(12, 6, 4);
    let refs: Vec<&Sample> = data.iter().collect();
    for arch in [Architecture::lstm(12, 4), Architecture::logistic(12)] {
        let mut p = ModelParams::init(arch, &RngStream::new(5));
        let mut opt = RmsProp::new(p.weights.len(), 1e-4, 0.9, 1e-7);
        let mut last = f64::INFINITY;
        for _ in 0..10 {
            let (loss, grad) = p.loss_and_grad(&refs).unwrap();
            assert!(loss <= last, "{loss} > {last}");
            last = loss;
            opt.step(&mut p.weights, &grad);
        }
    }
}
