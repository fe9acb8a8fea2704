//! Logistic regression on the raw window: `P(up) = sigmoid(w·x + b)`.

pub fn param_count(input_len: usize) -> usize {
    input_len + 1
}

pub fn logit(w: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    w[n] + w[..n].iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
}

pub fn accumulate_grad(w: &[f64], x: &[f64], label: u8, grad: &mut [f64]) -> f64 {
    let z = logit(w, x);
    let y = f64::from(label);
    // softplus(z) - y z, written to avoid overflow
    let loss = z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z;
    let d = super::sigmoid(z) - y;
    let n = x.len();
    for (g, xi) in grad[..n].iter_mut().zip(x) {
        *g += d * xi;
    }
    grad[n] += d;
    loss
}

pub fn init(input_len: usize, mut uniform: impl FnMut(f64) -> f64) -> Vec<f64> {
    let bound = 1.0 / (input_len as f64).sqrt();
    (0..param_count(input_len)).map(|_| uniform(bound)).collect()
}
