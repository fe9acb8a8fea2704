//! Single-layer LSTM over a univariate sequence, with a two-logit head.
//!
//! Flat weight layout, gate order (input, forget, cell, output):
//!
//! ```text
//! w_x  [4H]        input weights (one input feature)
//! w_h  [4H x H]    recurrent weights, row = gate unit
//! b    [4H]        gate biases
//! v    [2 x H]     output weights
//! c    [2]         output biases
//! ```

use std::ops::Range;

pub fn param_count(hidden: usize) -> usize {
    4 * (hidden + hidden * hidden + hidden) + 2 * hidden + 2
}

pub(crate) struct Layout {
    pub h: usize,
    pub w_x: Range<usize>,
    pub w_h: Range<usize>,
    pub b: Range<usize>,
    pub v: Range<usize>,
    pub c: Range<usize>,
}

impl Layout {
    pub fn new(h: usize) -> Self {
        let g = 4 * h;
        let w_x = 0..g;
        let w_h = g..g + g * h;
        let b = w_h.end..w_h.end + g;
        let v = b.end..b.end + 2 * h;
        let c = v.end..v.end + 2;
        Layout { h, w_x, w_h, b, v, c }
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-step activations kept for the backward pass.
struct Trace {
    /// [T x 4H] post-activation gates i, f, g, o
    gates: Vec<f64>,
    /// [(T+1) x H] cell states, row 0 is the zero initial state
    cells: Vec<f64>,
    /// [(T+1) x H] hidden states, row 0 is the zero initial state
    hidden: Vec<f64>,
    /// [T x H] tanh of each step's cell state
    cell_tanh: Vec<f64>,
}

fn run(l: &Layout, w: &[f64], x: &[f64], keep: bool) -> (Vec<f64>, Option<Trace>) {
    let h = l.h;
    let g4 = 4 * h;
    let (w_x, w_h, b) = (&w[l.w_x.clone()], &w[l.w_h.clone()], &w[l.b.clone()]);
    // column-major copy so the recurrent product is a sequence of axpys
    let mut w_ht = vec![0.0; g4 * h];
    for k in 0..g4 {
        for u in 0..h {
            w_ht[u * g4 + k] = w_h[k * h + u];
        }
    }
    let steps = x.len();
    let mut trace = keep.then(|| Trace {
        gates: vec![0.0; steps * g4],
        cells: vec![0.0; (steps + 1) * h],
        hidden: vec![0.0; (steps + 1) * h],
        cell_tanh: vec![0.0; steps * h],
    });
    let mut hs = vec![0.0; h];
    let mut cs = vec![0.0; h];
    let mut tc = vec![0.0; h];
    let mut a = vec![0.0; g4];
    for (t, &xt) in x.iter().enumerate() {
        for k in 0..g4 {
            a[k] = b[k] + w_x[k] * xt;
        }
        for (u, &hv) in hs.iter().enumerate() {
            let col = &w_ht[u * g4..(u + 1) * g4];
            for (ak, wk) in a.iter_mut().zip(col) {
                *ak += wk * hv;
            }
        }
        for u in 0..h {
            let i = sigmoid(a[u]);
            let f = sigmoid(a[h + u]);
            let g = a[2 * h + u].tanh();
            let o = sigmoid(a[3 * h + u]);
            cs[u] = f * cs[u] + i * g;
            tc[u] = cs[u].tanh();
            hs[u] = o * tc[u];
            a[u] = i;
            a[h + u] = f;
            a[2 * h + u] = g;
            a[3 * h + u] = o;
        }
        if let Some(tr) = trace.as_mut() {
            tr.gates[t * g4..(t + 1) * g4].copy_from_slice(&a);
            tr.cells[(t + 1) * h..(t + 2) * h].copy_from_slice(&cs);
            tr.hidden[(t + 1) * h..(t + 2) * h].copy_from_slice(&hs);
            tr.cell_tanh[t * h..(t + 1) * h].copy_from_slice(&tc);
        }
    }
    let (v, c) = (&w[l.v.clone()], &w[l.c.clone()]);
    let logits = (0..2)
        .map(|k| c[k] + v[k * h..(k + 1) * h].iter().zip(&hs).map(|(a, b)| a * b).sum::<f64>())
        .collect();
    (logits, trace)
}

/// Two logits (down, up) for one sequence.
pub fn logits(hidden: usize, w: &[f64], x: &[f64]) -> [f64; 2] {
    let (z, _) = run(&Layout::new(hidden), w, x, false);
    [z[0], z[1]]
}

/// Cross-entropy of one sample; adds its gradient into `grad`.
pub fn accumulate_grad(hidden: usize, w: &[f64], x: &[f64], label: u8, grad: &mut [f64]) -> f64 {
    let l = Layout::new(hidden);
    let h = hidden;
    let g4 = 4 * h;
    let (z, trace) = run(&l, w, x, true);
    let tr = trace.expect("trace requested");
    let (p, loss) = super::softmax_ce([z[0], z[1]], label);

    let y = usize::from(label);
    let dz = [p[0] - f64::from(y == 0), p[1] - f64::from(y == 1)];
    let steps = x.len();
    let h_last = &tr.hidden[steps * h..(steps + 1) * h];
    let v = &w[l.v.clone()];
    for k in 0..2 {
        for u in 0..h {
            grad[l.v.start + k * h + u] += dz[k] * h_last[u];
        }
        grad[l.c.start + k] += dz[k];
    }
    let mut dh: Vec<f64> = (0..h).map(|u| dz[0] * v[u] + dz[1] * v[h + u]).collect();
    let mut dc_next = vec![0.0; h];
    let mut da = vec![0.0; g4];
    let w_h = &w[l.w_h.clone()];

    for t in (0..steps).rev() {
        let gates = &tr.gates[t * g4..(t + 1) * g4];
        let c_prev = &tr.cells[t * h..(t + 1) * h];
        let c_tanh = &tr.cell_tanh[t * h..(t + 1) * h];
        for u in 0..h {
            let (i, f, g, o) = (gates[u], gates[h + u], gates[2 * h + u], gates[3 * h + u]);
            let tc = c_tanh[u];
            let d_o = dh[u] * tc;
            let dc = dc_next[u] + dh[u] * o * (1.0 - tc * tc);
            da[u] = dc * g * i * (1.0 - i);
            da[h + u] = dc * c_prev[u] * f * (1.0 - f);
            da[2 * h + u] = dc * i * (1.0 - g * g);
            da[3 * h + u] = d_o * o * (1.0 - o);
            dc_next[u] = dc * f;
        }
        let h_prev = &tr.hidden[t * h..(t + 1) * h];
        let xt = x[t];
        for k in 0..g4 {
            let d = da[k];
            grad[l.w_x.start + k] += d * xt;
            grad[l.b.start + k] += d;
            let row = &mut grad[l.w_h.start + k * h..l.w_h.start + (k + 1) * h];
            for (gr, hp) in row.iter_mut().zip(h_prev) {
                *gr += d * hp;
            }
        }
        dh.iter_mut().for_each(|v| *v = 0.0);
        for k in 0..g4 {
            let d = da[k];
            let row = &w_h[k * h..(k + 1) * h];
            for (dv, wr) in dh.iter_mut().zip(row) {
                *dv += d * wr;
            }
        }
    }
    loss
}

/// Uniform `±1/sqrt(fan_in)` weights, forget-gate bias +1.
pub fn init(hidden: usize, mut uniform: impl FnMut(f64) -> f64) -> Vec<f64> {
    let l = Layout::new(hidden);
    let mut w = vec![0.0; param_count(hidden)];
    let gate_bound = 1.0 / ((1 + hidden) as f64).sqrt();
    for i in l.w_x.clone().chain(l.w_h.clone()).chain(l.b.clone()) {
        w[i] = uniform(gate_bound);
    }
    for u in 0..hidden {
        w[l.b.start + hidden + u] = 1.0;
    }
    let out_bound = 1.0 / (hidden as f64).sqrt();
    for i in l.v.clone().chain(l.c.clone()) {
        w[i] = uniform(out_bound);
    }
    w
}
