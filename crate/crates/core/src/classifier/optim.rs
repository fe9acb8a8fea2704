use serde::{Deserialize, Serialize};

/// RMSProp: `a <- rho a + (1 - rho) g²`, `w <- w - lr g / (sqrt(a) + eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RmsProp {
    pub learning_rate: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub accumulator: Vec<f64>,
}

impl RmsProp {
    pub fn new(n: usize, learning_rate: f64, rho: f64, epsilon: f64) -> Self {
        RmsProp {
            learning_rate,
            rho,
            epsilon,
            accumulator: vec![0.0; n],
        }
    }

    pub fn step(&mut self, weights: &mut [f64], grads: &[f64]) {
        debug_assert_eq!(weights.len(), grads.len());
        for ((w, &g), a) in weights.iter_mut().zip(grads).zip(self.accumulator.iter_mut()) {
            *a = self.rho * *a + (1.0 - self.rho) * g * g;
            *w -= self.learning_rate * g / (a.sqrt() + self.epsilon);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut opt = RmsProp::new(3, 0.001, 0.9, 1e-7);
        let mut w = vec![1.0, -2.0, 3.0];
        opt.step(&mut w, &[0.0; 3]);
        assert_eq!(w, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn first_scalar_step() {
        let mut opt = RmsProp::new(1, 0.001, 0.9, 1e-7);
        let mut w = vec![0.0];
        opt.step(&mut w, &[1.0]);
        assert!((opt.accumulator[0] - 0.1).abs() < 1e-16);
        let want = -0.001 / (0.1f64.sqrt() + 1e-7);
        assert!((w[0] - want).abs() < 1e-18);
    }

    #[test]
    fn first_step_is_bounded() {
        let g = [3.0, -0.2, 1e-3, 40.0];
        let mut opt = RmsProp::new(4, 0.01, 0.9, 1e-7);
        let mut w = vec![0.0; 4];
        opt.step(&mut w, &g);
        for (dw, gi) in w.iter().zip(g) {
            let bound = 0.01 * gi.abs() / (0.1 * gi * gi).sqrt();
            assert!(dw.abs() <= bound * (1.0 + 1e-12));
        }
    }
}
