//! Adam optimizer over named parameter tensors.

use std::collections::BTreeMap;

use crate::tensor::Tensor;

/// Adaptive-moment gradient descent with the standard moment defaults.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: BTreeMap<String, Tensor>,
    v: BTreeMap<String, Tensor>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, t: 0, m: BTreeMap::new(), v: BTreeMap::new() }
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }

    /// Apply one update. Parameters without a gradient entry are left alone.
    pub fn step(&mut self, params: &mut [(String, &mut Tensor)], grads: &BTreeMap<String, Tensor>) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for (name, p) in params.iter_mut() {
            let Some(g) = grads.get(name) else { continue };
            assert_eq!(g.shape(), p.shape(), "gradient shape mismatch for {name}");
            let m = self
                .m
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.rows(), p.cols()));
            let v = self
                .v
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(p.rows(), p.cols()));
            let (b1, b2, eps, lr) = (self.beta1, self.beta2, self.eps, self.lr);
            for i in 0..p.len() {
                let gi = g.data()[i];
                let mi = b1 * m.data()[i] + (1.0 - b1) * gi;
                let vi = b2 * v.data()[i] + (1.0 - b2) * gi * gi;
                m.data_mut()[i] = mi;
                v.data_mut()[i] = vi;
                let mhat = mi / bc1;
                let vhat = vi / bc2;
                p.data_mut()[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lr_leaves_params_unchanged() {
        let mut p = Tensor::new(1, 3, vec![1.0, -2.0, 3.0]);
        let before = p.clone();
        let mut adam = Adam::new(0.0);
        let mut grads = BTreeMap::new();
        grads.insert("w".to_string(), Tensor::new(1, 3, vec![0.5, 0.5, 0.5]));
        for _ in 0..5 {
            adam.step(&mut [("w".to_string(), &mut p)], &grads);
        }
        assert_eq!(p, before);
    }

    #[test]
    fn descends_a_quadratic() {
        // minimize (x - 3)^2, gradient 2(x-3)
        let mut x = Tensor::new(1, 1, vec![0.0]);
        let mut adam = Adam::new(0.05);
        for _ in 0..2000 {
            let g = 2.0 * (x.data()[0] - 3.0);
            let mut grads = BTreeMap::new();
            grads.insert("x".to_string(), Tensor::new(1, 1, vec![g]));
            adam.step(&mut [("x".to_string(), &mut x)], &grads);
        }
        assert!((x.data()[0] - 3.0).abs() < 1e-3);
    }
}
