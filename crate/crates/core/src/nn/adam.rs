use serde::{Deserialize, Serialize};

use super::NnError;

/// Bias-corrected Adam.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    pub const DEFAULT_LR: f64 = 3e-4;

    pub fn new(n_params: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], step: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<(), NnError> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(NnError::Shape(format!(
                "adam holds {} moments but got {} parameters and {} gradients",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_identity() {
        let mut opt = Adam::new(3, 0.1);
        let mut p = vec![1.0, -2.0, 3.5];
        for _ in 0..10 {
            opt.step(&mut p, &[0.0; 3]).unwrap();
        }
        assert_eq!(p, vec![1.0, -2.0, 3.5]);
    }

    #[test]
    fn first_step_magnitude_is_lr() {
        let mut opt = Adam::new(1, 0.1);
        let mut p = vec![0.0];
        opt.step(&mut p, &[1.0]).unwrap();
        // m̂ = 1, v̂ = 1 → Δ = −0.1 / (1 + 1e-8)
        assert!((p[0] + 0.1 / (1.0 + 1e-8)).abs() < 1e-15);
        opt.step(&mut p, &[1.0]).unwrap();
        assert!((p[0] + 0.2 / (1.0 + 1e-8)).abs() < 1e-12);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut opt = Adam::new(2, 0.01);
            let mut p = vec![0.5, -0.5];
            for k in 0..50 {
                let g = [p[0] * 2.0 + k as f64 * 0.01, (p[1] - 1.0).sin()];
                opt.step(&mut p, &g).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch() {
        let mut opt = Adam::new(2, 0.01);
        assert!(opt.step(&mut [0.0; 3], &[0.0; 3]).is_err());
    }
}
