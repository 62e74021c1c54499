use serde::{Deserialize, Serialize};

/// Per-feature running mean and variance (parallel Welford merge).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
    /// When false, `normalize` is the identity.
    enabled: bool,
}

const CLIP: f64 = 10.0;
const EPS: f64 = 1e-8;

impl RunningNorm {
    pub fn new(dim: usize, enabled: bool) -> Self {
        Self { count: 0.0, mean: vec![0.0; dim], m2: vec![0.0; dim], enabled }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update(&mut self, x: &[f64]) {
        if !self.enabled {
            return;
        }
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / self.count;
            *s += d * (v - *m);
        }
    }

    /// `clamp((x − μ) / √(σ² + ε), −10, 10)`.
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        if !self.enabled || self.count < 2.0 {
            return x.to_vec();
        }
        x.iter()
            .zip(&self.mean)
            .zip(&self.m2)
            .map(|((v, m), s)| ((v - m) / (s / self.count + EPS).sqrt()).clamp(-CLIP, CLIP))
            .collect()
    }
}
