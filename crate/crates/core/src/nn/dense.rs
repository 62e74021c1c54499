use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::NnError;

static NEXT_NET_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_NET_ID.fetch_add(1, Ordering::Relaxed)
}

/// Fully connected network: tanh on hidden layers, identity on the output.
///
/// Parameters live in one flat vector. Layer `l` stores its weight matrix
/// row-major (`out × in`) followed by its bias.
#[derive(Debug, Serialize, Deserialize)]
#[serde(from = "NetRecord", into = "NetRecord")]
pub struct DenseNet {
    sizes: Vec<usize>,
    params: Vec<f64>,
    offsets: Vec<usize>,
    /// Identity of this parameter set; changes whenever parameters change.
    token: u64,
}

#[derive(Clone, Serialize, Deserialize)]
struct NetRecord {
    layer_sizes: Vec<usize>,
    params: Vec<f64>,
}

impl From<NetRecord> for DenseNet {
    fn from(r: NetRecord) -> Self {
        let offsets = offsets(&r.layer_sizes);
        Self { sizes: r.layer_sizes, params: r.params, offsets, token: fresh_id() }
    }
}

impl From<DenseNet> for NetRecord {
    fn from(n: DenseNet) -> Self {
        NetRecord { layer_sizes: n.sizes, params: n.params }
    }
}

impl Clone for DenseNet {
    fn clone(&self) -> Self {
        Self { sizes: self.sizes.clone(), params: self.params.clone(), offsets: self.offsets.clone(), token: fresh_id() }
    }
}

impl PartialEq for DenseNet {
    fn eq(&self, other: &Self) -> bool {
        self.sizes == other.sizes && self.params == other.params
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0];
    for w in sizes.windows(2) {
        let last = *out.last().expect("non-empty");
        out.push(last + w[0] * w[1] + w[1]);
    }
    out
}

/// Activations recorded by [`DenseNet::forward`], tied to the exact
/// parameters that produced them.
#[derive(Clone, Debug)]
pub struct ForwardCache {
    token: u64,
    /// Input followed by every layer's output.
    activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("at least input")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub params: Vec<f64>,
    pub input: Vec<f64>,
}

impl DenseNet {
    fn with_params(sizes: &[usize], params: Vec<f64>) -> Self {
        Self { sizes: sizes.to_vec(), offsets: offsets(sizes), params, token: fresh_id() }
    }

    fn check_sizes(sizes: &[usize]) -> Result<(), NnError> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return Err(NnError::Shape(format!("layer sizes {sizes:?} need at least two positive entries")));
        }
        Ok(())
    }

    pub fn zeros(sizes: &[usize]) -> Result<Self, NnError> {
        Self::check_sizes(sizes)?;
        let n = *offsets(sizes).last().expect("non-empty");
        Ok(Self::with_params(sizes, vec![0.0; n]))
    }

    /// He-style uniform weights `U(−√(6/fan_in), √(6/fan_in))`, zero biases.
    pub fn new<R: Rng>(sizes: &[usize], rng: &mut R) -> Result<Self, NnError> {
        let mut net = Self::zeros(sizes)?;
        for l in 0..net.n_layers() {
            let (n_in, n_out) = (net.sizes[l], net.sizes[l + 1]);
            let bound = (6.0 / n_in as f64).sqrt();
            let start = net.offsets[l];
            for w in &mut net.params[start..start + n_in * n_out] {
                *w = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub fn from_params(sizes: &[usize], params: Vec<f64>) -> Result<Self, NnError> {
        Self::check_sizes(sizes)?;
        let n = *offsets(sizes).last().expect("non-empty");
        if params.len() != n {
            return Err(NnError::Shape(format!("{} parameters for layer sizes {sizes:?}, expected {n}", params.len())));
        }
        Ok(Self::with_params(sizes, params))
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }
    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }
    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }
    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("validated")
    }
    pub fn n_params(&self) -> usize {
        self.params.len()
    }
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    /// Mutable parameters. Any outstanding [`ForwardCache`] becomes stale.
    pub fn params_mut(&mut self) -> &mut [f64] {
        self.token = fresh_id();
        &mut self.params
    }

    /// Overwrites all parameters with `src`'s (same architecture required).
    pub fn copy_from(&mut self, src: &DenseNet) -> Result<(), NnError> {
        if src.sizes != self.sizes {
            return Err(NnError::Shape(format!("cannot copy {:?} into {:?}", src.sizes, self.sizes)));
        }
        self.params_mut().copy_from_slice(&src.params);
        Ok(())
    }

    /// Range of layer `l`'s weights and bias in the flat vector.
    pub fn layer_weights(&self, l: usize) -> std::ops::Range<usize> {
        self.offsets[l]..self.offsets[l] + self.sizes[l] * self.sizes[l + 1]
    }
    pub fn layer_bias(&self, l: usize) -> std::ops::Range<usize> {
        let w = self.layer_weights(l);
        w.end..self.offsets[l + 1]
    }

    /// Multiplies the output layer's weights by `factor`.
    pub fn scale_output_layer(&mut self, factor: f64) {
        let r = self.layer_weights(self.n_layers() - 1);
        for w in &mut self.params_mut()[r] {
            *w *= factor;
        }
    }

    /// Sets the output-layer bias of unit `unit`.
    pub fn set_output_bias(&mut self, unit: usize, value: f64) {
        let r = self.layer_bias(self.n_layers() - 1);
        let idx = r.start + unit;
        self.params_mut()[idx] = value;
    }

    /// Index of the first non-finite parameter, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.params.iter().position(|p| !p.is_finite())
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NnError> {
        if input.len() != self.input_dim() {
            return Err(NnError::Shape(format!("input length {} but network expects {}", input.len(), self.input_dim())));
        }
        Ok(())
    }

    fn layer(&self, l: usize, x: &[f64], out: &mut Vec<f64>) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let w = &self.params[self.layer_weights(l)];
        let b = &self.params[self.layer_bias(l)];
        let hidden = l + 1 < self.n_layers();
        out.clear();
        for o in 0..n_out {
            let row = &w[o * n_in..(o + 1) * n_in];
            let z = b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
            out.push(if hidden { z.tanh() } else { z });
        }
    }

    /// Output only, without recording activations.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(input)?;
        let mut x = input.to_vec();
        let mut y = Vec::new();
        for l in 0..self.n_layers() {
            self.layer(l, &x, &mut y);
            std::mem::swap(&mut x, &mut y);
        }
        Ok(x)
    }

    pub fn forward(&self, input: &[f64]) -> Result<ForwardCache, NnError> {
        self.check_input(input)?;
        let mut activations = Vec::with_capacity(self.sizes.len());
        activations.push(input.to_vec());
        for l in 0..self.n_layers() {
            let mut y = Vec::with_capacity(self.sizes[l + 1]);
            self.layer(l, activations.last().expect("non-empty"), &mut y);
            activations.push(y);
        }
        Ok(ForwardCache { token: self.token, activations })
    }

    /// Adds the parameter gradient of the loss whose output gradient is
    /// `grad_out` into `grads`; returns the input gradient when `want_input`.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        grad_out: &[f64],
        grads: &mut [f64],
        want_input: bool,
    ) -> Result<Option<Vec<f64>>, NnError> {
        if cache.token != self.token {
            return Err(NnError::StaleCache);
        }
        if grad_out.len() != self.output_dim() || grads.len() != self.n_params() {
            return Err(NnError::Shape(format!(
                "output gradient {} / parameter gradient {} do not match network ({} / {})",
                grad_out.len(),
                grads.len(),
                self.output_dim(),
                self.n_params()
            )));
        }
        let mut delta = grad_out.to_vec();
        let mut input_grad = None;
        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let x = &cache.activations[l];
            let wr = self.layer_weights(l);
            let br = self.layer_bias(l);
            {
                let gw = &mut grads[wr.clone()];
                for o in 0..n_out {
                    let d = delta[o];
                    if d != 0.0 {
                        for (g, xi) in gw[o * n_in..(o + 1) * n_in].iter_mut().zip(x) {
                            *g += d * xi;
                        }
                    }
                }
            }
            for (g, d) in grads[br].iter_mut().zip(&delta) {
                *g += d;
            }
            if l == 0 && !want_input {
                break;
            }
            let w = &self.params[wr];
            let mut prev = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d != 0.0 {
                    for (p, wi) in prev.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *p += d * wi;
                    }
                }
            }
            if l == 0 {
                input_grad = Some(prev);
                break;
            }
            for (p, a) in prev.iter_mut().zip(x) {
                *p *= 1.0 - a * a;
            }
            delta = prev;
        }
        Ok(input_grad)
    }

    /// Parameter and input gradients of the loss whose output gradient is
    /// `grad_out`, at the point recorded in `cache`.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[f64]) -> Result<Gradients, NnError> {
        let mut params = vec![0.0; self.n_params()];
        let input = self.backward_into(cache, grad_out, &mut params, true)?.expect("requested");
        Ok(Gradients { params, input })
    }
}

/// Scales `grads` in place so their L2 norm is at most `max_norm`; returns
/// the norm before scaling.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm && norm > 0.0 {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            *g *= s;
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_net_outputs_zero() {
        let net = DenseNet::zeros(&[3, 5, 2]).unwrap();
        assert_eq!(net.predict(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_single_layer() {
        let net = DenseNet::from_params(&[2, 2], vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(net.predict(&[0.3, -7.0]).unwrap(), vec![0.3, -7.0]);
    }

    #[test]
    fn hand_computed_2_3_1() {
        // W1 = [[0.1, 0.2], [-0.3, 0.4], [0.5, -0.6]], b1 = [0.01, 0.02, 0.03]
        // W2 = [[0.7, -0.8, 0.9]], b2 = [0.05]
        let params = vec![0.1, 0.2, -0.3, 0.4, 0.5, -0.6, 0.01, 0.02, 0.03, 0.7, -0.8, 0.9, 0.05];
        let net = DenseNet::from_params(&[2, 3, 1], params).unwrap();
        let x = [1.5, -0.5];
        let h = [
            (0.1 * 1.5 + 0.2 * -0.5 + 0.01_f64).tanh(),
            (-0.3 * 1.5 + 0.4 * -0.5 + 0.02_f64).tanh(),
            (0.5 * 1.5 + -0.6 * -0.5 + 0.03_f64).tanh(),
        ];
        let y = 0.7 * h[0] - 0.8 * h[1] + 0.9 * h[2] + 0.05;
        assert!((net.predict(&x).unwrap()[0] - y).abs() < 1e-12);
    }

    #[test]
    fn linear_scalar_gradient() {
        let net = DenseNet::from_params(&[1, 1], vec![3.0, 0.0]).unwrap();
        let cache = net.forward(&[2.0]).unwrap();
        let g = net.backward(&cache, &[1.0]).unwrap();
        assert_eq!(g.params, vec![2.0, 1.0]);
        assert_eq!(g.input, vec![3.0]);
    }

    #[test]
    fn zero_output_gradient_gives_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let net = DenseNet::new(&[4, 6, 3], &mut rng).unwrap();
        let cache = net.forward(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        let g = net.backward(&cache, &[0.0; 3]).unwrap();
        assert!(g.params.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn stale_cache_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut net = DenseNet::new(&[2, 2], &mut rng).unwrap();
        let cache = net.forward(&[1.0, 1.0]).unwrap();
        net.params_mut()[0] += 1.0;
        assert!(matches!(net.backward(&cache, &[1.0, 1.0]), Err(NnError::StaleCache)));
        let other = net.clone();
        let cache = other.forward(&[1.0, 1.0]).unwrap();
        assert!(matches!(net.backward(&cache, &[1.0, 1.0]), Err(NnError::StaleCache)));
    }

    #[test]
    fn shape_errors() {
        assert!(DenseNet::zeros(&[3]).is_err());
        assert!(DenseNet::zeros(&[3, 0]).is_err());
        let net = DenseNet::zeros(&[3, 2]).unwrap();
        assert!(net.predict(&[1.0]).is_err());
        assert!(DenseNet::from_params(&[2, 2], vec![0.0; 5]).is_err());
    }

    #[test]
    fn clipping() {
        let mut g = vec![3.0, 4.0];
        assert_eq!(clip_grad_norm(&mut g, 1.0), 5.0);
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
        let mut small = vec![0.1];
        clip_grad_norm(&mut small, 1.0);
        assert_eq!(small, vec![0.1]);
    }
}
