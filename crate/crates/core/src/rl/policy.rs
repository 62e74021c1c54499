use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::normalize::RunningNorm;
use crate::env::{Observation, PrivilegedState};
use crate::nn::{DenseNet, NnError};

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;

/// Normalized actor input. Only obtainable from an [`Observation`], so
/// privileged fields cannot reach the policy.
///
/// ```compile_fail
/// use hexlift::env::PrivilegedState;
/// use hexlift::rl::ActorInput;
/// let p = PrivilegedState::from_features(vec![0.0; 4]);
/// let _ = ActorInput::new(&p, None);
/// ```
#[derive(Clone, Debug, PartialEq)]
pub struct ActorInput(Vec<f64>);

impl ActorInput {
    pub fn new(obs: &Observation, norm: Option<&RunningNorm>) -> Self {
        Self(match norm {
            Some(n) => n.normalize(obs.as_slice()),
            None => obs.as_slice().to_vec(),
        })
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Normalized critic input built from a [`PrivilegedState`].
#[derive(Clone, Debug, PartialEq)]
pub struct CriticInput(Vec<f64>);

impl CriticInput {
    pub fn new(state: &PrivilegedState, norm: Option<&RunningNorm>) -> Self {
        Self(match norm {
            Some(n) => n.normalize(state.as_slice()),
            None => state.as_slice().to_vec(),
        })
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

const HALF_LOG_2PI: f64 = 0.918_938_533_204_672_8;

/// log N(x; μ, σ) summed over dimensions.
pub fn gaussian_log_prob(mean: &[f64], log_std: &[f64], x: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(x)
        .map(|((m, ls), v)| {
            let z = (v - m) / ls.exp();
            -0.5 * z * z - ls - HALF_LOG_2PI
        })
        .sum()
}

/// Differential entropy of the diagonal Gaussian.
pub fn gaussian_entropy(log_std: &[f64]) -> f64 {
    log_std.iter().map(|ls| ls + 0.5 + HALF_LOG_2PI).sum()
}

/// Mean and clamped log standard deviation for one input.
#[derive(Clone, Debug, PartialEq)]
pub struct ActionDist {
    pub mean: Vec<f64>,
    pub log_std: Vec<f64>,
}

impl ActionDist {
    pub fn log_prob(&self, x: &[f64]) -> f64 {
        gaussian_log_prob(&self.mean, &self.log_std, x)
    }
    pub fn entropy(&self) -> f64 {
        gaussian_entropy(&self.log_std)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampledAction {
    /// Sample clamped to [−1, 1], sent to the environment.
    pub action: Vec<f64>,
    /// Unclamped sample, kept for log-probability evaluation.
    pub raw: Vec<f64>,
    /// Log density of `raw` under the unclamped Gaussian.
    pub log_prob: f64,
}

/// Diagonal Gaussian policy: the network outputs the mean followed by the
/// log standard deviation of every action dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPolicy {
    pub net: DenseNet,
}

impl GaussianPolicy {
    /// Actor `obs_dim → hidden → 2·act_dim` with a scaled-down output layer
    /// and every log-std bias set to `log_std_init`.
    pub fn new<R: Rng>(obs_dim: usize, act_dim: usize, hidden: &[usize], log_std_init: f64, rng: &mut R) -> Result<Self, NnError> {
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(2 * act_dim);
        let mut net = DenseNet::new(&sizes, rng)?;
        net.scale_output_layer(0.01);
        for j in 0..act_dim {
            net.set_output_bias(act_dim + j, log_std_init);
        }
        Ok(Self { net })
    }

    pub fn from_net(net: DenseNet) -> Result<Self, NnError> {
        if !net.output_dim().is_multiple_of(2) {
            return Err(NnError::Shape(format!("policy output width {} is odd", net.output_dim())));
        }
        Ok(Self { net })
    }

    pub fn act_dim(&self) -> usize {
        self.net.output_dim() / 2
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_dim()
    }

    pub(crate) fn split(&self, out: &[f64]) -> ActionDist {
        let k = self.act_dim();
        ActionDist {
            mean: out[..k].to_vec(),
            log_std: out[k..].iter().map(|l| l.clamp(LOG_STD_MIN, LOG_STD_MAX)).collect(),
        }
    }

    pub fn distribution(&self, input: &ActorInput) -> Result<ActionDist, NnError> {
        Ok(self.split(&self.net.predict(input.as_slice())?))
    }

    /// Clamped mean; the deterministic evaluation action.
    pub fn mode(&self, input: &ActorInput) -> Result<Vec<f64>, NnError> {
        Ok(self.distribution(input)?.mean.iter().map(|m| m.clamp(-1.0, 1.0)).collect())
    }

    pub fn sample<R: Rng>(&self, input: &ActorInput, rng: &mut R) -> Result<SampledAction, NnError> {
        let dist = self.distribution(input)?;
        let raw: Vec<f64> = dist
            .mean
            .iter()
            .zip(&dist.log_std)
            .map(|(m, ls)| m + ls.exp() * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let log_prob = dist.log_prob(&raw);
        let action = raw.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
        Ok(SampledAction { action, raw, log_prob })
    }
}

/// Free-function form of [`GaussianPolicy::sample`].
pub fn sample_action<R: Rng>(policy: &GaussianPolicy, input: &ActorInput, rng: &mut R) -> Result<SampledAction, NnError> {
    policy.sample(input, rng)
}

/// State-value network on privileged inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Critic {
    pub net: DenseNet,
}

impl Critic {
    pub fn new<R: Rng>(input_dim: usize, hidden: &[usize], rng: &mut R) -> Result<Self, NnError> {
        let mut sizes = vec![input_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Ok(Self { net: DenseNet::new(&sizes, rng)? })
    }

    pub fn value(&self, input: &CriticInput) -> Result<f64, NnError> {
        Ok(self.net.predict(input.as_slice())?[0])
    }
}

/// `−log(σ√(2π))` for a single dimension.
pub fn unit_log_density_at_mean(log_std: f64) -> f64 {
    -(log_std.exp() * (2.0 * PI).sqrt()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn obs(v: Vec<f64>) -> ActorInput {
        ActorInput::new(&Observation::from_features(v), None)
    }

    #[test]
    fn log_prob_at_mean_with_floor_std() {
        // Zero weights: mean 0, log-std bias at the floor.
        let mut net = DenseNet::zeros(&[3, 4]).unwrap();
        net.set_output_bias(2, -7.0);
        net.set_output_bias(3, -7.0);
        let p = GaussianPolicy::from_net(net).unwrap();
        let d = p.distribution(&obs(vec![0.1, 0.2, 0.3])).unwrap();
        assert_eq!(d.log_std, vec![LOG_STD_MIN; 2]);
        let expected = 2.0 * unit_log_density_at_mean(LOG_STD_MIN);
        assert!((d.log_prob(&[0.0, 0.0]) - expected).abs() < 1e-12);
    }

    #[test]
    fn mode_is_clamped_mean() {
        let mut net = DenseNet::zeros(&[1, 4]).unwrap();
        net.set_output_bias(0, 3.0);
        net.set_output_bias(1, -0.4);
        let p = GaussianPolicy::from_net(net).unwrap();
        assert_eq!(p.mode(&obs(vec![0.0])).unwrap(), vec![1.0, -0.4]);
    }

    #[test]
    fn sampling_is_reproducible_and_clamped() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = GaussianPolicy::new(6, 3, &[8], 0.5, &mut rng).unwrap();
        let x = obs(vec![0.3; 6]);
        let a = p.sample(&x, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = p.sample(&x, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(a.action.iter().all(|v| (-1.0..=1.0).contains(v)));
        let d = p.distribution(&x).unwrap();
        assert!((d.log_prob(&a.raw) - a.log_prob).abs() < 1e-15);
    }

    #[test]
    fn entropy_decreases_with_log_std() {
        assert!(gaussian_entropy(&[-0.5, -0.5]) < gaussian_entropy(&[-0.4, -0.5]));
        let e = gaussian_entropy(&[0.0]);
        assert!((e - 0.5 * (2.0 * PI * std::f64::consts::E).ln()).abs() < 1e-12);
    }
}
