use rand::seq::SliceRandom;
use rand::Rng;

use super::buffer::RolloutBuffer;
use super::config::PpoConfig;
use super::gae::normalize_advantages;
use super::policy::{Critic, GaussianPolicy, LOG_STD_MAX, LOG_STD_MIN};
use super::RlError;
use crate::nn::{clip_grad_norm, Adam};

/// Averages over every minibatch of one update, except `first_ratio_mean`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
    pub clip_fraction: f64,
    /// Mean probability ratio over the first minibatch of the first epoch,
    /// before any parameter change.
    pub first_ratio_mean: f64,
    pub minibatches: usize,
}

/// Per-sample clipped surrogate `−min(ρA, clip(ρ, 1−ε, 1+ε)A)` and its
/// derivative with respect to log π.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> (f64, f64) {
    let unclipped = ratio * advantage;
    let clipped = ratio.clamp(1.0 - clip, 1.0 + clip) * advantage;
    if unclipped <= clipped {
        (-unclipped, -unclipped)
    } else if (1.0 - clip..=1.0 + clip).contains(&ratio) {
        (-clipped, -unclipped)
    } else {
        (-clipped, 0.0)
    }
}

/// Networks and optimizers owned by the learner.
#[derive(Clone, Debug)]
pub struct ActorCritic {
    pub policy: GaussianPolicy,
    pub critic: Critic,
    pub actor_opt: Adam,
    pub critic_opt: Adam,
}

impl ActorCritic {
    pub fn new(policy: GaussianPolicy, critic: Critic, config: &PpoConfig) -> Self {
        let actor_opt = Adam::new(policy.net.n_params(), config.actor_lr);
        let critic_opt = Adam::new(critic.net.n_params(), config.critic_lr);
        Self { policy, critic, actor_opt, critic_opt }
    }
}

/// Clipped-surrogate policy step and squared-error value step over
/// `config.epochs` shuffled passes through `buffer`.
pub fn ppo_update<R: Rng>(
    buffer: &RolloutBuffer,
    ac: &mut ActorCritic,
    config: &PpoConfig,
    rng: &mut R,
) -> Result<UpdateStats, RlError> {
    let n = buffer.len();
    if n == 0 || buffer.advantages.len() != n || buffer.returns.len() != n {
        return Err(RlError::Shape("buffer is empty or advantages were not computed".into()));
    }
    let mut adv = buffer.advantages.clone();
    if config.normalize_advantages {
        normalize_advantages(&mut adv);
    }
    let k = ac.policy.act_dim();
    let mb = config.minibatch.min(n);
    let mut order: Vec<usize> = (0..n).collect();
    let mut stats = UpdateStats::default();
    let mut actor_grad = vec![0.0; ac.policy.net.n_params()];
    let mut critic_grad = vec![0.0; ac.critic.net.n_params()];
    for epoch in 0..config.epochs {
        order.shuffle(rng);
        for (b, batch) in order.chunks(mb).enumerate() {
            let scale = 1.0 / batch.len() as f64;
            actor_grad.iter_mut().for_each(|g| *g = 0.0);
            critic_grad.iter_mut().for_each(|g| *g = 0.0);
            let (mut pl, mut vl, mut ent, mut kl, mut clipped, mut ratio_sum) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
            for &i in batch {
                let cache = ac.policy.net.forward(buffer.obs[i].as_slice())?;
                let out = cache.output();
                let dist = ac.policy.split(out);
                let x = &buffer.actions[i];
                let logp = dist.log_prob(x);
                let log_ratio = logp - buffer.log_probs[i];
                let ratio = log_ratio.exp();
                let (loss, dloss_dlogp) = clipped_surrogate(ratio, adv[i], config.clip);
                pl += loss;
                ent += dist.entropy();
                kl += ratio - 1.0 - log_ratio;
                ratio_sum += ratio;
                if (ratio - 1.0).abs() > config.clip {
                    clipped += 1.0;
                }
                let mut grad_out = vec![0.0; 2 * k];
                for j in 0..k {
                    let sigma = dist.log_std[j].exp();
                    let z = (x[j] - dist.mean[j]) / sigma;
                    grad_out[j] = dloss_dlogp * z / sigma * scale;
                    let raw_ls = out[k + j];
                    if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw_ls) {
                        grad_out[k + j] = (dloss_dlogp * (z * z - 1.0) - config.entropy_coef) * scale;
                    }
                }
                ac.policy.net.backward_into(&cache, &grad_out, &mut actor_grad, false)?;

                let ccache = ac.critic.net.forward(buffer.privileged[i].as_slice())?;
                let err = ccache.output()[0] - buffer.returns[i];
                vl += err * err;
                ac.critic.net.backward_into(&ccache, &[2.0 * config.value_coef * err * scale], &mut critic_grad, false)?;
            }
            if epoch == 0 && b == 0 {
                stats.first_ratio_mean = ratio_sum * scale;
            }
            let (pl, vl) = (pl * scale, vl * scale);
            if !pl.is_finite() || !vl.is_finite() {
                return Err(RlError::NonFinite(format!(
                    "loss at epoch {epoch} minibatch {b}: policy {pl}, value {vl}"
                )));
            }
            stats.policy_loss += pl;
            stats.value_loss += vl;
            stats.entropy += ent * scale;
            stats.approx_kl += kl * scale;
            stats.clip_fraction += clipped * scale;
            stats.minibatches += 1;
            clip_grad_norm(&mut actor_grad, config.max_grad_norm);
            clip_grad_norm(&mut critic_grad, config.max_grad_norm);
            ac.actor_opt.step(ac.policy.net.params_mut(), &actor_grad)?;
            ac.critic_opt.step(ac.critic.net.params_mut(), &critic_grad)?;
            for (name, net) in [("actor", &ac.policy.net), ("critic", &ac.critic.net)] {
                if let Some(p) = net.first_non_finite() {
                    return Err(RlError::NonFinite(format!(
                        "{name} parameter {p} after epoch {epoch} minibatch {b} (policy loss {pl}, value loss {vl})"
                    )));
                }
            }
        }
    }
    let m = stats.minibatches as f64;
    stats.policy_loss /= m;
    stats.value_loss /= m;
    stats.entropy /= m;
    stats.approx_kl /= m;
    stats.clip_fraction /= m;
    Ok(stats)
}
