use super::RlError;

/// Generalized advantage estimates and returns for one trajectory segment.
///
/// `dones[t]` marks that the episode ended with step `t`, cutting both the
/// bootstrap and the advantage recursion; `bootstrap` is V of the state after
/// the last step.
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    bootstrap: f64,
    gamma: f64,
    lambda: f64,
) -> Result<(Vec<f64>, Vec<f64>), RlError> {
    let n = rewards.len();
    if values.len() != n || dones.len() != n {
        return Err(RlError::Shape(format!(
            "gae inputs differ in length: {} rewards, {} values, {} dones",
            n,
            values.len(),
            dones.len()
        )));
    }
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    let mut next_value = bootstrap;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + gamma * next_value * live - values[t];
        next_adv = delta + gamma * lambda * live * next_adv;
        adv[t] = next_adv;
        next_value = values[t];
    }
    let returns = adv.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok((adv, returns))
}

/// Shifts and scales `adv` to zero mean and unit variance.
pub fn normalize_advantages(adv: &mut [f64]) {
    let n = adv.len() as f64;
    if adv.len() < 2 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt() + 1e-8;
    for a in adv {
        *a = (*a - mean) / std;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_terminal_step() {
        let (a, r) = compute_gae(&[1.0], &[0.0], &[true], 123.0, 0.99, 0.95).unwrap();
        assert_eq!(a, vec![1.0]);
        assert_eq!(r, vec![1.0]);
    }

    #[test]
    fn zero_everything() {
        let (a, _) = compute_gae(&[0.0; 5], &[0.0; 5], &[false; 5], 0.0, 0.99, 0.95).unwrap();
        assert!(a.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn length_mismatch() {
        assert!(compute_gae(&[0.0; 2], &[0.0; 3], &[false; 2], 0.0, 0.9, 0.9).is_err());
    }

    #[test]
    fn normalization() {
        let mut a = vec![1.0, 2.0, 3.0, 4.0];
        normalize_advantages(&mut a);
        let mean: f64 = a.iter().sum::<f64>() / 4.0;
        let var: f64 = a.iter().map(|x| x * x).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-6);
    }
}
