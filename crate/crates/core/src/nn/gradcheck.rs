use super::dense::DenseNet;
use super::NnError;

/// Denominator floor of the relative error, so parameters whose true
/// derivative vanishes are judged on absolute error.
pub const REL_ERROR_FLOOR: f64 = 1e-6;

/// `|a − n| / max(|a|, |n|, floor)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let diff = (analytic - numeric).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / analytic.abs().max(numeric.abs()).max(REL_ERROR_FLOOR)
}

/// Worst relative error between `analytic` parameter gradients and central
/// differences of `loss_fn(net(input))` with step `h`.
///
/// `loss_fn` maps the network output to the loss and its output gradient.
pub fn gradient_check_against<F>(
    net: &DenseNet,
    analytic: &[f64],
    loss_fn: F,
    input: &[f64],
    h: f64,
) -> Result<f64, NnError>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    if !(1e-7..=1e-3).contains(&h) {
        return Err(NnError::Shape(format!("finite-difference step {h} outside [1e-7, 1e-3]")));
    }
    if analytic.len() != net.n_params() {
        return Err(NnError::Shape("analytic gradient length differs from parameter count".into()));
    }
    let mut probe = net.clone();
    let mut worst = 0.0_f64;
    for i in 0..net.n_params() {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + h;
        let up = loss_fn(&probe.predict(input)?).0;
        probe.params_mut()[i] = orig - h;
        let down = loss_fn(&probe.predict(input)?).0;
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        worst = worst.max(relative_error(analytic[i], numeric));
    }
    Ok(worst)
}

/// Compares the network's own backward pass with central differences.
pub fn gradient_check<F>(net: &DenseNet, loss_fn: F, input: &[f64], h: f64) -> Result<f64, NnError>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let cache = net.forward(input)?;
    let (_, grad_out) = loss_fn(cache.output());
    let analytic = net.backward(&cache, &grad_out)?.params;
    gradient_check_against(net, &analytic, loss_fn, input, h)
}

/// ½‖y − target‖² and its gradient.
pub fn squared_error_loss(target: &[f64]) -> impl Fn(&[f64]) -> (f64, Vec<f64>) + '_ {
    move |y: &[f64]| {
        let diff: Vec<f64> = y.iter().zip(target).map(|(a, b)| a - b).collect();
        (0.5 * diff.iter().map(|d| d * d).sum::<f64>(), diff)
    }
}

/// `L(y + d₊) − L(y + d₋)` for ½‖y − target‖², written so that no two large
/// nearly equal numbers are subtracted.
pub fn squared_error_difference(target: &[f64]) -> impl Fn(&[f64], &[f64], &[f64]) -> f64 + '_ {
    move |y: &[f64], up: &[f64], down: &[f64]| {
        y.iter()
            .zip(target)
            .zip(up.iter().zip(down))
            .map(|((y, t), (u, d))| (u - d) * (y - t + 0.5 * (u + d)))
            .sum()
    }
}

/// tanh(z + dz) − tanh(z) without cancellation.
fn tanh_increment(z: f64, dz: f64) -> f64 {
    if z.abs() < 300.0 && (z + dz).abs() < 300.0 {
        dz.sinh() / ((z + dz).cosh() * z.cosh())
    } else {
        (z + dz).tanh() - z.tanh()
    }
}

/// Central differences `(L(θ + h·eᵢ) − L(θ − h·eᵢ)) / 2h` for every
/// parameter. Each perturbed pass is carried as an offset from the
/// unperturbed activations, so rounding error scales with the offset rather
/// than with the activations; plain re-evaluation loses about five digits at
/// h = 1e-5.
///
/// `loss_difference(y, d₊, d₋)` returns `L(y + d₊) − L(y + d₋)`.
pub fn stable_central_differences<F>(net: &DenseNet, loss_difference: F, input: &[f64], h: f64) -> Result<Vec<f64>, NnError>
where
    F: Fn(&[f64], &[f64], &[f64]) -> f64,
{
    if !(1e-7..=1e-3).contains(&h) {
        return Err(NnError::Shape(format!("finite-difference step {h} outside [1e-7, 1e-3]")));
    }
    if input.len() != net.input_dim() {
        return Err(NnError::Shape(format!("input length {} but network expects {}", input.len(), net.input_dim())));
    }
    let sizes = net.layer_sizes();
    let n_layers = net.n_layers();
    let params = net.params();
    // Pre-activations and activations of the unperturbed pass; acts[0] is the input.
    let mut pre: Vec<Vec<f64>> = Vec::with_capacity(n_layers);
    let mut acts: Vec<Vec<f64>> = vec![input.to_vec()];
    for l in 0..n_layers {
        let w = &params[net.layer_weights(l)];
        let b = &params[net.layer_bias(l)];
        let x = &acts[l];
        let z: Vec<f64> = (0..sizes[l + 1])
            .map(|o| b[o] + w[o * sizes[l]..(o + 1) * sizes[l]].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
            .collect();
        let a = if l + 1 < n_layers { z.iter().map(|v| v.tanh()).collect() } else { z.clone() };
        pre.push(z);
        acts.push(a);
    }
    let output = acts[n_layers].clone();

    // Output offset when unit `o` of layer `l` has its pre-activation moved by `dz`.
    let propagate = |l: usize, o: usize, dz: f64| -> Vec<f64> {
        let mut delta = vec![0.0; sizes[l + 1]];
        delta[o] = if l + 1 < n_layers { tanh_increment(pre[l][o], dz) } else { dz };
        for m in l + 1..n_layers {
            let w = &params[net.layer_weights(m)];
            let n_in = sizes[m];
            let hidden = m + 1 < n_layers;
            delta = (0..sizes[m + 1])
                .map(|j| {
                    let dz: f64 = w[j * n_in..(j + 1) * n_in].iter().zip(&delta).map(|(a, b)| a * b).sum();
                    if hidden {
                        tanh_increment(pre[m][j], dz)
                    } else {
                        dz
                    }
                })
                .collect();
        }
        delta
    };

    let mut grads = vec![0.0; net.n_params()];
    for l in 0..n_layers {
        let n_in = sizes[l];
        let weights = net.layer_weights(l);
        let bias = net.layer_bias(l);
        for o in 0..sizes[l + 1] {
            for k in 0..n_in {
                let x = acts[l][k];
                let up = propagate(l, o, h * x);
                let down = propagate(l, o, -h * x);
                grads[weights.start + o * n_in + k] = loss_difference(&output, &up, &down) / (2.0 * h);
            }
            let up = propagate(l, o, h);
            let down = propagate(l, o, -h);
            grads[bias.start + o] = loss_difference(&output, &up, &down) / (2.0 * h);
        }
    }
    Ok(grads)
}

/// Worst relative error between the backward pass and
/// [`stable_central_differences`] for ½‖net(input) − target‖².
pub fn gradient_check_squared(net: &DenseNet, target: &[f64], input: &[f64], h: f64) -> Result<f64, NnError> {
    let cache = net.forward(input)?;
    let (_, grad_out) = squared_error_loss(target)(cache.output());
    let analytic = net.backward(&cache, &grad_out)?.params;
    let numeric = stable_central_differences(net, squared_error_difference(target), input, h)?;
    Ok(analytic.iter().zip(&numeric).map(|(a, n)| relative_error(*a, *n)).fold(0.0, f64::max))
}
