//! Controlled field corruption for robustness studies.
//!
//! Adds Gaussian noise to the flow planes and logit-domain noise to the
//! probability plane. Noise is addressed by `(seed, pixel, channel)` through
//! the counter RNG, so the perturbation of each pixel is independent of
//! image traversal order and thread count.

use crate::flow::FlowField;
use crate::rng::counter_normal;

/// Probabilities are clamped into `[EPS, 1 - EPS]` before the logit so the
/// transform stays finite for the binary planes produced by target
/// construction.
const EPS: f64 = 1e-6;

/// Returns a noisy copy of `field`; `sigma = 0` returns an exact copy.
///
/// Flow components receive additive `N(0, sigma^2)` noise. The probability
/// plane is perturbed in logit space with the same sigma and mapped back
/// through the sigmoid, keeping it inside `(0, 1)`.
pub fn perturb_field(field: &FlowField, sigma: f64, seed: u64) -> FlowField {
    assert!(sigma >= 0.0 && sigma.is_finite(), "sigma must be finite and non-negative");
    if sigma == 0.0 {
        return field.clone();
    }
    let mut out = field.clone();
    let n = field.height() * field.width();
    for i in 0..n {
        let fy = field.flow_y()[i] as f64 + sigma * counter_normal(seed, i as u64, 0);
        let fx = field.flow_x()[i] as f64 + sigma * counter_normal(seed, i as u64, 1);
        let p = (field.prob()[i] as f64).clamp(EPS, 1.0 - EPS);
        let logit = (p / (1.0 - p)).ln() + sigma * counter_normal(seed, i as u64, 2);
        // Re-clamp after the sigmoid: a strongly positive logit saturates to
        // exactly 1.0 in f32 otherwise.
        let noisy_p = (1.0 / (1.0 + (-logit).exp())).clamp(EPS, 1.0 - EPS);
        out.flow_y_mut()[i] = fy as f32;
        out.flow_x_mut()[i] = fx as f32;
        out.prob_mut()[i] = noisy_p as f32;
    }
    out
}
