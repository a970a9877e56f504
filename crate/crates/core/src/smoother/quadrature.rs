use crate::error::{invalid, Error, Result};
use crate::kernel::{Kernel, KernelFamily};
use crate::signal::SampledSignal;

/// Largest kernel tail mass a quadrature horizon may leave out.
pub const QUADRATURE_TAIL_LIMIT: f64 = 1e-8;

/// `40/λ` for exponentials, the support for compact kernels, and a tail
/// mass of `1e−16` otherwise.
pub fn default_horizon(kernel: &Kernel) -> f64 {
    match *kernel.family() {
        KernelFamily::Exponential { rate } => 40.0 / rate,
        _ => kernel.horizon(1e-16),
    }
}

/// Lag weights `∫` of `φ` over `[j·dt, (j+1)·dt] ∩ [0, H]` by the trapezoid
/// rule, where `H` is the horizon clipped to the support.
fn lag_weights(kernel: &Kernel, dt: f64, horizon: f64) -> Vec<f64> {
    let end = horizon.min(kernel.support_end());
    let segments = ((end / dt) - 1e-9).ceil().max(1.0) as usize;
    (0..segments)
        .map(|j| {
            let lo = j as f64 * dt;
            let hi = ((j + 1) as f64 * dt).min(end);
            if hi <= lo {
                0.0
            } else {
                0.5 * (hi - lo) * (kernel.eval_unchecked(lo) + kernel.eval_unchecked(hi))
            }
        })
        .collect()
}

/// `g(tᵢ) = Σⱼ f(tᵢ − s)φ(s)` over lag segments `[sⱼ, sⱼ₊₁]`, where the
/// zero-order-hold input equals `values[i−1−j]` on segment `j`. Samples
/// before the first are held at `values[0]`. The result is divided by the
/// discrete kernel mass so constants pass through exactly.
pub fn smooth_quadrature(f: &SampledSignal, kernel: &Kernel, horizon: f64) -> Result<SampledSignal> {
    if !(horizon > 0.0) {
        return Err(invalid(format!("horizon must be positive, got {horizon}")));
    }
    let deficit = kernel.tail_mass(horizon);
    if deficit > QUADRATURE_TAIL_LIMIT {
        return Err(Error::TailMass {
            horizon,
            deficit,
            limit: QUADRATURE_TAIL_LIMIT,
        });
    }
    let weights = lag_weights(kernel, f.dt(), horizon);
    let norm: f64 = weights.iter().sum();
    // suffix[j] = Σ_{k ≥ j} weights[k]
    let mut suffix = vec![0.0; weights.len() + 1];
    for j in (0..weights.len()).rev() {
        suffix[j] = suffix[j + 1] + weights[j];
    }

    let x = f.values();
    let hold = x[0];
    let out = (0..x.len())
        .map(|i| {
            let inside = i.min(weights.len());
            let mut acc = 0.0;
            for (j, w) in weights[..inside].iter().enumerate() {
                acc += w * x[i - 1 - j];
            }
            acc += suffix[inside] * hold;
            acc / norm
        })
        .collect();
    SampledSignal::new(f.t0(), f.dt(), out)
}
