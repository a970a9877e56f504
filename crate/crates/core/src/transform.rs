//! Transform-side diagnostics.
//!
//! Conventions: the kernel transform is `φ̂(s) = ∫₀^∞ e^{−isx} φ(x) dx` for
//! real `s`, and a Pólya-class kernel has `φ̂(s) = 1/ψ(is)` with `ψ` given
//! in product form by a [`PolyaFactorization`]. A zero of `φ̂` on the real
//! line (the box kernel has them at `2πk/a`) rules out any such `ψ`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernel::{Kernel, KernelFamily, PolyaFactorization};

/// Default threshold on `|φ̂|` below which a frequency is flagged as a zero.
pub const ZERO_TOL: f64 = 1e-8;
/// Tolerance of the product-form lower-bound checks.
pub const LOWER_BOUND_TOL: f64 = 1e-9;
/// Largest admissible truncation estimate in [`reconstruct_symmetrized`].
pub const RECONSTRUCTION_TOL: f64 = 1e-3;

/// `(1 − e^{−ix})/(ix)`, with a series near zero.
fn box_factor(x: f64) -> Complex64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        Complex64::new(1.0 - x2 / 6.0, -x / 2.0 + x * x2 / 24.0)
    } else {
        (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -x)) / Complex64::new(0.0, x)
    }
}

/// Weights `A = ∫₀¹ (1−y)e^{ay} dy` and `B = ∫₀¹ y e^{ay} dy` for `a = −iθ`.
fn hat_weights(theta: f64) -> (Complex64, Complex64) {
    let a = Complex64::new(0.0, -theta);
    if theta.abs() < 1e-2 {
        // Σ aᵐ/(m!(m+1)(m+2)) and Σ aᵐ/(m!(m+2)).
        let (mut pa, mut pb) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut term = Complex64::new(1.0, 0.0);
        for m in 0..8 {
            let m_f = m as f64;
            pa += term / ((m_f + 1.0) * (m_f + 2.0));
            pb += term / (m_f + 2.0);
            term = term * a / (m_f + 1.0);
        }
        (pa, pb)
    } else {
        let ea = a.exp();
        let a2 = a * a;
        ((ea - 1.0 - a) / a2, (ea * (a - 1.0) + 1.0) / a2)
    }
}

/// Exact transform of the piecewise-linear interpolant of `values`.
fn sampled_transform(values: &[f64], dt: f64, s: f64) -> Complex64 {
    let (wa, wb) = hat_weights(s * dt);
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, pair) in values.windows(2).enumerate() {
        let phase = Complex64::from_polar(1.0, -s * k as f64 * dt);
        acc += phase * (wa * pair[0] + wb * pair[1]);
    }
    acc * dt
}

/// `φ̂(s)`: closed forms for the parametric families, the exact integral of
/// the piecewise-linear interpolant for sampled kernels.
pub fn fourier_transform(kernel: &Kernel, s: f64) -> Complex64 {
    match *kernel.family() {
        KernelFamily::Exponential { rate } => rate / Complex64::new(rate, s),
        KernelFamily::Box { width } => box_factor(s * width),
        KernelFamily::Gamma { shape, rate } => (rate / Complex64::new(rate, s)).powu(shape),
        KernelFamily::Sampled { ref values, dt } => sampled_transform(values, dt, s),
    }
}

/// Transform values and their reciprocals over a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiProfile {
    pub s_grid: Vec<f64>,
    pub transform_values: Vec<Complex64>,
    /// `1/φ̂(s)`; `None` where the transform is flagged as zero.
    pub psi_values: Vec<Option<Complex64>>,
    pub zero_flags: Vec<bool>,
    /// Half-width of the strip where `1/ψ` is known to be analytic.
    pub strip_halfwidth: Option<f64>,
}

impl PsiProfile {
    /// Frequencies at which the transform vanishes.
    pub fn zeros(&self) -> Vec<f64> {
        self.s_grid
            .iter()
            .zip(&self.zero_flags)
            .filter_map(|(s, z)| z.then_some(*s))
            .collect()
    }
}

pub fn psi_profile(kernel: &Kernel, s_grid: &[f64], zero_tol: f64) -> Result<PsiProfile> {
    if let Some(s) = s_grid.iter().find(|s| !s.is_finite()) {
        return Err(invalid(format!("frequency grid must be finite, found {s}")));
    }
    let transform_values: Vec<Complex64> = s_grid.par_iter().map(|&s| fourier_transform(kernel, s)).collect();
    let zero_flags: Vec<bool> = transform_values.iter().map(|v| v.norm() < zero_tol).collect();
    let psi_values = transform_values
        .iter()
        .zip(&zero_flags)
        .map(|(v, &z)| (!z).then(|| v.inv()))
        .collect();
    let strip_halfwidth = match *kernel.family() {
        KernelFamily::Exponential { rate } | KernelFamily::Gamma { rate, .. } => Some(rate),
        _ => None,
    };
    Ok(PsiProfile {
        s_grid: s_grid.to_vec(),
        transform_values,
        psi_values,
        zero_flags,
        strip_halfwidth,
    })
}

/// `C·exp(−γs² + δs)·∏(1 + δₖs)e^{−δₖs}` at complex `s`. The exponential
/// factors are combined before exponentiating so that `δ = Σδₖ` cancels
/// exactly.
pub fn psi_from_factorization(fact: &PolyaFactorization, s: Complex64) -> Complex64 {
    let linear = fact.deltas.iter().fold(fact.shift, |acc, d| acc - d);
    let exponent = -fact.gaussian * s * s + linear * s;
    let product = fact
        .deltas
        .iter()
        .fold(Complex64::new(1.0, 0.0), |acc, d| acc * (1.0 + d * s));
    fact.scale * exponent.exp() * product
}

/// Outcome of the product-form bounds on the imaginary axis. Gaps are
/// signed so that a positive gap beyond the tolerance is a violation, and
/// are relative to `max(1, |bound|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub pass: bool,
    pub points: usize,
    pub tolerance: f64,
    /// `C·∏√(1 + δₖ²t²) ≤ |ψ(it)|`.
    pub max_product_gap: f64,
    /// `Σ ½ log(1 + δₖ²t²) ≤ (t²/2)Σδₖ²`.
    pub max_log_gap: f64,
    /// `C(1 + |δ₍₁₎δ₍₂₎|t²) ≤ |ψ(it)|` for the two largest `|δₖ|`; only
    /// checked when at least two are nonzero.
    pub max_quadratic_gap: Option<f64>,
}

pub fn psi_lower_bound_check(fact: &PolyaFactorization, t_grid: &[f64]) -> LowerBoundReport {
    let mut mags: Vec<f64> = fact.deltas.iter().map(|d| d.abs()).filter(|d| *d > 0.0).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let quadratic = (mags.len() >= 2).then(|| mags[0] * mags[1]);
    let sq_sum = fact.delta_square_sum();
    let rel = |bound: f64, value: f64| (bound - value) / bound.abs().max(1.0);

    let mut max_product_gap = f64::NEG_INFINITY;
    let mut max_log_gap = f64::NEG_INFINITY;
    let mut max_quadratic_gap = quadratic.map(|_| f64::NEG_INFINITY);
    for &t in t_grid {
        let value = psi_from_factorization(fact, Complex64::new(0.0, t)).norm();
        let log_prod: f64 = fact.deltas.iter().map(|d| 0.5 * (d * d * t * t).ln_1p()).sum();
        let product = fact.scale * log_prod.exp();
        max_product_gap = max_product_gap.max(rel(product, value));
        let log_bound = 0.5 * t * t * sq_sum;
        max_log_gap = max_log_gap.max((log_prod - log_bound) / log_bound.abs().max(1.0));
        if let (Some(c), Some(gap)) = (quadratic, max_quadratic_gap.as_mut()) {
            *gap = gap.max(rel(fact.scale * (1.0 + c * t * t), value));
        }
    }
    let pass = max_product_gap <= LOWER_BOUND_TOL
        && max_log_gap <= LOWER_BOUND_TOL
        && max_quadratic_gap.is_none_or(|g| g <= LOWER_BOUND_TOL);
    LowerBoundReport {
        pass,
        points: t_grid.len(),
        tolerance: LOWER_BOUND_TOL,
        max_product_gap,
        max_log_gap,
        max_quadratic_gap,
    }
}

/// Numerical inverse transform of `2C/(1 + δ²s²)` against the closed form
/// `(C/δ)e^{−|x|/δ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub reference: Vec<f64>,
    pub max_rel_error: f64,
    /// Largest a-priori relative truncation error over the grid.
    pub truncation_estimate: f64,
    pub s_max: f64,
    pub ds: f64,
}

/// Default frequency cutoff `s_max·δ`.
pub const DEFAULT_S_MAX: f64 = 2000.0;
/// Default frequency step `ds·δ`.
pub const DEFAULT_DS: f64 = 0.01;

/// `φ₂(x) = (1/π)∫₀^{s_max} cos(sx)·2C/(1 + δ²s²) ds` by the trapezoid
/// rule, the even extension of `(C/δ)e^{−x/δ}`.
///
/// Fails with [`Error::Config`] when the tail bound
/// `min(2C/(πδ²S), 4C/(πδ²S²|x|))` exceeds [`RECONSTRUCTION_TOL`] relative to
/// the closed form somewhere on the grid.
pub fn reconstruct_symmetrized(
    delta: f64,
    c: f64,
    x_grid: &[f64],
    s_max: Option<f64>,
    ds: Option<f64>,
) -> Result<Reconstruction> {
    for (name, v) in [("delta", delta), ("C", c)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let s_max = s_max.unwrap_or(DEFAULT_S_MAX / delta);
    let ds = ds.unwrap_or(DEFAULT_DS / delta);
    if !(s_max.is_finite() && s_max > 0.0 && ds.is_finite() && ds > 0.0 && ds < s_max) {
        return Err(invalid(format!("need 0 < ds < s_max, got ds = {ds}, s_max = {s_max}")));
    }
    if x_grid.iter().any(|x| !x.is_finite()) {
        return Err(invalid("x grid must be finite"));
    }
    let closed = |x: f64| c / delta * (-x.abs() / delta).exp();
    let d2 = delta * delta;
    let truncation_estimate = x_grid
        .iter()
        .map(|&x| {
            let flat = 2.0 * c / (std::f64::consts::PI * d2 * s_max);
            let oscillating = 4.0 * c / (std::f64::consts::PI * d2 * s_max * s_max * x.abs());
            flat.min(oscillating) / closed(x)
        })
        .fold(0.0, f64::max);
    if truncation_estimate > RECONSTRUCTION_TOL {
        return Err(Error::Config(format!(
            "s_max = {s_max} leaves a relative truncation error up to {truncation_estimate:.3e} (limit {RECONSTRUCTION_TOL})"
        )));
    }

    let n = (s_max / ds).round() as usize;
    let weight = |s: f64| 2.0 * c / (1.0 + d2 * s * s);
    let values: Vec<f64> = x_grid
        .par_iter()
        .map(|&x| {
            let mut acc = 0.5 * (weight(0.0) + (n as f64 * ds * x).cos() * weight(n as f64 * ds));
            for k in 1..n {
                let s = k as f64 * ds;
                acc += (s * x).cos() * weight(s);
            }
            acc * ds / std::f64::consts::PI
        })
        .collect();
    let reference: Vec<f64> = x_grid.iter().map(|&x| closed(x)).collect();
    let max_rel_error = values
        .iter()
        .zip(&reference)
        .map(|(v, r)| ((v - r) / r).abs())
        .fold(0.0, f64::max);
    Ok(Reconstruction {
        x: x_grid.to_vec(),
        values,
        reference,
        max_rel_error,
        truncation_estimate,
        s_max,
        ds,
    })
}
