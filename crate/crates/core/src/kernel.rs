//! Causal weight functions `φ: [0, ∞) → ℝ`.
//!
//! Every constructor normalizes, so a [`Kernel`] always has unit mass and
//! averages leave constants untouched. Parametric families are evaluated in
//! closed form; sampled kernels are piecewise linear on a uniform grid and
//! vanish past their last grid point.

use std::fmt;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::signal::{fmt17, infer_uniform_grid, read_two_column_csv};

/// Cumulative tail mass below which kernel support is truncated.
pub const TAIL_MASS_CUTOFF: f64 = 1e-10;

/// Slack used when scanning sampled kernels for increases.
pub const MONOTONE_TOL: f64 = 1e-12;

/// Grid points per characteristic kernel time when a parametric kernel is
/// sampled for convolution.
const STEPS_PER_SCALE: f64 = 1000.0;

/// Parameters of the entire function
/// `ψ(s) = C·exp(−γs² + δs)·∏ₖ (1 + δₖs)·exp(−δₖs)`
/// whose reciprocal is the two-sided Laplace transform of a Pólya
/// frequency function. Only finitely many `δₖ` are supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyaFactorization {
    /// `C > 0`.
    pub scale: f64,
    /// `γ ≥ 0`.
    pub gaussian: f64,
    /// `δ`.
    pub shift: f64,
    /// `δₖ`.
    pub deltas: Vec<f64>,
}

impl PolyaFactorization {
    pub fn new(scale: f64, gaussian: f64, shift: f64, deltas: Vec<f64>) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(invalid(format!("factorization scale C must be positive, got {scale}")));
        }
        if !(gaussian.is_finite() && gaussian >= 0.0) {
            return Err(invalid(format!("gaussian factor γ must be nonnegative, got {gaussian}")));
        }
        if !shift.is_finite() || deltas.iter().any(|d| !d.is_finite()) {
            return Err(invalid("factorization shifts must be finite"));
        }
        Ok(Self {
            scale,
            gaussian,
            shift,
            deltas,
        })
    }

    /// `Σ δₖ²`.
    pub fn delta_square_sum(&self) -> f64 {
        self.deltas.iter().map(|d| d * d).sum()
    }

    /// Factorization of a product of transforms (convolution of kernels).
    pub fn compose(&self, other: &Self) -> Self {
        let mut deltas = self.deltas.clone();
        deltas.extend_from_slice(&other.deltas);
        Self {
            scale: self.scale * other.scale,
            gaussian: self.gaussian + other.gaussian,
            shift: self.shift + other.shift,
            deltas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum KernelFamily {
    /// `λe^{−λs}`.
    Exponential { rate: f64 },
    /// `1/a` on `[0, a]`.
    Box { width: f64 },
    /// Erlang density `λⁿ sⁿ⁻¹ e^{−λs} / (n−1)!`, the n-fold convolution of
    /// exponentials.
    Gamma { shape: u32, rate: f64 },
    /// Piecewise-linear samples `values[i] = φ(i·dt)`.
    Sampled { values: Vec<f64>, dt: f64 },
}

/// A normalized causal kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    family: KernelFamily,
    factorization: Option<PolyaFactorization>,
}

/// Outcome of a monotonicity scan. When the kernel increases somewhere the
/// witness holds `(s1, s2, φ(s1), φ(s2))` with `s1 < s2` and `φ(s1) < φ(s2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub monotone: bool,
    pub witness: Option<(f64, f64, f64, f64)>,
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("rate must be positive and finite, got {rate}")))
    }
}

fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, .., last] => dt * (values.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Erlang survival function `P(X > s)` for shape `n`, rate `λ`.
fn erlang_tail(shape: u32, rate: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    let x = rate * s;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..shape {
        term *= x / k as f64;
        sum += term;
    }
    (-x).exp() * sum
}

impl Kernel {
    /// `φ(s) = λe^{−λs}` with factorization `ψ(s) = 1 + s/λ`.
    pub fn exponential(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self {
            family: KernelFamily::Exponential { rate },
            factorization: Some(PolyaFactorization {
                scale: 1.0,
                gaussian: 0.0,
                shift: 1.0 / rate,
                deltas: vec![1.0 / rate],
            }),
        })
    }

    /// Uniform weight over the last `width` time units.
    pub fn boxcar(width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(invalid(format!("box width must be positive and finite, got {width}")));
        }
        Ok(Self {
            family: KernelFamily::Box { width },
            factorization: None,
        })
    }

    /// Erlang kernel of integer shape `n ≥ 1`. For `n = 1` this is
    /// [`Kernel::exponential`].
    pub fn gamma(shape: u32, rate: f64) -> Result<Self> {
        if shape == 0 {
            return Err(invalid("gamma shape must be at least 1"));
        }
        check_rate(rate)?;
        if shape == 1 {
            return Self::exponential(rate);
        }
        let d = 1.0 / rate;
        Ok(Self {
            family: KernelFamily::Gamma { shape, rate },
            factorization: Some(PolyaFactorization {
                scale: 1.0,
                gaussian: 0.0,
                shift: shape as f64 * d,
                deltas: vec![d; shape as usize],
            }),
        })
    }

    /// Samples on the grid `i·dt`, rescaled to unit trapezoid mass.
    pub fn sampled(values: Vec<f64>, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("sample step must be positive and finite, got {dt}")));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid("kernel samples must be finite and nonnegative"));
        }
        let mass = trapezoid(&values, dt);
        if !(mass > 0.0) {
            return Err(invalid("kernel samples have zero trapezoid mass"));
        }
        let values = values.into_iter().map(|v| v / mass).collect();
        Ok(Self {
            family: KernelFamily::Sampled { values, dt },
            factorization: None,
        })
    }

    /// Decreasing triangle `2(w − s)/w²` on `[0, w]`, sampled with `n`
    /// segments.
    pub fn sampled_triangular(width: f64, segments: usize) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) || segments == 0 {
            return Err(invalid("triangular kernel needs positive width and segment count"));
        }
        let dt = width / segments as f64;
        let values = (0..=segments)
            .map(|i| (segments - i) as f64 / segments as f64)
            .collect();
        Self::sampled(values, dt)
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    pub fn factorization(&self) -> Option<&PolyaFactorization> {
        self.factorization.as_ref()
    }

    pub fn with_factorization(mut self, factorization: Option<PolyaFactorization>) -> Self {
        self.factorization = factorization;
        self
    }

    /// `φ(s)` for `s ≥ 0`.
    pub fn evaluate(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!(
                "kernel is defined on [0, ∞), got s = {s}"
            )));
        }
        Ok(self.eval_unchecked(s))
    }

    pub(crate) fn eval_unchecked(&self, s: f64) -> f64 {
        match self.family {
            KernelFamily::Exponential { rate } => rate * (-rate * s).exp(),
            KernelFamily::Box { width } => {
                if s <= width {
                    1.0 / width
                } else {
                    0.0
                }
            }
            KernelFamily::Gamma { shape, rate } => {
                if s == 0.0 {
                    return 0.0;
                }
                let n = shape as f64;
                (n * rate.ln() + (n - 1.0) * s.ln() - rate * s - ln_factorial(shape - 1)).exp()
            }
            KernelFamily::Sampled { ref values, dt } => {
                let last = (values.len() - 1) as f64;
                let x = s / dt;
                if x > last {
                    return 0.0;
                }
                let i = (x.floor() as usize).min(values.len() - 2);
                let frac = x - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    /// `∫₀^∞ φ`. Exactly one for parametric families, the trapezoid sum for
    /// sampled kernels.
    pub fn mass(&self) -> f64 {
        match self.family {
            KernelFamily::Sampled { ref values, dt } => trapezoid(values, dt),
            _ => 1.0,
        }
    }

    /// `∫_s^∞ φ`.
    pub fn tail_mass(&self, s: f64) -> f64 {
        let s = s.max(0.0);
        match self.family {
            KernelFamily::Exponential { rate } => (-rate * s).exp(),
            KernelFamily::Box { width } => ((width - s) / width).max(0.0),
            KernelFamily::Gamma { shape, rate } => erlang_tail(shape, rate, s),
            KernelFamily::Sampled { ref values, dt } => {
                let end = (values.len() - 1) as f64 * dt;
                if s >= end {
                    return 0.0;
                }
                let i = (s / dt).floor() as usize;
                let head_end = (i + 1) as f64 * dt;
                let v_s = self.eval_unchecked(s);
                let partial = 0.5 * (head_end - s) * (v_s + values[i + 1]);
                partial + trapezoid(&values[i + 1..], dt)
            }
        }
    }

    /// Right end of the support; infinite for exponential and Erlang kernels.
    pub fn support_end(&self) -> f64 {
        match self.family {
            KernelFamily::Box { width } => width,
            KernelFamily::Sampled { ref values, dt } => (values.len() - 1) as f64 * dt,
            _ => f64::INFINITY,
        }
    }

    /// Smallest horizon whose tail mass is below `cutoff`.
    pub fn horizon(&self, cutoff: f64) -> f64 {
        match self.family {
            KernelFamily::Exponential { rate } => (1.0 / cutoff).ln() / rate,
            KernelFamily::Gamma { .. } => {
                let mut hi = self.scale();
                while self.tail_mass(hi) >= cutoff {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.tail_mass(mid) >= cutoff {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
            _ => self.support_end(),
        }
    }

    /// Characteristic time: `1/λ` for exponentials, the width for boxes,
    /// the mean `n/λ` for Erlang kernels and the support for sampled ones.
    pub fn scale(&self) -> f64 {
        match self.family {
            KernelFamily::Exponential { rate } => 1.0 / rate,
            KernelFamily::Box { width } => width,
            KernelFamily::Gamma { shape, rate } => shape as f64 / rate,
            KernelFamily::Sampled { .. } => self.support_end(),
        }
    }

    /// Property 2 check: is `φ` non-increasing on `[0, ∞)`?
    pub fn check_monotone(&self) -> MonotonicityReport {
        match self.family {
            KernelFamily::Exponential { .. } | KernelFamily::Box { .. } => MonotonicityReport {
                monotone: true,
                witness: None,
            },
            KernelFamily::Gamma { rate, .. } => {
                let s2 = 1.0 / rate;
                MonotonicityReport {
                    monotone: false,
                    witness: Some((0.0, s2, 0.0, self.eval_unchecked(s2))),
                }
            }
            KernelFamily::Sampled { ref values, dt } => {
                let witness = values
                    .windows(2)
                    .position(|w| w[1] > w[0] + MONOTONE_TOL)
                    .map(|i| (i as f64 * dt, (i + 1) as f64 * dt, values[i], values[i + 1]));
                MonotonicityReport {
                    monotone: witness.is_none(),
                    witness,
                }
            }
        }
    }

    fn native_step(&self) -> f64 {
        match self.family {
            KernelFamily::Sampled { dt, .. } => dt,
            _ => self.scale() / STEPS_PER_SCALE,
        }
    }

    /// Samples `φ(j·dt)` for `j = 0..` up to the truncated support. Grid
    /// points that overshoot a finite support end by rounding are clamped
    /// onto it.
    fn grid_values(&self, dt: f64) -> Vec<f64> {
        let end = self.support_end();
        let n = if end.is_finite() {
            ((end / dt) - 1e-9).ceil().max(1.0) as usize
        } else {
            (self.horizon(TAIL_MASS_CUTOFF) / dt).ceil() as usize
        };
        (0..=n)
            .map(|j| self.eval_unchecked((j as f64 * dt).min(end)))
            .collect()
    }

    /// Grid values with the jump at a box edge replaced by its midpoint, which
    /// keeps the trapezoid convolution second order across the edge.
    fn convolution_grid(&self, dt: f64) -> Vec<f64> {
        let mut v = self.grid_values(dt);
        if let KernelFamily::Box { .. } = self.family {
            if let Some(last) = v.last_mut() {
                *last *= 0.5;
            }
        }
        v
    }

    /// Convolution `φ₁ * φ₂`, sampled on a common grid with trapezoid
    /// weights and renormalized. Factorizations concatenate when both
    /// inputs carry one.
    pub fn convolve(&self, other: &Kernel) -> Kernel {
        let mut dt = self.native_step().min(other.native_step());
        for k in [self, other] {
            if let KernelFamily::Box { width } = k.family {
                dt = width / (width / dt).ceil();
                break;
            }
        }
        let a = self.convolution_grid(dt);
        let b = other.convolution_grid(dt);
        let n = a.len() + b.len() - 1;
        let mut out = vec![0.0; n];
        for (k, slot) in out.iter_mut().enumerate() {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc += a[j] * b[k - j];
            }
            let first = if k < b.len() { a[0] * b[k] } else { 0.0 };
            let last = if k < a.len() { a[k] * b[0] } else { 0.0 };
            *slot = dt * (acc - 0.5 * (first + last));
        }

        let total = trapezoid(&out, dt);
        let mut len = out.len();
        let mut tail = 0.0;
        while len > 2 {
            let seg = 0.5 * dt * (out[len - 1] + out[len - 2]);
            if tail + seg >= TAIL_MASS_CUTOFF * total {
                break;
            }
            tail += seg;
            len -= 1;
        }
        out.truncate(len);

        let factorization = match (&self.factorization, &other.factorization) {
            (Some(f1), Some(f2)) => Some(f1.compose(f2)),
            _ => None,
        };
        Kernel::sampled(out, dt)
            .expect("convolution of normalized kernels has positive mass")
            .with_factorization(factorization)
    }

    /// Samples `φ` on a grid of step `dt` up to the truncation horizon and
    /// returns the piecewise-linear kernel, keeping any factorization.
    pub fn discretize(&self, dt: f64) -> Result<Kernel> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("dt must be positive, got {dt}")));
        }
        Ok(Kernel::sampled(self.grid_values(dt), dt)?.with_factorization(self.factorization.clone()))
    }

    /// Reads a sampled kernel from CSV with header `s,phi`. The first `s`
    /// must be zero and the grid uniform.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let (s, phi) = read_two_column_csv(reader, ["s", "phi"])?;
        let (s0, dt) = infer_uniform_grid(&s)?;
        if s0 != 0.0 {
            return Err(Error::Format(format!("kernel grid must start at s = 0, got {s0}")));
        }
        Self::sampled(phi, dt)
    }

    /// Writes a sampled kernel as `s,phi`. Parametric kernels are sampled at
    /// their native resolution up to the truncation horizon.
    pub fn write_csv<W: Write>(&self, mut writer: W) -> Result<()> {
        let (values, dt) = match self.family {
            KernelFamily::Sampled { ref values, dt } => (values.clone(), dt),
            _ => {
                let dt = self.native_step();
                (self.grid_values(dt), dt)
            }
        };
        writeln!(writer, "s,phi")?;
        for (i, v) in values.iter().enumerate() {
            writeln!(writer, "{},{}", fmt17(i as f64 * dt), fmt17(*v))?;
        }
        Ok(())
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            KernelFamily::Exponential { rate } => write!(f, "exp:{rate}"),
            KernelFamily::Box { width } => write!(f, "box:{width}"),
            KernelFamily::Gamma { shape, rate } => write!(f, "gamma:{shape},{rate}"),
            KernelFamily::Sampled { ref values, dt } => {
                write!(f, "sampled[n={},dt={dt}]", values.len())
            }
        }
    }
}
