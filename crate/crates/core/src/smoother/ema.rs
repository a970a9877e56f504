use crate::error::{invalid, Error, Result};

/// Streaming exponential average: O(1) time and memory per update.
///
/// For a piecewise-constant input, stepping through its breakpoints
/// reproduces [`smooth_exact_exponential`](super::smooth_exact_exponential)
/// at those breakpoints bit-for-bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmaState {
    g: f64,
    rate: f64,
    t_last: f64,
}

impl EmaState {
    pub fn init(rate: f64, g0: f64, t0: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(invalid(format!("rate must be positive and finite, got {rate}")));
        }
        if !g0.is_finite() || !t0.is_finite() {
            return Err(invalid("initial average and time must be finite"));
        }
        Ok(Self { g: g0, rate, t_last: t0 })
    }

    /// Advances to `t_now`, given that the input held `f_value` on
    /// `[t_last, t_now)`.
    pub fn step(self, f_value: f64, t_now: f64) -> Result<Self> {
        if !(t_now > self.t_last) {
            return Err(Error::Ordering {
                t_last: self.t_last,
                t_now,
            });
        }
        let g = f_value + (self.g - f_value) * (-self.rate * (t_now - self.t_last)).exp();
        Ok(Self { g, t_last: t_now, ..self })
    }

    pub fn value(&self) -> f64 {
        self.g
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn t_last(&self) -> f64 {
        self.t_last
    }
}
