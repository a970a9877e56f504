use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::poly;
use crate::signal::SampledSignal;

/// One stretch of a smoothed signal in local time `u = t − t_piece`.
/// Every piece is monotone on its domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Piece {
    /// `target + (g_start − target)·e^{−rate·u}`.
    ExpRelax { g_start: f64, target: f64, rate: f64 },
    /// `g_start + slope·u`.
    Linear { g_start: f64, slope: f64 },
    /// `target + e^{−rate·u}·Σₖ coeffs[k]·uᵏ`; produced by Erlang kernels.
    PolyExp {
        target: f64,
        rate: f64,
        coeffs: Vec<f64>,
    },
}

impl Piece {
    pub fn value(&self, u: f64) -> f64 {
        match *self {
            Piece::ExpRelax {
                g_start,
                target,
                rate,
            } => target + (g_start - target) * (-rate * u).exp(),
            Piece::Linear { g_start, slope } => g_start + slope * u,
            Piece::PolyExp {
                target,
                rate,
                ref coeffs,
            } => target + (-rate * u).exp() * poly::eval(coeffs, u),
        }
    }

    pub fn start_value(&self) -> f64 {
        match *self {
            Piece::ExpRelax { g_start, .. } | Piece::Linear { g_start, .. } => g_start,
            Piece::PolyExp { .. } => self.value(0.0),
        }
    }

    /// Limit as `u → ∞`.
    pub fn limit(&self) -> f64 {
        match *self {
            Piece::ExpRelax { target, .. } | Piece::PolyExp { target, .. } => target,
            Piece::Linear { g_start, slope } => {
                if slope == 0.0 {
                    g_start
                } else {
                    slope * f64::INFINITY
                }
            }
        }
    }

    /// Local time in `[0, len]` where the piece equals `level`. The caller
    /// guarantees that `level` lies between the start value and the value
    /// (or limit) at `len`.
    pub(crate) fn solve(&self, level: f64, len: f64) -> f64 {
        let u = match *self {
            Piece::ExpRelax {
                g_start,
                target,
                rate,
            } => ((g_start - target) / (level - target)).ln() / rate,
            Piece::Linear { g_start, slope } => (level - g_start) / slope,
            Piece::PolyExp { rate, .. } => {
                let h = |u: f64| self.value(u) - level;
                let hi = if len.is_finite() {
                    len
                } else {
                    let start_above = h(0.0) > 0.0;
                    let mut hi = 1.0 / rate;
                    while (h(hi) > 0.0) == start_above && hi < 1e300 {
                        hi *= 2.0;
                    }
                    hi
                };
                poly::bisect(h, 0.0, hi)
            }
        };
        if u.is_nan() {
            0.0
        } else {
            u.clamp(0.0, len)
        }
    }
}

/// Closed-form smoothed signal: `left_value` before the first breakpoint,
/// `pieces[i]` on `[breakpoints[i], breakpoints[i+1])`, and the last piece
/// on `[breakpoints[last], ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedOutput {
    breakpoints: Vec<f64>,
    pieces: Vec<Piece>,
    left_value: f64,
}

impl SmoothedOutput {
    pub(crate) fn new(breakpoints: Vec<f64>, pieces: Vec<Piece>, left_value: f64) -> Self {
        debug_assert_eq!(breakpoints.len(), pieces.len());
        debug_assert!(!pieces.is_empty());
        Self {
            breakpoints,
            pieces,
            left_value,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Constant value on `(−∞, breakpoints[0])`.
    pub fn left_value(&self) -> f64 {
        self.left_value
    }

    /// Limit as `t → ∞`.
    pub fn right_limit(&self) -> f64 {
        self.pieces.last().unwrap().limit()
    }

    /// Length of piece `i`; infinite for the last.
    pub fn piece_len(&self, i: usize) -> f64 {
        match self.breakpoints.get(i + 1) {
            Some(next) => next - self.breakpoints[i],
            None => f64::INFINITY,
        }
    }

    /// Value of piece `i` at its right end, from its own formula.
    pub fn piece_end_value(&self, i: usize) -> f64 {
        let len = self.piece_len(i);
        if len.is_finite() {
            self.pieces[i].value(len)
        } else {
            self.pieces[i].limit()
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t < self.breakpoints[0] {
            return self.left_value;
        }
        let i = self.breakpoints.partition_point(|b| *b <= t) - 1;
        if t == self.breakpoints[i] {
            return self.pieces[i].start_value();
        }
        self.pieces[i].value(t - self.breakpoints[i])
    }

    /// `g` at every breakpoint.
    pub fn breakpoint_values(&self) -> Vec<f64> {
        self.pieces.iter().map(Piece::start_value).collect()
    }

    /// Largest jump between the end of a piece and the start of the next.
    pub fn continuity_defect(&self) -> f64 {
        (0..self.pieces.len() - 1)
            .map(|i| (self.piece_end_value(i) - self.pieces[i + 1].start_value()).abs())
            .fold(0.0, f64::max)
    }

    /// `g(t_start + i·dt)` for `i < n`.
    pub fn sample(&self, t_start: f64, dt: f64, n: usize) -> Result<SampledSignal> {
        let values = (0..n).map(|i| self.eval(t_start + i as f64 * dt)).collect();
        SampledSignal::new(t_start, dt, values)
    }
}
