//! The averaging operator `g(t) = ∫₀^∞ f(t − s) φ(s) ds`.
//!
//! * [`smooth_exact_exponential`], [`smooth_exact_box`] and
//!   [`smooth_exact_gamma`] integrate piecewise-constant inputs in closed
//!   form and return a [`SmoothedOutput`] made of monotone pieces.
//! * [`smooth_quadrature`] handles any kernel on a uniform grid.
//! * [`EmaState`] is the constant-memory streaming form of the exponential
//!   average.
//!
//! History before the first breakpoint is the signal's left extension, so
//! `g(t₀)` is exact and constants are reproduced without warm-up.

mod ema;
mod exact;
mod output;
mod quadrature;

pub use ema::EmaState;
pub use exact::{smooth_exact, smooth_exact_box, smooth_exact_exponential, smooth_exact_gamma};
pub use output::{Piece, SmoothedOutput};
pub use quadrature::{default_horizon, smooth_quadrature, QUADRATURE_TAIL_LIMIT};
