//! One-sided (causal) integral averages.
//!
//! The averaging operator is
//!
//! ```text
//! g(t) = ∫₀^∞ f(t − s) φ(s) ds
//! ```
//!
//! for a weight `φ` supported on `[0, ∞)`. The crate provides
//!
//! * a small zoo of causal kernels ([`kernel`]) normalized at construction,
//! * piecewise-constant and uniformly sampled test signals ([`signal`]),
//! * exact closed-form smoothing for exponential, box and Erlang kernels, a
//!   renormalized quadrature for arbitrary kernels and an O(1) streaming
//!   exponential average ([`smoother`]),
//! * exact superlevel/sublevel interval counting ([`crossings`]),
//! * checks of constant invariance, kernel monotonicity and the
//!   variation-diminishing property, plus a counterexample search
//!   ([`axioms`]),
//! * transform-side diagnostics: closed-form and quadrature Fourier
//!   transforms, product-form `ψ` evaluation and inverse-transform
//!   reconstruction ([`transform`]).
//!
//! Only the exponential kernel `λe^{−λs}` passes all three checks; the
//! axiom matrix makes that visible for the default kernel set.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axioms;
pub mod crossings;
mod error;
pub mod kernel;
mod poly;
pub mod signal;
pub mod smoother;
pub mod transform;

pub use axioms::{
    axiom_matrix, check_axioms, check_p1, check_p2, check_p3_randomized, default_kernel_set,
    falsify, render_matrix, AxiomReport, Counterexample, FalsifyResult, MatrixConfig, MatrixRow,
    P1Result, P3Config, P3Result, Verdict,
};
pub use crossings::{
    count_above_intervals, count_below_intervals, count_intervals_exact, count_intervals_sampled,
    sign_changes, CrossingReport, Relation,
};
pub use error::{Error, Result};
pub use kernel::{Kernel, KernelFamily, MonotonicityReport, PolyaFactorization};
pub use signal::{PiecewiseConstantSignal, SampledSignal};
pub use smoother::{
    smooth_exact, smooth_exact_box, smooth_exact_exponential, smooth_exact_gamma,
    smooth_quadrature, EmaState, Piece, SmoothedOutput,
};
pub use transform::{
    fourier_transform, psi_from_factorization, psi_lower_bound_check, psi_profile,
    reconstruct_symmetrized, LowerBoundReport, PsiProfile, Reconstruction,
};
