//! Pollaczek resummation of Hausdorff-transformed power series
//!
//! Series of the form `g(x) = sum_n (-1)^n mu_n x^n / n!`, where `mu_n` are
//! Hausdorff moments, converge slowly once `x` is large. This crate
//! re-expands them in the variable `(x - 1)/(x + 1)` with coefficients built
//! from Pollaczek polynomials evaluated at `-i(k + 1/2)`, picks the
//! truncation order from the plateau of the partial sums of squared
//! coefficients, and uses the same coefficients to invert the finite,
//! noisy Hausdorff moment problem in a Laguerre basis.
//!
//! All coefficients are carried in a rotated real form: the complex
//! coefficient is `u_n = i^n * u_hat_n` with `u_hat_n` real.
//!
//! ```
//! use hausdorff_resum::{moments, resummation};
//!
//! let seq = moments::cesaro_moments(1.0, 20).unwrap();
//! let coeffs = resummation::compute_coefficients(&seq, 60).unwrap();
//! let g = resummation::evaluate_resummed(10.0, &coeffs, 30).unwrap();
//! assert!((g - (1.0 - (-10.0f64).exp()) / 10.0).abs() < 1e-3);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod inversion;
pub mod moments;
pub mod numerics;
pub mod polynomials;
pub mod resummation;

pub use error::{Error, Result};
pub use inversion::ReconstructionResult;
pub use moments::{DensitySpec, MomentSequence, MomentSource};
pub use numerics::QuadratureSpec;
pub use resummation::{CoefficientSet, PartialSumCurve, TruncationConfig, TruncationReport};
