//! Generalized Beta distribution toolkit.
//!
//! The crate provides, as one coherent library:
//!
//! - the bounded five-parameter Generalized Beta (GB) distribution and its
//!   relatives (GB1, GB2, B, B2, GGa, GIGa) together with "modified" variants
//!   (mB, mGB, mB2, mGB2 and a second modified GB written through Appell F₁)
//!   that arise as steady states of mean-reverting stochastic differential
//!   equations — PDFs, CDFs, complementary CDFs, quantiles, samplers, tail
//!   exponents and upper-endpoint asymptotics (`dist`);
//! - the special-function kernels those closed forms need (`specfun`);
//! - Euler–Maruyama integration of the underlying SDEs, the parameter maps
//!   from SDE coefficients to steady-state distributions, and hierarchy
//!   sweeps that degenerate one family member into another (`sde`);
//! - maximum-likelihood and CDF least-squares fitting, Kolmogorov–Smirnov
//!   statistics and thresholds, and parametric-bootstrap confidence bands
//!   (`fit`);
//! - a realized-volatility pipeline from daily close prices (`rv`);
//! - a thin command-line surface over all of the above (`cli`).
//!
//! Start with the runnable programs under `examples/` — there is one per
//! major capability.

pub mod cli;
pub mod dist;
pub mod error;
pub mod fit;
pub mod rv;
pub mod sde;
pub mod specfun;

pub(crate) mod parallel;

pub use error::{Error, Result};
