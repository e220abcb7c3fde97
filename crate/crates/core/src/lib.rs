//! Spectral statistics of complex Wishart matrices whose population covariance
//! takes two values: eigenvalue 1 with multiplicity N - N1 and eigenvalue `a`
//! with multiplicity N1.
//!
//! In the high-dimensional limit N/M -> c in (0, 1), N1/N -> beta in (0, 1),
//! the eigenvalue distribution is governed by a cubic spectral curve.  Depending
//! on (a, beta, c) the support is a single interval or splits into two.  This
//! crate implements the two-cut regime end to end:
//!
//! - [`model`]: parameter domain, finite-size rounding, effective parameters;
//! - [`spectral_curve`]: the cubic curve, branch labeling, support endpoints,
//!   the two-cut classifier, and the phase integrals used for gauge factors;
//! - [`density`]: the limiting density, interval masses, CDF, edge constants;
//! - [`ensemble`]: Monte Carlo sampling of the matrix model and the rescalings
//!   that expose edge and bulk universality;
//! - [`kernels`]: Airy functions, Fredholm determinants, the Tracy-Widom
//!   distribution, and sine-kernel gap probabilities;
//! - [`finite_kernel`]: the exact finite-N correlation kernel built from
//!   multiple orthogonal polynomials with two Laguerre-type weights;
//! - [`verify`]: the acceptance checks wired into both the test suite and the
//!   command-line `verify` subcommand.
//!
//! Support modules ([`dd`], [`quad`], [`poly`], [`special`]) carry the small
//! amount of numerics everything else leans on.

pub mod dd;
pub mod density;
pub mod error;
pub mod kernels;
pub mod model;
pub mod poly;
pub mod quad;
pub mod special;
pub mod spectral_curve;

pub use error::{Error, Result};
pub use model::{FiniteSize, ModelParams};
