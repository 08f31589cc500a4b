//! Computational verification of weight-aspect murmurations for level-1
//! modular forms, at desk scale.
//!
//! The crate is organized around the objects the experiment needs:
//!
//! - [`arithcore`]: prime sieve with Chebyshev log-weights, multiplicative
//!   functions, Kloosterman sums.
//! - [`besselkit`]: J-Bessel values of large order, singly and in batches,
//!   with certified decay bounds.
//! - [`kernels`]: the smooth weight profile and the oscillatory kernels
//!   V1/V2 obtained from it, plus weighted Bessel sums over the weight
//!   window.
//! - [`modforms`]: exact spectral data (dimensions, Hecke eigenvalues,
//!   signs, harmonic weights) for level-1 cusp forms.
//! - [`petersson`]: both sides of the Petersson trace formula and their
//!   comparison.
//! - [`murmur`]: the end-to-end experiment (numerators, denominator,
//!   decorrelation sums, auxiliary series, and the final ratio report).

pub mod arithcore;
pub mod besselkit;
pub mod error;
pub mod kernels;
pub mod modforms;
pub mod murmur;
pub mod petersson;
pub mod util;

pub use error::{Error, Result};
