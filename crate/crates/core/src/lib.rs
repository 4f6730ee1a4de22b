//! Quantized Riemannian gradient descent for distributed leading-eigenvector
//! computation on the unit sphere.
//!
//! The crate is `no_std` and only needs `alloc`. All floating-point
//! transcendental functions come from `libm`, so results are reproducible
//! across platforms.
//!
//! Module map:
//!
//! - [`geometry`]: exponential/logarithm maps, intrinsic distance, parallel
//!   transport and uniform sampling on the sphere.
//! - [`objective`]: the cost `f(x) = -xᵀAx`, its shards, gradients, a dense
//!   reference spectrum and the convexity-type slack checks.
//! - [`quantizer`]: deterministic lattice quantization with side-information
//!   decoding and exact bit accounting.
//! - [`protocol`]: the master/worker quantized gradient descent simulator,
//!   its parameter schedule and runtime invariant checks.
//! - [`baselines`]: full-precision RGD, Euclidean gradient-difference
//!   quantization, quantized power iteration and single-node RGD.
//! - [`init`]: uniform random and warm-start initialization.
//! - [`instance`]: row partitioning and synthetic instance generation.
#![no_std]
// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
mod error;
pub mod geometry;
pub mod init;
pub mod instance;
pub mod ledger;
pub mod linalg;
pub mod objective;
pub mod protocol;
pub mod quantizer;
pub mod special;
pub mod trace;

pub use crate::error::{Error, Result};
pub use crate::geometry::{TangentVector, UnitVector};
pub use crate::ledger::BitLedger;
pub use crate::objective::{CovarianceShard, Spectrum};
pub use crate::quantizer::{EncodedMessage, QuantizerConfig};
