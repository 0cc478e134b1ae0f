//! Numerics for the Pfaffian point processes attached to k-increasing
//! subsequences of random involutions.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: integer-order Bessel `J_n`, Airy `Ai`/`Ai'` and tails.
//! * [`quad`]: Gauss–Legendre rules.
//! * [`combinat`]: RSK shapes, Greene lengths, involution counting.
//! * [`meixner`]: Meixner polynomials at `c = 1` and their orthonormal tables.
//! * [`skewpoly`]: the skew inner product and skew orthogonal polynomials.
//! * [`pfaffian`]: Pfaffians and quaternion determinants.
//! * [`fredholm`]: truncated Fredholm–Pfaffian series with ξ-bookkeeping.
//! * [`finite_kernel`], [`bessel_kernel`], [`airy_kernel`]: the three regimes
//!   of the matrix kernel.
//! * [`montecarlo`]: samplers and empirical statistics.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod airy_kernel;
pub mod bessel_kernel;
pub mod combinat;
pub mod error;
pub mod finite_kernel;
pub mod fredholm;
pub mod kernel;
pub mod meixner;
pub mod montecarlo;
pub mod pfaffian;
pub mod quad;
pub mod skewpoly;
pub mod specfun;

pub use error::{Error, Result};
pub use kernel::KernelBlock;
pub use specfun::SeriesTolerance;

/// Library version, recorded in CLI output metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
