//! Private dense coding over prime-dimensional Weyl–Heisenberg systems.
//!
//! The classical layers (`dists`, `bounds`, the estimator's Fourier inversion)
//! are generic over [`Real`]. The exact quantum oracle in [`qexact`] is `f64`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dists;
pub mod error;
pub mod estimation;
pub mod gf;
pub mod hashing;
pub mod protocol;
pub mod qexact;
pub mod real;
pub mod wiretap;

pub use error::{Error, Result};
pub use real::Real;

pub type PauliDistF64 = dists::PauliDist<f64>;
pub type PauliDistF32 = dists::PauliDist<f32>;
pub type MarginalDistF64 = dists::MarginalDist<f64>;
pub type MarginalDistF32 = dists::MarginalDist<f32>;
pub type RateTripleF64 = bounds::RateTriple<f64>;
pub type RateTripleF32 = bounds::RateTriple<f32>;
pub type FiniteLengthReportF64 = bounds::FiniteLengthReport<f64>;
pub type FiniteLengthReportF32 = bounds::FiniteLengthReport<f32>;
pub type CharTableF64 = estimation::CharTable<f64>;
pub type CharTableF32 = estimation::CharTable<f32>;
