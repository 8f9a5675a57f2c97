//! Closure-relation operators and their spectral stability theory on
//! finite-dimensional discretizations.
//!
//! An extended operator `A_ext = [[A11, A12], [A21, 0]]` on a product of two
//! weighted spaces collapses, under the closure `h2 = S A21 h1`, to the single
//! space operator `A_S = A11 + A12 S A21`. This crate assembles both, checks
//! the structural hypotheses (coercive `S`, skew pairing, dissipativity), and
//! provides the spectral machinery used to verify that peripheral spectrum,
//! kernels and decay transfer from `A_ext` to `A_S`.
//!
//! The model problems live in [`discretize`], [`coupled`] and [`phs`]:
//! summation-by-parts discretizations whose discrete energy identities hold
//! exactly, so dissipativity of the discrete operators is inherited rather
//! than approximated.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

mod error;

pub mod closure;
pub mod coupled;
pub mod discretize;
pub mod ensemble;
pub mod numkernel;
pub mod phs;
pub mod stability;

pub use error::{Error, Result};
pub use numkernel::{c64, ComplexMatrix, ComplexVector, WeightedSpace};
