//! Frame-level Hermitian geometry with torsion.
//!
//! `bhe_core` is the allocation-only core of the workbench: exact multilinear
//! algebra on finite frames ([`forms`]), invariant Hermitian geometry on Lie
//! algebra frames ([`algebra`], [`hermitian`], [`connection`], [`geometry`]),
//! the canonical `T^2` symmetry reduction of Bismut-Hermitian-Einstein models
//! ([`reduction`]), discretized axially symmetric product surfaces
//! ([`toric`]) and the Gauss-Newton machinery for the reduced scalar PDE
//! ([`solver`]).
//!
//! The crate is `no_std` and only needs `alloc`; file formats, the CLI and
//! everything else touching the operating system live in the `bhe` crate.
#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod catalog;
pub mod connection;
pub mod convergence;
pub mod error;
pub mod forms;
pub mod geometry;
pub mod hermitian;
pub mod linalg;
pub mod reduction;
pub mod report;
pub mod solver;
pub mod tensor;
pub mod toric;

pub use error::{Error, Result};
pub use report::Report;
