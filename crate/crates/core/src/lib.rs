//! Layer potentials, boundary operators and distributional boundary data for
//! the Helmholtz and Laplace equations on smooth planar domains.

pub mod boundary_ops;
pub mod cli;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod identities;
pub mod kernels;
pub mod neumann;
pub mod potentials;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
