//! Bergman kernels and balanced metrics on a computable polarized model:
//! circle-invariant Kähler metrics on the projective line.
//!
//! The crate is organized as
//! - [`surface`]: potentials, curvature, Laplacian, Lichnerowicz operator;
//! - [`bergman`]: Gram matrices, Bergman kernels, weighted kernels, β and
//!   the asymptotic-expansion fit;
//! - [`solvers`]: balanced and T-balanced metric solvers;
//! - [`circle`]: Fourier coefficients and entire extensions on the circle.

pub mod error;
pub mod jet;
pub mod quadrature;
pub mod solvers;
pub mod bergman;
pub mod circle;
pub mod surface;

pub use error::{Error, Result};
