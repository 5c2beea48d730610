//! Time stepping for the one-dimensional subdiffusion equation
//!
//! ```text
//! ∂_t^α u - ∂_x (a(x, t) ∂_x u) = f,   x ∈ (0, 1),  0 < t <= T,
//! u(0, t) = u(1, t) = 0,  u(x, 0) = u_0(x),
//! ```
//!
//! with a Caputo derivative of order `0 < α < 1` and a diffusion coefficient that
//! may depend on time. Space is discretized by P1 Galerkin finite elements, time by
//! convolution quadrature generated by BDF2 (with or without a first-step
//! correction) or by backward Euler.
//!
//! Modules:
//! - [`cq`]: convolution quadrature weights
//! - [`fem1d`]: mesh, mass and stiffness assembly, tridiagonal solves, L² norms
//! - [`stepper`]: the three time steppers
//! - [`oracle`]: Mittag-Leffler evaluation and exact spectral solutions
//! - [`experiments`]: preset problems and convergence studies
//! - [`config`]: run configuration used by the command line front end
//! - [`verify`]: self-check suites

// NaN must fail validation, hence `!(x > 0.0)` rather than `x <= 0.0`
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod cq;
pub mod error;
pub mod experiments;
pub mod fem1d;
pub mod oracle;
pub mod quad;
pub mod stepper;
pub mod verify;

pub use cq::{generate_weights, CqWeights, Method};
pub use error::{Error, Result};
pub use fem1d::{Coefficient, Mesh1D, TriDiag};
pub use stepper::{InitialData, Problem, Scheme, Source, Trajectory};
