//! Alikhanov (L2-1σ) time stepping for the 2D nonlinear time-fractional
//! subdiffusion problem
//!
//! ```text
//! D_t^alpha u - nu Δu = N(u) + s(x, y, t)   in (0, L1) x (0, L2) x (0, T]
//! u = u_0 at t = 0,  u = 0 on the boundary
//! ```
//!
//! on graded temporal meshes `t_n = T (n/N)^r`, with a Newton-linearized
//! reaction (one linear solve per step) and the five-point Laplacian in space.
//!
//! Modules:
//! - [`mesh`]: temporal graded meshes and the spatial grid.
//! - [`kernel`]: convolution weights, the discrete derivative, property
//!   audits and the scalar stability recurrence.
//! - [`spatial`]: grid functions, the Laplacian and discrete norms.
//! - [`solver`]: step assembly and the time march.
//! - [`analysis`]: error series, convergence orders, two-mesh estimates and
//!   truncation-error fits.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod checkpoint;
pub mod error;
pub mod kernel;
pub mod linsolve;
pub mod mesh;
pub mod par;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod spatial;

pub use error::{FracError, Result};
pub use kernel::{Method, SchemeParams, WeightTable};
pub use mesh::{validate_mesh, MeshReport, SpatialGrid, TemporalMesh};
pub use problem::{example1, example1_with, example2, ExactSolution, ProblemSpec, Reaction};
pub use solver::{march, march_linear, march_with, MarchOptions, Solution};
pub use spatial::GridFunction2D;
