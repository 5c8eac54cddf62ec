//! Finite-element solver for 2D scalar transmission problems whose diffusion
//! coefficient changes sign across the interface between two subdomains.
//!
//! The sign change breaks coercivity, so a direct Galerkin discretization may
//! be singular on perfectly good meshes. This crate instead reformulates the
//! problem as an optimal-control one: the solution on one subdomain is
//! smoothly extended to the whole domain by a coercive auxiliary problem
//! steered by a control function, and the control is found by minimizing the
//! squared trace mismatch across the interface plus a mesh-dependent Tikhonov
//! term. Every linear solve in the loop is symmetric positive definite.
//!
//! Modules:
//! - [`mesh`]: interface-conforming triangulations of the reference
//!   geometries (split square, disk-in-annulus, half-disk with a corner),
//!   uniform refinement, validation and plain-text I/O.
//! - [`linalg`]: sparse SPD storage and a profile Cholesky factorization
//!   built for factorize-once / solve-many use.
//! - [`fem`]: P1 Lagrange spaces on the global domain and each subdomain,
//!   stiffness/load/interface-mass assembly, control projection and error
//!   norms.
//! - [`transmission`]: the state and adjoint solves, cost, exact gradient and
//!   Hessian products of the regularized trace-mismatch functional.
//! - [`optimize`]: limited-memory quasi-Newton and conjugate-gradient
//!   minimization with the `lambda = C h^q` regularization schedule.
//! - [`analysis`]: closed-form well-posedness diagnostics (annulus forbidden
//!   contrasts, corner dispersion relation and regularity exponent).
//! - [`mod@bench`]: the three manufactured benchmark problems and convergence
//!   sweeps with log-log rate fits.

// negated float comparisons like `!(x > 0.0)` are deliberate: they reject
// NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod optimize;
pub mod transmission;

pub use geometry::{Point, Region};
pub use mesh::{Mesh, MeshQualityReport};
