//! Linear Poincaré maps of geodesic flows from curvature data.
//!
//! Along a unit-length geodesic, the derivative of the geodesic flow
//! between orthogonal cross-sections is a linear symplectic map `DP`,
//! determined by the Jacobi equation `J'' + R J = 0` driven by the
//! curvature along the geodesic. This crate computes `DP` from curvature
//! data, constructs explicit C²-small metric perturbations supported in an
//! arbitrarily thin tube that realize nearby symplectic targets while
//! keeping the geodesic, and verifies the quantitative estimates behind
//! that construction at desk scale.
//!
//! Module map:
//!
//! - [`numkit`] — smooth functions, fixed-step RK4 with dense output,
//!   grid Cʳ norms, symplectic maps, matrix curves.
//! - [`jacobi`] — scalar and matrix Jacobi machinery: fundamental
//!   solutions, reduction of order, Riccati transport, variation of
//!   parameters, `DP` assembly.
//! - [`surface`] — the n = 1 mechanism: three perturbation families
//!   targeting `a'(1)`, `a(1)`, `b(1)`, and Newton realization of targets
//!   in Sp(1).
//! - [`metric`] — synthesis of a surface metric realizing a prescribed
//!   curvature along the axis, tube interpolation, and the C² estimates.
//! - [`highdim`] — the n ≥ 2 mechanism: Riccati-side perturbation
//!   schemes, eigenvalue-separation functionals, Sp(n) coordinates, and
//!   Newton realization.

pub mod error;
pub mod highdim;
pub mod jacobi;
pub mod metric;
pub mod numkit;
pub mod surface;

pub use error::{Error, Result};
