//! Foundational numerics: smooth-function representation, fixed-step ODE
//! integration with dense output, grid-based Cʳ norms, and symplectic
//! linear algebra.
//!
//! All values are immutable after construction and safe to share across
//! threads.

pub mod bump;
pub mod fit;
pub mod jet;
pub mod matrix_curve;
pub mod norms;
pub mod ode;
pub mod quad;
pub mod smooth;
pub mod symplectic;

pub use jet::{Jet2, Jet4};
pub use matrix_curve::MatrixCurve;
pub use norms::{grid_cr_norm, grid_norms, GridNorms, NORM_GRID};
pub use ode::{integrate, steps_for, DenseSolution, STEPS_PER_UNIT};
pub use smooth::{Provenance, SmoothFn};
pub use symplectic::{j_matrix, max_col_sum, SymplecticMap};
