//! Orthogonal polynomials on the unit circle and their Riemann-Hilbert
//! companions for semiclassical weights.
//!
//! The pipeline runs weight -> moments -> Verblunsky coefficients ->
//! second-kind functions -> `Y_n`, `T_n`, `M_n`, and every identity is
//! exposed as a residual function so it can be checked to a tolerance.

// Guards are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cauchy;
pub mod error;
pub mod matrix;
pub mod moments;
pub mod painleve;
pub mod poly;
pub mod quadrature;
pub mod rh;
pub mod structure;
pub mod system;
pub mod szego;
pub mod verify;
pub mod weights;

pub use num_complex::Complex64;

pub use error::{OpucError, Result};
pub use matrix::Matrix2C;
pub use moments::MomentTable;
pub use system::OpucSystem;
pub use szego::{PolyPair, VerblunskyTable};
pub use weights::{WeightKind, WeightSpec};
