//! Surface finite element approximation of linear parabolic SPDEs with
//! Whittle-Matérn additive noise on closed curves and surfaces, together
//! with a harness for coupled strong-convergence studies.
//!
//! The scheme advances nodal coefficients with backward Euler,
//!
//! ```text
//! (M + Δt T) αⁿ⁺¹ = M αⁿ + M Δt^{1/2} Q_k^{-γ}(M, K) L ρⁿ,   ρⁿ ~ N(0, I),
//! ```
//!
//! where `M`, `T`, `K` are the P1 mass matrix and the matrices of the two
//! elliptic forms, `L Lᵀ = M`, and `Q_k^{-γ}` is a sinc quadrature of the
//! fractional inverse built from shifted solves `(e^{y} M + K)⁻¹`.

// `!(x > 0.0)` is used on purpose to reject NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod cli;
pub mod coefficients;
pub mod config;
pub mod error;
pub mod factor;
pub mod fractional;
pub mod geometry;
pub mod harness;
pub mod mesh;
pub mod noise;
pub mod sparse;
pub mod stepper;
pub mod vtk;

pub use error::{Error, Result};
