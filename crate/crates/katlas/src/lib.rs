//! Numerical atlas for the autonomous Kirchhoff-type equation
//!
//! ```text
//! -(a + b ∫ |∇u|²) Δu = f(u)   on ℝᴺ,   a ≥ 0, b > 0, N ≥ 1,
//! ```
//!
//! with a Berestycki–Lions prototype nonlinearity f(t) = -ωt + Σ cᵢ|t|^{pᵢ-2}t.
//!
//! Radial bound states of the local scalar-field problem -Δv = f(v) are
//! computed by shooting ([`groundstate`]); every Kirchhoff solution is then a
//! rescaling u(x) = v(tx) where t solves the scalar equation
//! t^{N-4} - a t^{N-2} = b‖v‖²_{D^{1,2}} ([`rescale`]). The [`kirchhoff`]
//! module lifts bound states branch by branch, computes energies through two
//! independent routes and verifies PDE and Pohozaev residuals.

// Negated comparisons like !(x > 0.0) are deliberate: they reject NaN inputs,
// which x <= 0.0 would silently accept.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod error;
pub mod groundstate;
pub mod jsonnum;
pub mod kirchhoff;
pub mod nonlinearity;
pub mod ode;
pub mod quad;
pub mod rescale;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
