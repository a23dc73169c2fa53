//! Numerics for variable-exponent Lebesgue spaces `L^{p(·)}(ℝⁿ)`.
//!
//! Exponents are closed-form maps built through a registry of named families.
//! Grid routines compute modulars, Luxemburg norms and a discrete maximal
//! function; the oscillation module estimates weighted mean-oscillation
//! suprema; diagnostics and decomposition check the sampled inequalities that
//! govern membership in the exponent classes.

// `!(a > b)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod exponent;
pub mod expr;
pub mod field;
pub mod grid;
pub mod oscillation;
pub mod reduce;
pub mod sampling;

pub use error::{Result, VexError};
pub use exponent::{build_exponent, conjugate_exponent, eval_exponent, ExponentSpec, VariableExponent};
pub use field::ScalarField;
pub use grid::{GridFunction, GridSpec};
