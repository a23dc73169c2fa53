//! Real-valued functions on ℝⁿ used as integrands.

use std::fmt;

use crate::exponent::{double_log, VariableExponent};
use crate::expr::Expr;

pub trait ScalarField: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
}

/// Closure-backed field.
pub struct FnField<F> {
    dimension: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> FnField<F> {
    pub fn new(dimension: usize, f: F) -> Self {
        Self { dimension, f }
    }
}

impl<F: Fn(&[f64]) -> f64 + Send + Sync> ScalarField for FnField<F> {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

impl<F> fmt::Debug for FnField<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FnField(n={})", self.dimension)
    }
}

/// `L(x) = log log |x|` on `|x| >= e`, zero inside.
#[derive(Debug, Clone, Copy)]
pub struct DoubleLog {
    pub dimension: usize,
}

impl ScalarField for DoubleLog {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn value(&self, x: &[f64]) -> f64 {
        double_log(x)
    }
}

#[derive(Debug, Clone)]
pub struct ExprField {
    expr: Expr,
    dimension: usize,
}

impl ExprField {
    pub fn new(expr: Expr, dimension: usize) -> Self {
        Self { expr, dimension }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl ScalarField for ExprField {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.expr.eval(x)
    }
}

impl ScalarField for VariableExponent {
    fn dimension(&self) -> usize {
        VariableExponent::dimension(self)
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x)
    }
}

/// `outer ∘ inner` for a scalar map `outer`.
pub struct Composed<'a, G> {
    pub outer: G,
    pub inner: &'a dyn ScalarField,
}

impl<G: Fn(f64) -> f64 + Send + Sync> ScalarField for Composed<'_, G> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.outer)(self.inner.value(x))
    }
}
