//! The companion of `p = 2 + F(L)` with `F(t) = α + β sin t`: with `p0 = 2`
//! the decomposed exponent is `p1 = 2 + G(L)` where
//! `G = 2F / (2 - θ(2 + F))`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exponent::{check_lerner_params, double_log, double_log_at_log_radius};
use crate::field::ScalarField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LernerCompanion {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
}

impl LernerCompanion {
    /// Companion with `θ = 1/(2 + α + β)`, the largest θ keeping `G <= 2F`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_lerner_params(alpha, beta)?;
        Ok(Self { alpha, beta, theta: 1.0 / (2.0 + alpha + beta) })
    }

    /// Companion for an arbitrary θ; the sandwich may then fail.
    pub fn with_theta(alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        check_lerner_params(alpha, beta)?;
        Ok(Self { alpha, beta, theta })
    }

    pub fn f(&self, t: f64) -> f64 {
        self.alpha + self.beta * t.sin()
    }

    pub fn f_prime(&self, t: f64) -> f64 {
        self.beta * t.cos()
    }

    fn g_of_f(&self, f: f64) -> f64 {
        2.0 * f / (2.0 - self.theta * (2.0 + f))
    }

    pub fn g(&self, t: f64) -> f64 {
        self.g_of_f(self.f(t))
    }

    /// `G'(t) = 4(1-θ) F'(t) / (2 - θ(2 + F))²`.
    pub fn g_prime(&self, t: f64) -> f64 {
        let den = 2.0 - self.theta * (2.0 + self.f(t));
        4.0 * (1.0 - self.theta) * self.f_prime(t) / (den * den)
    }

    /// `G` is increasing in `F`, so its range is `[G(α-β), G(α+β)]`.
    pub fn g_range(&self) -> (f64, f64) {
        (self.g_of_f(self.alpha - self.beta), self.g_of_f(self.alpha + self.beta))
    }

    /// `q(x) = F(L(x))`.
    pub fn q(&self, x: &[f64]) -> f64 {
        self.f(double_log(x))
    }

    /// `q1(x) = G(L(x))`.
    pub fn q1(&self, x: &[f64]) -> f64 {
        self.g(double_log(x))
    }

    pub fn q1_at_log_radius(&self, t: f64) -> f64 {
        self.g(double_log_at_log_radius(t))
    }

    pub fn q_field(&self, dimension: usize) -> CompanionField {
        CompanionField { companion: *self, dimension, which: Which::Q }
    }

    pub fn q1_field(&self, dimension: usize) -> CompanionField {
        CompanionField { companion: *self, dimension, which: Which::Q1 }
    }
}

#[derive(Debug, Clone, Copy)]
enum Which {
    Q,
    Q1,
}

/// `q` or `q1` as a field on ℝⁿ.
#[derive(Debug, Clone, Copy)]
pub struct CompanionField {
    companion: LernerCompanion,
    dimension: usize,
    which: Which,
}

impl ScalarField for CompanionField {
    fn dimension(&self) -> usize {
        self.dimension
    }
    fn value(&self, x: &[f64]) -> f64 {
        match self.which {
            Which::Q => self.companion.q(x),
            Which::Q1 => self.companion.q1(x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::VexError;
    use std::f64::consts::TAU;

    #[test]
    fn g_at_zero() {
        let c = LernerCompanion::new(0.1, 0.05).unwrap();
        // 0.2 / (2 - 2.1/2.15)
        let want = 0.2 / (2.0 - 2.1 / 2.15);
        assert!((c.g(0.0) - want).abs() < 1e-15);
        assert!((c.g(0.0) - 0.195_454_5).abs() < 1e-7);
        assert!(c.f(0.0) <= c.g(0.0) && c.g(0.0) <= 2.0 * c.f(0.0));
    }

    #[test]
    fn sandwich_and_range() {
        let c = LernerCompanion::new(0.1, 0.05).unwrap();
        for i in 0..=1000 {
            let t = TAU * i as f64 / 1000.0;
            let (f, g) = (c.f(t), c.g(t));
            assert!(f <= g && g <= 2.0 * f + 1e-15, "t={t}");
        }
        let (lo, hi) = c.g_range();
        assert!(lo >= 0.05 && hi <= 0.3 + 1e-15);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let c = LernerCompanion::new(0.3, 0.2).unwrap();
        for i in 0..100 {
            let t = 0.07 * i as f64;
            let h = 1e-6;
            let fd = (c.g(t + h) - c.g(t - h)) / (2.0 * h);
            assert!((fd - c.g_prime(t)).abs() < 1e-8);
            assert!(c.g_prime(t).abs() <= 4.0 * c.beta);
        }
    }

    #[test]
    fn rejects_bad_order() {
        assert!(matches!(LernerCompanion::new(0.05, 0.1).unwrap_err(), VexError::BadParameter(_)));
        assert!(LernerCompanion::new(0.1, 0.1).is_err());
        assert!(LernerCompanion::new(0.1, 0.0).is_err());
    }
}
