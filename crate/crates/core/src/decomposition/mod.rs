//! Splitting `1/p = θ/p0 + (1-θ)/p1` with constant `p0`, the choice of
//! `(p0, θ)`, and sampled certificates for the resulting triple.

mod certificate;
mod lerner;
mod strategy;

use serde::{Deserialize, Serialize};

pub use certificate::{
    epsilon_threshold, verify_decomposition, Check, DecompositionCertificate, EpsilonVerdict, HypothesisVerdict,
    VerifyConfig, NOMINAL_MU_N,
};
pub use lerner::{CompanionField, LernerCompanion};
pub use strategy::{
    select_parameters, LernerStrategy, ManualStrategy, NekvindaStrategy, ParameterStrategy, Parameters,
    RsStrategy, StrategyRegistry, StrategySpec,
};

use crate::error::{Result, VexError};
use crate::exponent::{build_exponent, ExponentSpec, Transform, VariableExponent};

/// Preconditions applied by [`decompose`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `p0 - θ p_+ >= 1` and `θ < 1 - 1/p_-`.
    #[default]
    Strict,
    /// Only `p0 - θ p_+ > 0`.
    Free,
}

/// Whether `(p0, θ)` meets the strict preconditions for `p`.
pub fn strict_preconditions(bounds: (f64, f64), p0: f64, theta: f64) -> bool {
    let (lo, hi) = bounds;
    theta > 0.0 && theta < 1.0 - 1.0 / lo && p0 > 1.0 && p0 - theta * hi >= 1.0 - 1e-12
}

/// `p1 = p0 (1-θ) p / (p0 - θ p)` as a derived exponent.
pub fn decompose(p: &VariableExponent, p0: f64, theta: f64, mode: Mode) -> Result<VariableExponent> {
    let (lo, hi) = p.bounds();
    if mode == Mode::Strict {
        let den = p0 - theta * hi;
        if den < 1.0 - 1e-12 {
            return Err(VexError::DenominatorViolation(format!(
                "strict mode needs p0 - θ p_+ >= 1, got {den}"
            )));
        }
        if !(theta < 1.0 - 1.0 / lo) {
            return Err(VexError::BadParameter(format!(
                "strict mode needs θ < 1 - 1/p_- = {}, got {theta}",
                1.0 - 1.0 / lo
            )));
        }
    }
    // checks θ ∈ (0,1), p0 > 1 and positivity of the denominator
    Transform::Decompose { p0, theta }.bounds((lo, hi))?;
    build_exponent(&ExponentSpec::derived(p.spec(), Transform::Decompose { p0, theta }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::ExponentSpec;

    #[test]
    fn constant_example() {
        let p = build_exponent(&ExponentSpec::constant(3.0, 1)).unwrap();
        let p1 = decompose(&p, 4.0, 0.5, Mode::Strict).unwrap();
        assert!((p1.eval(&[1.0]) - 2.4).abs() < 1e-15);
        assert!((p1.lower() - 2.4).abs() < 1e-15);
    }

    #[test]
    fn fixed_point() {
        let p = build_exponent(&ExponentSpec::constant(2.5, 2)).unwrap();
        for theta in [0.1, 0.3, 0.55] {
            let p1 = decompose(&p, 2.5, theta, Mode::Free).unwrap();
            assert!((p1.eval(&[0.3, 4.0]) - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn lerner_matches_companion() {
        let p = build_exponent(&ExponentSpec::lerner(0.1, 0.05, 1)).unwrap();
        let c = LernerCompanion::new(0.1, 0.05).unwrap();
        let p1 = decompose(&p, 2.0, c.theta, Mode::Strict).unwrap();
        for t in [0.5, 2.0, 30.0, 1e3, 1e8] {
            let got = p1.eval_log_radius(t).unwrap();
            assert!((got - 2.0 - c.q1_at_log_radius(t)).abs() < 1e-14);
        }
    }

    #[test]
    fn denominator_errors() {
        let p = build_exponent(&ExponentSpec::piecewise_radial(&[1.0], &[2.0, 3.0], 1)).unwrap();
        // free mode only needs p0 > θ p_+
        assert!(decompose(&p, 1.2, 0.3, Mode::Free).is_ok());
        assert!(matches!(
            decompose(&p, 1.2, 0.3, Mode::Strict).unwrap_err(),
            VexError::DenominatorViolation(_)
        ));
        assert!(matches!(
            decompose(&p, 1.2, 0.4, Mode::Free).unwrap_err(),
            VexError::DenominatorViolation(_)
        ));
        assert!(decompose(&p, 3.0, 0.0, Mode::Free).is_err());
        assert!(decompose(&p, 3.0, 1.0, Mode::Free).is_err());
        // θ at the boundary 1 - 1/p_-
        assert!(decompose(&p, 3.0, 0.5, Mode::Strict).is_err());
        assert!(decompose(&p, 3.0, 0.5, Mode::Free).is_ok());
    }
}
