use serde::{Deserialize, Serialize};

use crate::error::{Result, VexError};
use crate::expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Monotonicity {
    Nondecreasing,
    Nonincreasing,
    Unknown,
}

/// Serializable description of a radial profile `s: [0, ∞) → ℝ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileSpec {
    /// `s(x) = a`.
    Constant { a: f64 },
    /// `s(x) = a + b / log(e + x)`.
    LogDecay { a: f64, b: f64 },
    /// `s(x) = a + b sin x`.
    Sine { a: f64, b: f64 },
    /// Free-form expression in `x` (or `r`); bounds are supplied by the caller.
    Expr {
        expr: String,
        bounds: [f64; 2],
        #[serde(default = "unknown_monotonicity")]
        monotone: Monotonicity,
    },
}

fn unknown_monotonicity() -> Monotonicity {
    Monotonicity::Unknown
}

#[derive(Debug, Clone)]
enum ProfileKind {
    Constant(f64),
    LogDecay { a: f64, b: f64 },
    Sine { a: f64, b: f64 },
    Expr { expr: Expr, bounds: (f64, f64) },
}

/// A radial profile with its derivative and monotonicity flag.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    spec: ProfileSpec,
    kind: ProfileKind,
    monotone: Monotonicity,
}

impl RadialProfile {
    pub fn from_spec(spec: &ProfileSpec) -> Result<Self> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(VexError::BadParameter(format!("profile parameter {what} must be finite")))
            }
        };
        let (kind, monotone) = match spec {
            ProfileSpec::Constant { a } => (ProfileKind::Constant(finite(*a, "a")?), Monotonicity::Nondecreasing),
            ProfileSpec::LogDecay { a, b } => {
                let (a, b) = (finite(*a, "a")?, finite(*b, "b")?);
                let mono = if b >= 0.0 { Monotonicity::Nonincreasing } else { Monotonicity::Nondecreasing };
                (ProfileKind::LogDecay { a, b }, mono)
            }
            ProfileSpec::Sine { a, b } => {
                let (a, b) = (finite(*a, "a")?, finite(*b, "b")?);
                let mono = if b == 0.0 { Monotonicity::Nondecreasing } else { Monotonicity::Unknown };
                (ProfileKind::Sine { a, b }, mono)
            }
            ProfileSpec::Expr { expr, bounds, monotone } => {
                let parsed = Expr::parse(expr)?;
                if parsed.min_dimension() > 1 {
                    return Err(VexError::BadParameter("profile expressions take a single variable".into()));
                }
                if !(bounds[0] <= bounds[1]) {
                    return Err(VexError::BadParameter("profile bounds must be ordered".into()));
                }
                (ProfileKind::Expr { expr: parsed, bounds: (bounds[0], bounds[1]) }, *monotone)
            }
        };
        Ok(Self { spec: spec.clone(), kind, monotone })
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn monotonicity(&self) -> Monotonicity {
        self.monotone
    }

    /// True when the derivative is a central difference rather than closed form.
    pub fn numeric_derivative(&self) -> bool {
        matches!(self.kind, ProfileKind::Expr { .. })
    }

    pub fn value(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant(a) => *a,
            ProfileKind::LogDecay { a, b } => a + b / (std::f64::consts::E + x).ln(),
            ProfileKind::Sine { a, b } => a + b * x.sin(),
            ProfileKind::Expr { expr, .. } => expr.eval(&[x]),
        }
    }

    /// `s` at `x = e^t`, for radii too large to form directly.
    pub fn value_at_log(&self, t: f64) -> Option<f64> {
        match &self.kind {
            ProfileKind::Constant(a) => Some(*a),
            ProfileKind::LogDecay { a, b } => Some(a + b / crate::sampling::log_e_plus_exp(t)),
            _ => {
                let x = t.exp();
                x.is_finite().then(|| self.value(x))
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            ProfileKind::Constant(_) => 0.0,
            ProfileKind::LogDecay { b, .. } => {
                let l = (std::f64::consts::E + x).ln();
                -b / ((std::f64::consts::E + x) * l * l)
            }
            ProfileKind::Sine { b, .. } => b * x.cos(),
            ProfileKind::Expr { .. } => {
                let h = x.abs().max(1.0) * 2f64.powi(-26);
                let lo = (x - h).max(0.0);
                let hi = x + h;
                (self.value(hi) - self.value(lo)) / (hi - lo)
            }
        }
    }

    /// `(inf s, sup s)` over `[0, ∞)`.
    pub fn bounds(&self) -> (f64, f64) {
        match &self.kind {
            ProfileKind::Constant(a) => (*a, *a),
            ProfileKind::LogDecay { a, b } => {
                if *b >= 0.0 {
                    (*a, a + b)
                } else {
                    (a + b, *a)
                }
            }
            ProfileKind::Sine { a, b } => (a - b.abs(), a + b.abs()),
            ProfileKind::Expr { bounds, .. } => *bounds,
        }
    }

    /// `lim s(x)` as `x → ∞`, when known in closed form.
    pub fn limit(&self) -> Option<f64> {
        match &self.kind {
            ProfileKind::Constant(a) | ProfileKind::LogDecay { a, .. } => Some(*a),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_decay_derivative_matches_central_difference() {
        let s = RadialProfile::from_spec(&ProfileSpec::LogDecay { a: 2.0, b: 1.0 }).unwrap();
        for x in [0.5, 3.0, 40.0, 1e4] {
            let h = 1e-5 * x;
            let fd = (s.value(x + h) - s.value(x - h)) / (2.0 * h);
            assert!((fd - s.derivative(x)).abs() <= 1e-7 * s.derivative(x).abs());
        }
        assert_eq!(s.bounds(), (2.0, 3.0));
        assert_eq!(s.monotonicity(), Monotonicity::Nonincreasing);
    }

    #[test]
    fn expr_profile_uses_numeric_derivative() {
        let spec = ProfileSpec::Expr {
            expr: "2 + 1/(1+x)".into(),
            bounds: [2.0, 3.0],
            monotone: Monotonicity::Nonincreasing,
        };
        let s = RadialProfile::from_spec(&spec).unwrap();
        assert!(s.numeric_derivative());
        let exact = -1.0 / 16.0;
        assert!((s.derivative(3.0) - exact).abs() < 1e-7);
    }

    #[test]
    fn spec_json_shape() {
        let json = serde_json::to_string(&ProfileSpec::LogDecay { a: 2.0, b: 1.0 }).unwrap();
        assert_eq!(json, r#"{"kind":"log-decay","a":2.0,"b":1.0}"#);
    }
}
