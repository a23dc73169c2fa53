//! Variable exponents `p: ℝⁿ → (1, ∞)`.
//!
//! Exponents are closed-form evaluators, never grids: diagnostics need values at
//! `|x|` far beyond anything a grid could hold. Radial families also evaluate
//! from `log |x|` directly.

mod families;
mod profile;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub use families::{
    double_log, double_log_at_log_radius, Built, Bump, ExponentFamily, FamilyRegistry, Transform,
};
pub use profile::{Monotonicity, ProfileSpec, RadialProfile};
pub(crate) use families::check_lerner_params;

use crate::error::{Result, VexError};
use crate::sampling::{PointSampler, SamplePoint};

/// Slack allowed between evaluated values and declared bounds.
pub const BOUND_TOL: f64 = 1e-12;

/// Pointwise evaluator behind a [`VariableExponent`].
pub trait ExponentMap: Send + Sync + fmt::Debug {
    fn eval(&self, x: &[f64]) -> f64;

    /// Value on the sphere `|x| = e^t`, for radial exponents.
    fn eval_log_radius(&self, _t: f64) -> Option<f64> {
        None
    }

    fn profile(&self) -> Option<&RadialProfile> {
        None
    }

    /// `lim p(x)` as `|x| → ∞`, when the family knows it.
    fn p_infinity(&self) -> Option<f64> {
        None
    }

    fn lerner_params(&self) -> Option<(f64, f64)> {
        None
    }
}

/// JSON document describing an exponent:
/// `{"family": "...", "params": {...}, "dimension": n, "bounds": [p_lo, p_hi]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSpec {
    pub family: String,
    #[serde(default)]
    pub params: Value,
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
}

impl ExponentSpec {
    pub fn constant(value: f64, dimension: usize) -> Self {
        Self { family: "constant".into(), params: json!({ "value": value }), dimension, bounds: None }
    }

    pub fn lerner(alpha: f64, beta: f64, dimension: usize) -> Self {
        Self {
            family: "lerner".into(),
            params: json!({ "alpha": alpha, "beta": beta }),
            dimension,
            bounds: None,
        }
    }

    pub fn piecewise_radial(breaks: &[f64], values: &[f64], dimension: usize) -> Self {
        Self {
            family: "piecewise-constant".into(),
            params: json!({ "breaks": breaks, "values": values }),
            dimension,
            bounds: None,
        }
    }

    pub fn expression(expr: &str, bounds: (f64, f64), dimension: usize) -> Self {
        Self {
            family: "expression".into(),
            params: json!({ "expr": expr }),
            dimension,
            bounds: Some([bounds.0, bounds.1]),
        }
    }

    pub fn nekvinda(profile: &ProfileSpec, bump: Option<Bump>, dimension: usize) -> Self {
        let mut params = json!({ "profile": profile });
        if let Some(b) = bump {
            params["bump"] = json!(b);
        }
        Self { family: "nekvinda-radial".into(), params, dimension, bounds: None }
    }

    pub fn derived(parent: &ExponentSpec, transform: Transform) -> Self {
        Self {
            family: "derived".into(),
            params: json!({ "parent": parent, "transform": transform }),
            dimension: parent.dimension,
            bounds: None,
        }
    }
}

/// An evaluable exponent with declared bounds `1 < p_- <= p_+ < ∞`.
#[derive(Clone)]
pub struct VariableExponent {
    spec: ExponentSpec,
    bounds: (f64, f64),
    map: Arc<dyn ExponentMap>,
}

impl fmt::Debug for VariableExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VariableExponent")
            .field("family", &self.spec.family)
            .field("dimension", &self.spec.dimension)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl VariableExponent {
    fn assemble(mut spec: ExponentSpec, built: Built) -> Result<Self> {
        let (lo, hi) = built.bounds;
        if !(lo > 1.0) || !hi.is_finite() || !(lo <= hi) {
            return Err(VexError::BoundViolation(format!(
                "p_- must exceed 1 and p_+ must be finite, got ({lo}, {hi})"
            )));
        }
        spec.bounds = Some([lo, hi]);
        Ok(Self { spec, bounds: built.bounds, map: built.map })
    }

    /// Spec echo with the resolved bounds filled in.
    pub fn spec(&self) -> &ExponentSpec {
        &self.spec
    }

    pub fn family(&self) -> &str {
        &self.spec.family
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    /// Declared `(p_-, p_+)`.
    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn lower(&self) -> f64 {
        self.bounds.0
    }

    pub fn upper(&self) -> f64 {
        self.bounds.1
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.map.eval(x)
    }

    pub fn eval_log_radius(&self, t: f64) -> Option<f64> {
        self.map.eval_log_radius(t)
    }

    /// Value at a sample point; radial families never form `|x|` explicitly.
    pub fn eval_sample(&self, sp: &SamplePoint) -> Option<f64> {
        self.map
            .eval_log_radius(sp.log_radius)
            .or_else(|| sp.point().map(|x| self.map.eval(&x)))
    }

    pub fn profile(&self) -> Option<&RadialProfile> {
        self.map.profile()
    }

    pub fn p_infinity(&self) -> Option<f64> {
        self.map.p_infinity()
    }

    pub fn lerner_params(&self) -> Option<(f64, f64)> {
        self.map.lerner_params()
    }

    pub fn map(&self) -> &Arc<dyn ExponentMap> {
        &self.map
    }
}

/// Builds an exponent from its spec using the built-in families.
pub fn build_exponent(spec: &ExponentSpec) -> Result<VariableExponent> {
    FamilyRegistry::global().build(spec)
}

pub fn eval_exponent(p: &VariableExponent, x: &[f64]) -> f64 {
    p.eval(x)
}

/// The dual exponent `p'` with `1/p + 1/p' = 1`.
pub fn conjugate_exponent(p: &VariableExponent) -> VariableExponent {
    let spec = ExponentSpec::derived(p.spec(), Transform::Conjugate);
    let bounds = Transform::Conjugate
        .bounds(p.bounds())
        .expect("conjugation is total on (1, ∞)");
    VariableExponent {
        spec: ExponentSpec { bounds: Some([bounds.0, bounds.1]), ..spec },
        bounds,
        map: Arc::new(ConjugateMap(p.map.clone())),
    }
}

#[derive(Debug)]
struct ConjugateMap(Arc<dyn ExponentMap>);

impl ExponentMap for ConjugateMap {
    fn eval(&self, x: &[f64]) -> f64 {
        Transform::Conjugate.apply(self.0.eval(x))
    }
    fn eval_log_radius(&self, t: f64) -> Option<f64> {
        self.0.eval_log_radius(t).map(|v| Transform::Conjugate.apply(v))
    }
    fn p_infinity(&self) -> Option<f64> {
        self.0.p_infinity().map(|v| Transform::Conjugate.apply(v))
    }
}

/// Sampled extremes of an exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsEstimate {
    pub lower: f64,
    pub upper: f64,
    pub lower_witness: SamplePoint,
    pub upper_witness: SamplePoint,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Smallest and largest sampled values, each attained at its witness.
/// Samples whose radius overflows are skipped for non-radial families.
pub fn estimate_bounds(p: &VariableExponent, sampler: &PointSampler) -> Result<BoundsEstimate> {
    sampler.validate()?;
    let mut best: Option<BoundsEstimate> = None;
    let mut skipped = 0;
    for sp in sampler.points(p.dimension()) {
        let Some(v) = p.eval_sample(&sp) else {
            skipped += 1;
            continue;
        };
        match best.as_mut() {
            None => {
                best = Some(BoundsEstimate {
                    lower: v,
                    upper: v,
                    lower_witness: sp.clone(),
                    upper_witness: sp,
                    evaluated: 1,
                    skipped: 0,
                })
            }
            Some(b) => {
                b.evaluated += 1;
                if v < b.lower {
                    b.lower = v;
                    b.lower_witness = sp;
                } else if v > b.upper {
                    b.upper = v;
                    b.upper_witness = sp;
                }
            }
        }
    }
    let mut est = best.ok_or_else(|| VexError::BadConfig("no sample could be evaluated".into()))?;
    est.skipped = skipped;
    Ok(est)
}
