//! Built-in exponent families and the name → builder registry.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Deserialize;
use serde_json::Value;

use super::profile::{ProfileSpec, RadialProfile};
use super::{ExponentMap, ExponentSpec, VariableExponent, BOUND_TOL};
use crate::error::{Result, VexError};
use crate::expr::Expr;
use crate::sampling::{PointSampler, RadiusSchedule};

/// Evaluator plus the bounds its family guarantees.
pub struct Built {
    pub map: Arc<dyn ExponentMap>,
    pub bounds: (f64, f64),
}

/// Builds one family of exponents from JSON parameters.
pub trait ExponentFamily: Send + Sync {
    fn name(&self) -> &'static str;

    fn build(
        &self,
        params: &Value,
        dimension: usize,
        declared: Option<(f64, f64)>,
        registry: &FamilyRegistry,
    ) -> Result<Built>;
}

pub struct FamilyRegistry {
    families: BTreeMap<&'static str, Box<dyn ExponentFamily>>,
}

impl fmt::Debug for FamilyRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.families.keys()).finish()
    }
}

impl FamilyRegistry {
    pub fn empty() -> Self {
        Self { families: BTreeMap::new() }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(ConstantFamily));
        reg.register(Box::new(PiecewiseConstantFamily));
        reg.register(Box::new(ExpressionFamily));
        reg.register(Box::new(LernerFamily));
        reg.register(Box::new(NekvindaRadialFamily));
        reg.register(Box::new(DerivedFamily));
        reg
    }

    /// Shared registry holding the built-in families.
    pub fn global() -> &'static FamilyRegistry {
        static REGISTRY: OnceLock<FamilyRegistry> = OnceLock::new();
        REGISTRY.get_or_init(FamilyRegistry::with_builtins)
    }

    pub fn register(&mut self, family: Box<dyn ExponentFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    pub fn build(&self, spec: &ExponentSpec) -> Result<VariableExponent> {
        if spec.dimension == 0 {
            return Err(VexError::BadParameter("dimension must be positive".into()));
        }
        let family = self
            .families
            .get(spec.family.as_str())
            .ok_or_else(|| VexError::Spec(format!("unknown exponent family {:?}", spec.family)))?;
        let declared = spec.bounds.map(|[lo, hi]| (lo, hi));
        let built = family.build(&spec.params, spec.dimension, declared, self)?;
        VariableExponent::assemble(spec.clone(), built)
    }
}

fn params<T: for<'de> Deserialize<'de>>(family: &str, value: &Value) -> Result<T> {
    serde_json::from_value(value.clone())
        .map_err(|e| VexError::Spec(format!("bad params for {family}: {e}")))
}

fn check_declared_contains(declared: Option<(f64, f64)>, analytic: (f64, f64)) -> Result<()> {
    if let Some((lo, hi)) = declared {
        if lo > analytic.0 + BOUND_TOL || hi < analytic.1 - BOUND_TOL {
            return Err(VexError::BoundViolation(format!(
                "declared bounds ({lo}, {hi}) do not contain the family range ({}, {})",
                analytic.0, analytic.1
            )));
        }
    }
    Ok(())
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    match x {
        [a] => a.abs(),
        _ => x.iter().map(|v| v * v).sum::<f64>().sqrt(),
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug)]
struct ConstantMap(f64);

impl ExponentMap for ConstantMap {
    fn eval(&self, _x: &[f64]) -> f64 {
        self.0
    }
    fn eval_log_radius(&self, _t: f64) -> Option<f64> {
        Some(self.0)
    }
    fn p_infinity(&self) -> Option<f64> {
        Some(self.0)
    }
}

struct ConstantFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantParams {
    value: f64,
}

impl ExponentFamily for ConstantFamily {
    fn name(&self) -> &'static str {
        "constant"
    }

    fn build(&self, params: &Value, _n: usize, declared: Option<(f64, f64)>, _: &FamilyRegistry) -> Result<Built> {
        let ConstantParams { value } = self::params(self.name(), params)?;
        check_declared_contains(declared, (value, value))?;
        Ok(Built { map: Arc::new(ConstantMap(value)), bounds: (value, value) })
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
enum PieceCoordinate {
    #[default]
    Radius,
    X1,
}

#[derive(Debug)]
struct PiecewiseMap {
    breaks: Vec<f64>,
    values: Vec<f64>,
    coordinate: PieceCoordinate,
}

impl PiecewiseMap {
    fn at(&self, c: f64) -> f64 {
        let idx = self.breaks.partition_point(|&b| b <= c);
        self.values[idx]
    }
}

impl ExponentMap for PiecewiseMap {
    fn eval(&self, x: &[f64]) -> f64 {
        match self.coordinate {
            PieceCoordinate::Radius => self.at(norm(x)),
            PieceCoordinate::X1 => self.at(x[0]),
        }
    }
    fn eval_log_radius(&self, t: f64) -> Option<f64> {
        match self.coordinate {
            PieceCoordinate::Radius => Some(self.at(t.exp())),
            PieceCoordinate::X1 => None,
        }
    }
    fn p_infinity(&self) -> Option<f64> {
        match self.coordinate {
            PieceCoordinate::Radius => self.values.last().copied(),
            PieceCoordinate::X1 => {
                let (first, last) = (self.values[0], *self.values.last().unwrap());
                (first == last).then_some(first)
            }
        }
    }
}

/// Values `v_0, …, v_k` on the pieces `c < b_1`, `b_1 <= c < b_2`, …, `c >= b_k`,
/// where `c` is `|x|` or `x1`.
struct PiecewiseConstantFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PiecewiseParams {
    breaks: Vec<f64>,
    values: Vec<f64>,
    #[serde(default)]
    coordinate: PieceCoordinate,
}

impl ExponentFamily for PiecewiseConstantFamily {
    fn name(&self) -> &'static str {
        "piecewise-constant"
    }

    fn build(&self, params: &Value, _n: usize, declared: Option<(f64, f64)>, _: &FamilyRegistry) -> Result<Built> {
        let p: PiecewiseParams = self::params(self.name(), params)?;
        if p.values.len() != p.breaks.len() + 1 {
            return Err(VexError::BadParameter("piecewise-constant needs one more value than breaks".into()));
        }
        if p.breaks.windows(2).any(|w| !(w[0] < w[1])) || p.breaks.iter().any(|b| !b.is_finite()) {
            return Err(VexError::BadParameter("breaks must be finite and strictly increasing".into()));
        }
        let lo = p.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        check_declared_contains(declared, (lo, hi))?;
        let map = PiecewiseMap { breaks: p.breaks, values: p.values, coordinate: p.coordinate };
        Ok(Built { map: Arc::new(map), bounds: (lo, hi) })
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug)]
struct ExpressionMap {
    expr: Expr,
    p_inf: Option<f64>,
}

impl ExponentMap for ExpressionMap {
    fn eval(&self, x: &[f64]) -> f64 {
        self.expr.eval(x)
    }
    fn p_infinity(&self) -> Option<f64> {
        self.p_inf
    }
}

/// Closed-form expressions. Bounds come from the caller and are spot-checked
/// on a fixed sample.
struct ExpressionFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpressionParams {
    expr: String,
    #[serde(default)]
    p_inf: Option<f64>,
}

const EXPRESSION_SPOT_CHECKS: usize = 4096;

impl ExponentFamily for ExpressionFamily {
    fn name(&self) -> &'static str {
        "expression"
    }

    fn build(&self, params: &Value, n: usize, declared: Option<(f64, f64)>, _: &FamilyRegistry) -> Result<Built> {
        let p: ExpressionParams = self::params(self.name(), params)?;
        let expr = Expr::parse(&p.expr)?;
        if expr.min_dimension() > n {
            return Err(VexError::BadParameter(format!(
                "expression references x{} but dimension is {n}",
                expr.min_dimension()
            )));
        }
        let (lo, hi) = declared.ok_or_else(|| {
            VexError::Spec("expression exponents need declared bounds [p_lo, p_hi]".into())
        })?;
        let sampler = PointSampler::new(
            EXPRESSION_SPOT_CHECKS,
            RadiusSchedule::LogUniform { min: 1e-3, max: 1e4 },
            0x5eed,
        );
        for sp in sampler.points(n) {
            let x = sp.point().expect("bounded radius");
            let v = expr.eval(&x);
            if !(v >= lo - BOUND_TOL && v <= hi + BOUND_TOL) {
                return Err(VexError::BoundViolation(format!(
                    "expression value {v} at {x:?} outside declared bounds ({lo}, {hi})"
                )));
            }
        }
        Ok(Built { map: Arc::new(ExpressionMap { expr, p_inf: p.p_inf }), bounds: (lo, hi) })
    }
}

// ---------------------------------------------------------------------------

/// `L(x) = log log |x|` for `|x| >= e`, zero otherwise.
pub fn double_log(x: &[f64]) -> f64 {
    double_log_at_log_radius(norm(x).ln())
}

/// `L` as a function of `t = log |x|`.
pub fn double_log_at_log_radius(t: f64) -> f64 {
    if t >= 1.0 {
        t.ln()
    } else {
        0.0
    }
}

#[derive(Debug)]
pub(crate) struct LernerMap {
    pub alpha: f64,
    pub beta: f64,
}

impl LernerMap {
    fn at_l(&self, l: f64) -> f64 {
        2.0 + self.alpha + self.beta * l.sin()
    }
}

impl ExponentMap for LernerMap {
    fn eval(&self, x: &[f64]) -> f64 {
        self.at_l(double_log(x))
    }
    fn eval_log_radius(&self, t: f64) -> Option<f64> {
        Some(self.at_l(double_log_at_log_radius(t)))
    }
    fn lerner_params(&self) -> Option<(f64, f64)> {
        Some((self.alpha, self.beta))
    }
}

/// `p(x) = 2 + α + β sin L(x)` with `0 < β < α`.
struct LernerFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LernerParams {
    alpha: f64,
    beta: f64,
}

pub(crate) fn check_lerner_params(alpha: f64, beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < alpha && alpha.is_finite()) {
        return Err(VexError::BadParameter(format!(
            "require 0<β<α, got α={alpha}, β={beta}"
        )));
    }
    Ok(())
}

impl ExponentFamily for LernerFamily {
    fn name(&self) -> &'static str {
        "lerner"
    }

    fn build(&self, params: &Value, _n: usize, declared: Option<(f64, f64)>, _: &FamilyRegistry) -> Result<Built> {
        let LernerParams { alpha, beta } = self::params(self.name(), params)?;
        check_lerner_params(alpha, beta)?;
        let bounds = (2.0 + alpha - beta, 2.0 + alpha + beta);
        check_declared_contains(declared, bounds)?;
        Ok(Built { map: Arc::new(LernerMap { alpha, beta }), bounds })
    }
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, serde::Serialize)]
pub struct Bump {
    pub radius: f64,
    pub gap: f64,
}

#[derive(Debug)]
struct NekvindaMap {
    profile: RadialProfile,
    bump: Option<Bump>,
}

impl NekvindaMap {
    fn with_bump(&self, r: f64, s: f64) -> f64 {
        match self.bump {
            Some(b) if r < b.radius => s + b.gap,
            _ => s,
        }
    }
}

impl ExponentMap for NekvindaMap {
    fn eval(&self, x: &[f64]) -> f64 {
        let r = norm(x);
        self.with_bump(r, self.profile.value(r))
    }
    fn eval_log_radius(&self, t: f64) -> Option<f64> {
        let s = self.profile.value_at_log(t)?;
        Some(self.with_bump(t.exp(), s))
    }
    fn profile(&self) -> Option<&RadialProfile> {
        Some(&self.profile)
    }
    fn p_infinity(&self) -> Option<f64> {
        self.profile.limit()
    }
}

/// `p(x) = s(|x|)` for a radial profile `s`, optionally perturbed by a
/// constant gap on a ball: `p(x) = s(|x|) + gap` for `|x| < radius`.
struct NekvindaRadialFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NekvindaParams {
    profile: ProfileSpec,
    #[serde(default)]
    bump: Option<Bump>,
}

impl ExponentFamily for NekvindaRadialFamily {
    fn name(&self) -> &'static str {
        "nekvinda-radial"
    }

    fn build(&self, params: &Value, _n: usize, declared: Option<(f64, f64)>, _: &FamilyRegistry) -> Result<Built> {
        let p: NekvindaParams = self::params(self.name(), params)?;
        let profile = RadialProfile::from_spec(&p.profile)?;
        let (s_lo, s_hi) = profile.bounds();
        if !(s_lo > 1.0 && s_hi.is_finite()) {
            return Err(VexError::BoundViolation(format!(
                "profile bounds ({s_lo}, {s_hi}) violate 1 < inf s <= sup s < inf"
            )));
        }
        let bounds = match p.bump {
            Some(b) => {
                if !(b.radius > 0.0 && b.gap.is_finite()) {
                    return Err(VexError::BadParameter("bump needs radius > 0 and finite gap".into()));
                }
                (s_lo.min(s_lo + b.gap), s_hi.max(s_hi + b.gap))
            }
            None => (s_lo, s_hi),
        };
        check_declared_contains(declared, bounds)?;
        Ok(Built { map: Arc::new(NekvindaMap { profile, bump: p.bump }), bounds })
    }
}

// ---------------------------------------------------------------------------

/// Pointwise transforms producing a new exponent from a parent.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    /// `p ↦ p / (p - 1)`.
    Conjugate,
    /// `p ↦ p0 (1-θ) p / (p0 - θ p)`.
    Decompose { p0: f64, theta: f64 },
}

impl Transform {
    pub fn apply(&self, p: f64) -> f64 {
        match *self {
            Transform::Conjugate => p / (p - 1.0),
            Transform::Decompose { p0, theta } => p0 * (1.0 - theta) * p / (p0 - theta * p),
        }
    }

    /// Image of the parent's bounds, in increasing order.
    pub fn bounds(&self, (lo, hi): (f64, f64)) -> Result<(f64, f64)> {
        match *self {
            Transform::Conjugate => Ok((self.apply(hi), self.apply(lo))),
            Transform::Decompose { p0, theta } => {
                if !(theta > 0.0 && theta < 1.0) {
                    return Err(VexError::BadParameter(format!("θ must lie in (0,1), got {theta}")));
                }
                if !(p0 > 1.0 && p0.is_finite()) {
                    return Err(VexError::BadParameter(format!("p0 must lie in (1,∞), got {p0}")));
                }
                if !(p0 - theta * hi > 0.0) {
                    return Err(VexError::DenominatorViolation(format!(
                        "p0 - θ p_+ = {} must be positive",
                        p0 - theta * hi
                    )));
                }
                // increasing in p on the admissible range
                Ok((self.apply(lo), self.apply(hi)))
            }
        }
    }
}

#[derive(Debug)]
struct DerivedMap {
    parent: Arc<dyn ExponentMap>,
    transform: Transform,
}

impl ExponentMap for DerivedMap {
    fn eval(&self, x: &[f64]) -> f64 {
        self.transform.apply(self.parent.eval(x))
    }
    fn eval_log_radius(&self, t: f64) -> Option<f64> {
        self.parent.eval_log_radius(t).map(|v| self.transform.apply(v))
    }
    fn p_infinity(&self) -> Option<f64> {
        self.parent.p_infinity().map(|v| self.transform.apply(v))
    }
}

struct DerivedFamily;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DerivedParams {
    parent: ExponentSpec,
    transform: Transform,
}

impl ExponentFamily for DerivedFamily {
    fn name(&self) -> &'static str {
        "derived"
    }

    fn build(&self, params: &Value, n: usize, declared: Option<(f64, f64)>, registry: &FamilyRegistry) -> Result<Built> {
        let p: DerivedParams = self::params(self.name(), params)?;
        if p.parent.dimension != n {
            return Err(VexError::BadParameter("derived exponent must match parent dimension".into()));
        }
        let parent = registry.build(&p.parent)?;
        let bounds = p.transform.bounds(parent.bounds())?;
        check_declared_contains(declared, bounds)?;
        let map = DerivedMap { parent: parent.map.clone(), transform: p.transform };
        Ok(Built { map: Arc::new(map), bounds })
    }
}
