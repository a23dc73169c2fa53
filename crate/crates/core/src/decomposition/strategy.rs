//! Named rules for choosing `(p0, θ)` from an exponent.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Result, VexError};
use crate::exponent::VariableExponent;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub p0: f64,
    pub theta: f64,
}

/// A rule producing `(p0, θ)` for an exponent.
pub trait ParameterStrategy: Send + Sync {
    fn tag(&self) -> &'static str;
    fn select(&self, p: &VariableExponent) -> Result<Parameters>;
}

/// Strategy name plus its JSON parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySpec {
    pub strategy: String,
    #[serde(default)]
    pub params: Value,
}

impl StrategySpec {
    pub fn named(name: &str) -> Self {
        Self { strategy: name.to_string(), params: Value::Null }
    }

    pub fn with_params(name: &str, params: Value) -> Self {
        Self { strategy: name.to_string(), params }
    }
}

fn lower_checked(p: &VariableExponent) -> Result<(f64, f64)> {
    let (lo, hi) = p.bounds();
    if !(lo > 1.0) {
        return Err(VexError::BoundViolation(format!("p_- = {lo} must exceed 1")));
    }
    Ok((lo, hi))
}

/// `p0 = p_+`, θ at the midpoint of `(0, 1 - 1/p_-)`.
pub struct RsStrategy;

impl ParameterStrategy for RsStrategy {
    fn tag(&self) -> &'static str {
        "rs"
    }

    fn select(&self, p: &VariableExponent) -> Result<Parameters> {
        let (lo, hi) = lower_checked(p)?;
        Ok(Parameters { p0: hi, theta: 0.5 * (1.0 - 1.0 / lo) })
    }
}

/// `p0 = max(p_+, s_+)`, θ at the midpoint of `(0, min(1 - 1/p_-, 1 - 1/s_-))`.
/// Profile bounds default to those of the exponent's own radial profile.
pub struct NekvindaStrategy {
    pub profile_bounds: Option<(f64, f64)>,
}

impl ParameterStrategy for NekvindaStrategy {
    fn tag(&self) -> &'static str {
        "nekvinda"
    }

    fn select(&self, p: &VariableExponent) -> Result<Parameters> {
        let (lo, hi) = lower_checked(p)?;
        let (s_lo, s_hi) = match (self.profile_bounds, p.profile()) {
            (Some(b), _) => b,
            (None, Some(profile)) => profile.bounds(),
            (None, None) => {
                return Err(VexError::BadParameter(
                    "nekvinda strategy needs profile bounds s_-, s_+ or a radial exponent".into(),
                ))
            }
        };
        if !(s_lo > 1.0 && s_lo <= s_hi && s_hi.is_finite()) {
            return Err(VexError::BoundViolation(format!("profile bounds ({s_lo}, {s_hi}) invalid")));
        }
        let cap = (1.0 - 1.0 / lo).min(1.0 - 1.0 / s_lo);
        Ok(Parameters { p0: hi.max(s_hi), theta: 0.5 * cap })
    }
}

/// `p0 = 2`, `θ = 1/(2 + α + β)`.
pub struct LernerStrategy {
    pub params: Option<(f64, f64)>,
}

impl ParameterStrategy for LernerStrategy {
    fn tag(&self) -> &'static str {
        "lerner"
    }

    fn select(&self, p: &VariableExponent) -> Result<Parameters> {
        lower_checked(p)?;
        let (alpha, beta) = self.params.or_else(|| p.lerner_params()).ok_or_else(|| {
            VexError::BadParameter("lerner strategy needs α, β or a lerner exponent".into())
        })?;
        crate::exponent::check_lerner_params(alpha, beta)?;
        Ok(Parameters { p0: 2.0, theta: 1.0 / (2.0 + alpha + beta) })
    }
}

/// Caller-supplied `(p0, θ)`.
pub struct ManualStrategy(pub Parameters);

impl ParameterStrategy for ManualStrategy {
    fn tag(&self) -> &'static str {
        "manual"
    }

    fn select(&self, p: &VariableExponent) -> Result<Parameters> {
        lower_checked(p)?;
        Ok(self.0)
    }
}

type Factory = fn(&Value) -> Result<Box<dyn ParameterStrategy>>;

pub struct StrategyRegistry {
    factories: BTreeMap<&'static str, Factory>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ProfileBoundsParams {
    s_minus: Option<f64>,
    s_plus: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct LernerParams {
    alpha: Option<f64>,
    beta: Option<f64>,
}

fn parse<T: for<'de> Deserialize<'de> + Default>(name: &str, v: &Value) -> Result<T> {
    if v.is_null() {
        return Ok(T::default());
    }
    serde_json::from_value(v.clone()).map_err(|e| VexError::Spec(format!("strategy {name}: {e}")))
}

fn both<T>(name: &str, a: Option<T>, b: Option<T>) -> Result<Option<(T, T)>> {
    match (a, b) {
        (Some(a), Some(b)) => Ok(Some((a, b))),
        (None, None) => Ok(None),
        _ => Err(VexError::Spec(format!("strategy {name}: give both parameters or neither"))),
    }
}

impl StrategyRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self { factories: BTreeMap::new() };
        r.register("rs", |_| Ok(Box::new(RsStrategy)));
        r.register("nekvinda", |v| {
            let p: ProfileBoundsParams = parse("nekvinda", v)?;
            Ok(Box::new(NekvindaStrategy { profile_bounds: both("nekvinda", p.s_minus, p.s_plus)? }))
        });
        r.register("lerner", |v| {
            let p: LernerParams = parse("lerner", v)?;
            Ok(Box::new(LernerStrategy { params: both("lerner", p.alpha, p.beta)? }))
        });
        r.register("manual", |v| {
            let p: Parameters = serde_json::from_value(v.clone())
                .map_err(|e| VexError::Spec(format!("strategy manual needs p0 and theta: {e}")))?;
            Ok(Box::new(ManualStrategy(p)))
        });
        r
    }

    pub fn global() -> &'static StrategyRegistry {
        static REGISTRY: OnceLock<StrategyRegistry> = OnceLock::new();
        REGISTRY.get_or_init(StrategyRegistry::with_builtins)
    }

    pub fn register(&mut self, name: &'static str, factory: Factory) {
        self.factories.insert(name, factory);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    pub fn build(&self, spec: &StrategySpec) -> Result<Box<dyn ParameterStrategy>> {
        let factory = self.factories.get(spec.strategy.as_str()).ok_or_else(|| {
            VexError::Spec(format!("unknown strategy {:?}; known: {:?}", spec.strategy, self.names()))
        })?;
        factory(&spec.params)
    }
}

/// `(p0, θ)` for `p` under the named strategy.
pub fn select_parameters(p: &VariableExponent, spec: &StrategySpec) -> Result<Parameters> {
    StrategyRegistry::global().build(spec)?.select(p)
}
