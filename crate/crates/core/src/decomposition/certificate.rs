//! Sampled certificate for a triple `(p, p0, θ, p1)`.
//!
//! Every check draws from streams keyed by the recorded seed, so a certificate
//! is reproducible from the two exponent specs, `p0`, `θ` and the seed.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lerner::LernerCompanion;
use super::{strict_preconditions, Mode};
use crate::error::{Result, VexError};
use crate::exponent::{ExponentSpec, Monotonicity, Transform, VariableExponent};
use crate::oscillation::SupSearchResult;
use crate::sampling::{log_uniform, stream, unit_direction, SamplePoint};

/// `|p - s|` above this counts as "different".
pub const SET_THRESHOLD: f64 = 1e-14;
const IDENTITY_TOL: f64 = 1e-12;
const TRANSFER_SLACK: f64 = 1e-10;
const LIPSCHITZ_SLACK: f64 = 1e-8;

/// Placeholder for the dimensional constant when none is supplied.
pub const NOMINAL_MU_N: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub samples: usize,
    pub pairs: usize,
    pub ladder: usize,
    pub seed: u64,
    pub mode: Mode,
    pub strategy: String,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { samples: 10_000, pairs: 10_000, ladder: 1000, seed: 0, mode: Mode::Strict, strategy: "manual".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub inequality: String,
    pub samples: usize,
    pub max_violation: f64,
    /// Check-specific statistic, e.g. the largest observed ratio.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    pub pass: bool,
}

impl Check {
    fn new(name: &str, inequality: &str, samples: usize, max_violation: f64, observed: Option<f64>) -> Self {
        Self {
            name: name.into(),
            inequality: inequality.into(),
            samples,
            max_violation,
            observed,
            pass: samples > 0 && max_violation <= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCertificate {
    pub p_spec: ExponentSpec,
    pub p0: f64,
    pub theta: f64,
    pub p1_spec: ExponentSpec,
    pub strategy: String,
    pub mode: Mode,
    pub proof_conforming: bool,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub skipped: Vec<String>,
    pub pass: bool,
}

/// Sample points: half with `|x|` log-uniform in `[1e-6, 1e6]`, half with
/// `log log |x|` uniform in `[0, 4π]` so oscillation in `L` is exercised.
/// `log_cap` bounds `log |x|` for exponents that only evaluate at
/// representable points.
fn sample_points(n: usize, count: usize, seed: u64, stream_id: u64, log_cap: f64) -> Vec<SamplePoint> {
    let top = (4.0 * std::f64::consts::PI).min(log_cap.ln());
    let mut rng = stream(seed, stream_id);
    (0..count)
        .map(|i| {
            let log_radius = if i % 2 == 0 {
                log_uniform(&mut rng, 1e-6, 1e6).ln()
            } else {
                (top * rng.gen::<f64>()).exp()
            };
            SamplePoint { direction: unit_direction(&mut rng, n), log_radius }
        })
        .collect()
}

/// Pairs alternate between independent points and a point with a nearby
/// partner (same direction, `log |x|` shifted by up to 1).
fn sample_pairs(n: usize, count: usize, seed: u64, log_cap: f64) -> Vec<(SamplePoint, SamplePoint)> {
    let first = sample_points(n, count, seed, 2, log_cap);
    let independent = sample_points(n, count, seed, 3, log_cap);
    let mut rng = stream(seed, 4);
    first
        .into_iter()
        .zip(independent)
        .enumerate()
        .map(|(i, (x, y))| {
            if i % 2 == 0 {
                (x, y)
            } else {
                let shift = log_uniform(&mut rng, 1e-9, 1.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 };
                let near = SamplePoint { direction: x.direction.clone(), log_radius: x.log_radius + shift };
                (x, near)
            }
        })
        .collect()
}

fn positive_part(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

struct Ctx<'a> {
    p: &'a VariableExponent,
    p1: &'a VariableExponent,
    p0: f64,
    theta: f64,
    cfg: &'a VerifyConfig,
}

impl Ctx<'_> {
    fn transform(&self) -> Transform {
        Transform::Decompose { p0: self.p0, theta: self.theta }
    }

    fn factor(&self) -> f64 {
        self.p0 * self.p0 * (1.0 - self.theta)
    }

    /// Largest `log |x|` both exponents can evaluate: unbounded when they
    /// work in log coordinates, else just below f64 overflow (pairs shift
    /// `log |x|` by up to 1).
    fn log_cap(&self) -> f64 {
        let far = 1e6;
        if self.p.eval_log_radius(far).is_some() && self.p1.eval_log_radius(far).is_some() {
            f64::INFINITY
        } else {
            (f64::MAX.ln() - 2.0).floor()
        }
    }

    fn points(&self, stream_id: u64) -> Vec<SamplePoint> {
        sample_points(self.p.dimension(), self.cfg.samples, self.cfg.seed, stream_id, self.log_cap())
    }

    fn values(&self, pts: &[SamplePoint]) -> Vec<(f64, f64, SamplePoint)> {
        pts.iter()
            .filter_map(|sp| Some((self.p.eval_sample(sp)?, self.p1.eval_sample(sp)?, sp.clone())))
            .collect()
    }

    fn identity(&self) -> Vec<Check> {
        let pts = self.points(1);
        let vals = self.values(&pts);
        let worst = vals
            .iter()
            .map(|(p, p1, _)| (self.theta / self.p0 + (1.0 - self.theta) / p1 - 1.0 / p).abs())
            .fold(0.0, f64::max);
        vec![Check::new(
            "identity",
            "|θ/p0 + (1-θ)/p1(x) - 1/p(x)| <= 1e-12",
            vals.len(),
            positive_part(worst - IDENTITY_TOL),
            Some(worst),
        )]
    }

    fn bounds(&self) -> Vec<Check> {
        let (lo, hi) = self.p.bounds();
        let floor = (1.0 - self.theta) * lo;
        let ceil = self.p0 * (1.0 - self.theta) * hi;
        let pts = self.points(1);
        let vals = self.values(&pts);
        let sampled = vals
            .iter()
            .map(|&(_, p1, _)| positive_part(floor - p1).max(positive_part(p1 - ceil)))
            .fold(0.0, f64::max);
        let sampled = positive_part(sampled - 1e-12 * ceil);
        // (1-θ) p_- must itself exceed 1 for the lower bound to keep p1 > 1
        let analytic = if floor > 1.0 { 0.0 } else { (1.0 - floor).max(f64::EPSILON) };
        vec![Check::new(
            "bounds",
            "1 < (1-θ) p_- <= p1(x) <= p0 (1-θ) p_+",
            vals.len(),
            sampled.max(analytic),
            Some(vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min)),
        )]
    }

    fn modulus_transfer(&self) -> Vec<Check> {
        let k = self.factor();
        let mut evaluated = 0;
        let mut worst = 0.0f64;
        let mut max_ratio = 0.0f64;
        for (x, y) in sample_pairs(self.p.dimension(), self.cfg.pairs, self.cfg.seed, self.log_cap()) {
            let (Some(px), Some(py), Some(qx), Some(qy)) =
                (self.p.eval_sample(&x), self.p.eval_sample(&y), self.p1.eval_sample(&x), self.p1.eval_sample(&y))
            else {
                continue;
            };
            evaluated += 1;
            let (dp, dq) = ((px - py).abs(), (qx - qy).abs());
            worst = worst.max(dq - k * dp - TRANSFER_SLACK);
            // tiny differences are dominated by rounding in the quotient
            if dp > 1e-9 {
                max_ratio = max_ratio.max(dq / dp);
            }
        }
        vec![Check::new(
            "modulus-transfer",
            "|p1(x) - p1(y)| <= p0² (1-θ) |p(x) - p(y)| + 1e-10",
            evaluated,
            positive_part(worst),
            Some(max_ratio),
        )]
    }

    fn profile(&self) -> (Vec<Check>, Vec<String>) {
        let Some(profile) = self.p.profile() else {
            return (vec![], vec!["profile checks: exponent has no radial profile".into()]);
        };
        let t = self.transform();
        let k = self.factor();
        let mut checks = Vec::new();

        // monotone transfer on an increasing ladder in [1e-3, 1e12]
        let m = self.cfg.ladder.max(2);
        let ladder: Vec<f64> = (0..m).map(|i| 10f64.powf(-3.0 + 15.0 * i as f64 / (m - 1) as f64)).collect();
        let s: Vec<f64> = ladder.iter().map(|&x| profile.value(x)).collect();
        let s1: Vec<f64> = s.iter().map(|&v| t.apply(v)).collect();
        let mut mono = 0.0f64;
        for i in 1..m {
            let (ds, ds1) = (s[i] - s[i - 1], s1[i] - s1[i - 1]);
            let wrong = match profile.monotonicity() {
                Monotonicity::Nondecreasing => positive_part(-ds1),
                Monotonicity::Nonincreasing => positive_part(ds1),
                Monotonicity::Unknown => {
                    if ds * ds1 < 0.0 {
                        ds1.abs()
                    } else {
                        0.0
                    }
                }
            };
            mono = mono.max(wrong);
        }
        checks.push(Check::new("profile-monotone", "s1 = T(s) moves with s on a ladder", m, mono, None));

        // |s1'| <= p0² |s'| with s1' from central differences of T∘s
        let mut deriv = 0.0f64;
        for &x in &ladder {
            let h = x.max(1.0) * 1e-5;
            let lo = (x - h).max(0.0);
            let fd = (t.apply(profile.value(x + h)) - t.apply(profile.value(lo))) / (x + h - lo);
            let bound = self.p0 * self.p0 * profile.derivative(x).abs();
            deriv = deriv.max(fd.abs() - bound - 1e-6 * (bound + 1e-12));
        }
        checks.push(Check::new("profile-derivative", "|s1'(x)| <= p0² |s'(x)|", m, positive_part(deriv), None));

        let pts = self.points(5);
        let mut evaluated = 0;
        let mut mismatches = 0usize;
        let mut gap = 0.0f64;
        for sp in &pts {
            let (Some(pv), Some(p1v), Some(sv)) =
                (self.p.eval_sample(sp), self.p1.eval_sample(sp), profile.value_at_log(sp.log_radius))
            else {
                continue;
            };
            evaluated += 1;
            let s1v = t.apply(sv);
            let (d, d1) = ((pv - sv).abs(), (p1v - s1v).abs());
            if (d > SET_THRESHOLD) != (d1 > SET_THRESHOLD) {
                mismatches += 1;
            }
            let lower = (1.0 - self.theta) * d;
            let upper = k * d;
            gap = gap.max(lower - d1 - TRANSFER_SLACK).max(d1 - upper - TRANSFER_SLACK);
        }
        checks.push(Check::new(
            "profile-set-equality",
            "|p - s| > 1e-14  iff  |p1 - s1| > 1e-14",
            evaluated,
            mismatches as f64,
            Some(mismatches as f64),
        ));
        checks.push(Check::new(
            "profile-gap",
            "(1-θ)|p - s| <= |p1 - s1| <= p0² (1-θ)|p - s|",
            evaluated,
            positive_part(gap),
            None,
        ));
        (checks, vec![])
    }

    fn lerner(&self) -> (Vec<Check>, Vec<String>) {
        let Some((alpha, beta)) = self.p.lerner_params() else {
            return (vec![], vec!["lerner checks: exponent is not of lerner type".into()]);
        };
        if self.p0 != 2.0 {
            return (vec![], vec![format!("lerner checks: need p0 = 2, got {}", self.p0)]);
        }
        let c = match LernerCompanion::with_theta(alpha, beta, self.theta) {
            Ok(c) => c,
            Err(e) => return (vec![], vec![format!("lerner checks: {e}")]),
        };
        let n = self.cfg.samples.max(2);
        let ts: Vec<f64> = (0..n).map(|i| std::f64::consts::TAU * i as f64 / (n - 1) as f64).collect();
        let sandwich = ts
            .iter()
            .map(|&t| {
                let (f, g) = (c.f(t), c.g(t));
                positive_part(f - g).max(positive_part(g - 2.0 * f))
            })
            .fold(0.0, f64::max);
        let mut rng = stream(self.cfg.seed, 6);
        let mut quot = 0.0f64;
        for _ in 0..n {
            let a = std::f64::consts::TAU * rng.gen::<f64>();
            let b = a + log_uniform(&mut rng, 1e-6, 1.0);
            quot = quot.max((c.g(b) - c.g(a)).abs() / (b - a));
        }
        let pts = self.points(7);
        let mut evaluated = 0;
        let mut companion = 0.0f64;
        for sp in &pts {
            if let Some(v) = self.p1.eval_sample(sp) {
                evaluated += 1;
                companion = companion.max((v - 2.0 - c.q1_at_log_radius(sp.log_radius)).abs());
            }
        }
        let checks = vec![
            Check::new("lerner-sandwich", "F(t) <= G(t) <= 2F(t)", n, sandwich, None),
            Check::new(
                "lerner-lipschitz",
                "|G(a) - G(b)| / |a - b| <= 4β + 1e-8",
                n,
                positive_part(quot - 4.0 * beta - LIPSCHITZ_SLACK),
                Some(quot),
            ),
            Check::new(
                "lerner-companion",
                "p1(x) = 2 + G(L(x))",
                evaluated,
                positive_part(companion - 1e-12),
                Some(companion),
            ),
        ];
        (checks, vec![])
    }

    /// With `p_∞` available, `|p1 - p1_∞| <= p0²(1-θ)|p - p_∞|` on samples.
    fn infinity_transfer(&self) -> (Vec<Check>, Vec<String>) {
        let Some(p_inf) = self.p.p_infinity() else {
            return (
                vec![],
                vec!["decay-at-infinity transfer: p has no limit at infinity; (p1)_∞ is undefined".into()],
            );
        };
        let p1_inf = self.transform().apply(p_inf);
        let k = self.factor();
        let pts = self.points(8);
        let vals = self.values(&pts);
        let worst = vals
            .iter()
            .map(|&(p, p1, _)| (p1 - p1_inf).abs() - k * (p - p_inf).abs() - TRANSFER_SLACK)
            .fold(0.0, f64::max);
        (
            vec![Check::new(
                "infinity-transfer",
                "|p1(x) - p1_∞| <= p0² (1-θ) |p(x) - p_∞|",
                vals.len(),
                positive_part(worst),
                Some(p1_inf),
            )],
            vec![],
        )
    }
}

/// Runs every applicable check; failures are recorded, never raised.
pub fn verify_decomposition(
    p: &VariableExponent,
    p0: f64,
    theta: f64,
    p1: &VariableExponent,
    cfg: &VerifyConfig,
) -> DecompositionCertificate {
    let ctx = Ctx { p, p1, p0, theta, cfg };
    type Group<'a> = Box<dyn Fn() -> (Vec<Check>, Vec<String>) + Send + Sync + 'a>;
    let groups: Vec<Group> = vec![
        Box::new(|| (ctx.identity(), vec![])),
        Box::new(|| (ctx.bounds(), vec![])),
        Box::new(|| (ctx.modulus_transfer(), vec![])),
        Box::new(|| ctx.profile()),
        Box::new(|| ctx.lerner()),
        Box::new(|| ctx.infinity_transfer()),
    ];
    let results: Vec<(Vec<Check>, Vec<String>)> = groups.par_iter().map(|g| g()).collect();
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    for (c, s) in results {
        checks.extend(c);
        skipped.extend(s);
    }
    let pass = checks.iter().all(|c| c.pass);
    DecompositionCertificate {
        p_spec: p.spec().clone(),
        p0,
        theta,
        p1_spec: p1.spec().clone(),
        strategy: cfg.strategy.clone(),
        mode: cfg.mode,
        proof_conforming: strict_preconditions(p.bounds(), p0, theta),
        seed: cfg.seed,
        checks,
        skipped,
        pass,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisVerdict {
    pub sup_norm: f64,
    pub oscillation_sup: f64,
    pub stabilized: bool,
    pub total: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonVerdict {
    pub epsilon: f64,
    pub mu_n: f64,
    pub mu_n_nominal: bool,
    pub c_l: f64,
    pub alpha_within_epsilon: bool,
    /// `α + β + 2β C_L` against `2α(1 + C_L)`.
    pub chain_lhs: f64,
    pub chain_rhs: f64,
    pub chain_holds: bool,
    pub q: HypothesisVerdict,
    pub q1: HypothesisVerdict,
}

/// `ε = μ_n / (8(1 + C_L))` and the empirical smallness hypotheses for `q`
/// (sup norm `α + β`) and `q1` (sup norm at most `2(α + β)`).
pub fn epsilon_threshold(
    alpha: f64,
    beta: f64,
    mu_n: Option<f64>,
    c_l: f64,
    q_sup: &SupSearchResult,
    q1_sup: &SupSearchResult,
) -> Result<EpsilonVerdict> {
    crate::exponent::check_lerner_params(alpha, beta)?;
    let mu = mu_n.unwrap_or(NOMINAL_MU_N);
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(VexError::BadParameter(format!("μ_n must be positive, got {mu}")));
    }
    if !(c_l >= 0.0 && c_l.is_finite()) {
        return Err(VexError::BadParameter(format!("C_L must be finite and nonnegative, got {c_l}")));
    }
    let verdict = |sup_norm: f64, r: &SupSearchResult| {
        let total = sup_norm + r.sup;
        let stabilized = r.stabilized(crate::diagnostics::N2_STABILITY);
        HypothesisVerdict { sup_norm, oscillation_sup: r.sup, stabilized, total, holds: stabilized && total <= mu }
    };
    let epsilon = mu / (8.0 * (1.0 + c_l));
    let chain_lhs = alpha + beta + 2.0 * beta * c_l;
    let chain_rhs = 2.0 * alpha * (1.0 + c_l);
    Ok(EpsilonVerdict {
        epsilon,
        mu_n: mu,
        mu_n_nominal: mu_n.is_none(),
        c_l,
        alpha_within_epsilon: alpha <= epsilon,
        chain_lhs,
        chain_rhs,
        chain_holds: chain_lhs < chain_rhs,
        q: verdict(alpha + beta, q_sup),
        q1: verdict(2.0 * (alpha + beta), q1_sup),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{decompose, select_parameters, StrategySpec};
    use crate::exponent::{build_exponent, Bump, ProfileSpec};
    use crate::oscillation::{Cube, SearchConfig};

    fn small(strategy: &str) -> VerifyConfig {
        VerifyConfig { samples: 2000, pairs: 2000, ladder: 200, seed: 7, mode: Mode::Strict, strategy: strategy.into() }
    }

    fn certify(p: &VariableExponent, strategy: &str) -> DecompositionCertificate {
        let sel = select_parameters(p, &StrategySpec::named(strategy)).unwrap();
        let p1 = decompose(p, sel.p0, sel.theta, Mode::Strict).unwrap();
        verify_decomposition(p, sel.p0, sel.theta, &p1, &small(strategy))
    }

    fn check<'a>(c: &'a DecompositionCertificate, name: &str) -> &'a Check {
        c.checks.iter().find(|k| k.name == name).unwrap_or_else(|| panic!("missing {name}"))
    }

    #[test]
    fn constant_exact() {
        let p = build_exponent(&ExponentSpec::constant(3.0, 1)).unwrap();
        let p1 = decompose(&p, 4.0, 0.5, Mode::Strict).unwrap();
        let c = verify_decomposition(&p, 4.0, 0.5, &p1, &small("manual"));
        assert!(c.pass, "{:#?}", c.checks);
        // 1/8 + 1/4.8 - 1/3 is zero up to one rounding
        assert!(check(&c, "identity").observed.unwrap() <= 1e-16);
        assert!(c.proof_conforming);
        assert!(c.skipped.iter().any(|s| s.contains("radial profile")));
    }

    #[test]
    fn lerner_passes_with_ratio_below_factor() {
        let p = build_exponent(&ExponentSpec::lerner(0.1, 0.05, 1)).unwrap();
        let c = certify(&p, "lerner");
        assert!(c.pass, "{:#?}", c.checks);
        let ratio = check(&c, "modulus-transfer").observed.unwrap();
        assert!(ratio > 0.0 && ratio <= 4.0 * (1.0 - 1.0 / 2.15) + 1e-9);
        for name in ["lerner-sandwich", "lerner-lipschitz", "lerner-companion"] {
            assert!(check(&c, name).pass);
        }
        assert!(c.skipped.iter().any(|s| s.contains("no limit at infinity")));
    }

    #[test]
    fn radial_profile_checks_run() {
        let profile = ProfileSpec::LogDecay { a: 2.0, b: 1.0 };
        let p = build_exponent(&ExponentSpec::nekvinda(&profile, Some(Bump { radius: 1.0, gap: 0.5 }), 2)).unwrap();
        let c = certify(&p, "nekvinda");
        assert!(c.pass, "{:#?}", c.checks);
        for name in ["profile-monotone", "profile-derivative", "profile-set-equality", "profile-gap", "infinity-transfer"] {
            assert!(check(&c, name).samples > 0, "{name}");
        }
    }

    #[test]
    fn boundary_theta_fails_bounds() {
        let p = build_exponent(&ExponentSpec::piecewise_radial(&[1.0], &[2.0, 3.0], 1)).unwrap();
        let theta = 0.5;
        let p1 = decompose(&p, 3.0, theta, Mode::Free).unwrap();
        let c = verify_decomposition(&p, 3.0, theta, &p1, &VerifyConfig { mode: Mode::Free, ..small("manual") });
        assert!(!c.pass);
        assert!(!check(&c, "bounds").pass);
        assert!(check(&c, "identity").pass);
        assert!(!c.proof_conforming);
    }

    #[test]
    fn deterministic_json() {
        let p = build_exponent(&ExponentSpec::lerner(0.1, 0.05, 2)).unwrap();
        let a = serde_json::to_string(&certify(&p, "lerner")).unwrap();
        let b = serde_json::to_string(&certify(&p, "lerner")).unwrap();
        assert_eq!(a, b);
    }

    fn fake_sup(sup: f64) -> SupSearchResult {
        SupSearchResult {
            sup,
            witness: Cube { center: vec![0.0], side: 1.0 },
            trace: vec![(0, sup), (1, sup), (2, sup)],
            seed: 0,
            config: SearchConfig::default(),
        }
    }

    #[test]
    fn epsilon_examples() {
        let v = epsilon_threshold(0.1, 0.05, None, 1.0, &fake_sup(0.1), &fake_sup(0.2)).unwrap();
        assert_eq!(v.epsilon, 0.0625);
        assert!(v.mu_n_nominal);
        assert!(!v.alpha_within_epsilon);
        assert!(v.chain_holds);
        assert!((v.chain_lhs - 0.25).abs() < 1e-15 && (v.chain_rhs - 0.4).abs() < 1e-15);
        assert!(v.q.holds && v.q1.holds);
        assert!(epsilon_threshold(0.1, 0.05, Some(0.0), 1.0, &fake_sup(0.1), &fake_sup(0.2)).is_err());
        assert!(epsilon_threshold(0.1, 0.1, Some(1.0), 1.0, &fake_sup(0.1), &fake_sup(0.2)).is_err());
    }
}
