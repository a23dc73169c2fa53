//! Sampled checks of the three Nekvinda conditions for a radial profile `s`:
//! bounds (N1), derivative decay against `b_{k,α}` (N2) and integrability of
//! `c^{1/|p(x) - s(|x|)|}` (N3).

use serde::{Deserialize, Serialize};

use super::iterlog::{b_weight, iterated_exp};
use crate::error::{Result, VexError};
use crate::exponent::{Monotonicity, RadialProfile, VariableExponent};

/// Threshold below which `|p - s|` counts as zero (outside the set `E`).
pub const GAP_EPS: f64 = 1e-14;

/// Midpoint nodes per annulus.
pub const ANNULUS_NODES: usize = 128;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NekvindaConfig {
    pub k: u32,
    pub alpha: f64,
    pub c: f64,
    /// Annuli `[0,1), [1,2), [2,4), …`; this many in total.
    pub annuli: usize,
    /// Decades of `x` above `e_k` scanned for (N2).
    #[serde(default = "default_n2_decades")]
    pub n2_decades: u32,
    #[serde(default = "default_n2_points")]
    pub n2_points_per_decade: usize,
}

fn default_n2_decades() -> u32 {
    12
}

fn default_n2_points() -> usize {
    64
}

impl Default for NekvindaConfig {
    fn default() -> Self {
        Self { k: 1, alpha: 1.0, c: 0.5, annuli: 40, n2_decades: 12, n2_points_per_decade: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N1Report {
    pub s_minus: f64,
    pub s_plus: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N2Report {
    pub k: u32,
    pub alpha: f64,
    pub k_est: f64,
    pub witness_x: f64,
    /// `(decade index above e_k, running sup of |s'| / b_{k,α})`.
    pub trace: Vec<(u32, f64)>,
    pub tail_change: f64,
    pub numeric_derivative: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N3Report {
    pub c: f64,
    pub annulus_sums: Vec<f64>,
    pub total: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NekvindaReport {
    pub monotone: Monotonicity,
    pub n1: N1Report,
    pub n2: N2Report,
    pub n3: N3Report,
    pub pass: bool,
    pub config: NekvindaConfig,
}

pub fn check_n1(profile: &RadialProfile) -> N1Report {
    let (s_minus, s_plus) = profile.bounds();
    N1Report { s_minus, s_plus, pass: s_minus > 1.0 && s_plus.is_finite() }
}

/// Relative K_est growth tolerated over the last two decades for (N2).
pub const N2_STABILITY: f64 = 0.05;

pub fn check_n2(profile: &RadialProfile, k: u32, alpha: f64, decades: u32, per_decade: usize) -> Result<N2Report> {
    if k < 1 {
        return Err(VexError::BadConfig("(N2) needs k >= 1".into()));
    }
    if decades == 0 || per_decade == 0 {
        return Err(VexError::BadConfig("(N2) needs at least one decade and one point".into()));
    }
    let start = iterated_exp(k);
    if !start.is_finite() {
        return Err(VexError::BadConfig(format!("e_{k} overflows")));
    }
    let mut running = 0.0f64;
    let mut witness_x = start;
    let mut trace = Vec::with_capacity(decades as usize);
    for d in 0..decades {
        for i in 0..per_decade {
            let x = start * 10f64.powf(d as f64 + (i as f64 + 0.5) / per_decade as f64);
            let ratio = profile.derivative(x).abs() / b_weight(k, alpha, x)?;
            if ratio > running {
                running = ratio;
                witness_x = x;
            }
        }
        trace.push((d, running));
    }
    let last = trace.last().unwrap().1;
    let back = trace[trace.len().saturating_sub(3)].1;
    let tail_change = if last == back {
        0.0
    } else if back <= 0.0 {
        f64::INFINITY
    } else {
        (last - back) / back
    };
    Ok(N2Report {
        k,
        alpha,
        k_est: running,
        witness_x,
        trace,
        tail_change,
        numeric_derivative: profile.numeric_derivative(),
        pass: tail_change < N2_STABILITY,
    })
}

/// Surface area of the unit sphere in ℝⁿ (2 for n = 1).
pub fn sphere_area(n: usize) -> f64 {
    // 2 π^{n/2} / Γ(n/2), with Γ on half-integers by recurrence
    let mut gamma = if n.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut arg = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while arg < n as f64 / 2.0 {
        gamma *= arg;
        arg += 1.0;
    }
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma
}

/// `∫_{a <= |x| < b} g(|x|) dx` for each dyadic annulus, by a midpoint rule in
/// the radius times the sphere area.
pub fn annulus_integrals(integrand: &dyn Fn(f64) -> f64, n: usize, annuli: usize) -> Vec<f64> {
    let area = sphere_area(n);
    (0..annuli)
        .map(|m| {
            let (a, b) = if m == 0 { (0.0, 1.0) } else { (2f64.powi(m as i32 - 1), 2f64.powi(m as i32)) };
            let h = (b - a) / ANNULUS_NODES as f64;
            let sum: f64 = (0..ANNULUS_NODES)
                .map(|i| {
                    let r = a + (i as f64 + 0.5) * h;
                    integrand(r) * r.powi(n as i32 - 1)
                })
                .sum();
            area * sum * h
        })
        .collect()
}

/// Geometric decay of the tail: each of the last five ratios below 0.9. A
/// zero term may follow anything; a nonzero term may not follow a zero.
pub fn decays_geometrically(sums: &[f64]) -> bool {
    if sums.len() < 6 {
        return false;
    }
    sums[sums.len() - 6..].windows(2).all(|w| match (w[0], w[1]) {
        (_, b) if b == 0.0 => true,
        (a, _) if a == 0.0 => false,
        (a, b) => b / a < 0.9,
    })
}

/// `c^{1/gap}` with the convention that the integrand vanishes off `E`.
pub fn n3_integrand(gap: f64, c: f64) -> f64 {
    if gap <= GAP_EPS {
        0.0
    } else {
        c.powf(1.0 / gap)
    }
}

/// (N3) for a radial gap model `γ(r) = |p - s|` on `|x| = r`.
pub fn n3_check_radial(gap: &dyn Fn(f64) -> f64, c: f64, n: usize, annuli: usize) -> Result<N3Report> {
    if !(c > 0.0 && c < 1.0) {
        return Err(VexError::BadConfig(format!("c must lie in (0,1), got {c}")));
    }
    let sums = annulus_integrals(&|r| n3_integrand(gap(r).abs(), c), n, annuli);
    Ok(N3Report { c, total: sums.iter().sum(), pass: decays_geometrically(&sums), annulus_sums: sums })
}

fn axis_directions(n: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * n);
    for k in 0..n {
        for sign in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[k] = sign;
            dirs.push(d);
        }
    }
    dirs
}

pub fn nekvinda_check(profile: &RadialProfile, p: &VariableExponent, cfg: &NekvindaConfig) -> Result<NekvindaReport> {
    if !(cfg.c > 0.0 && cfg.c < 1.0) {
        return Err(VexError::BadConfig(format!("c must lie in (0,1), got {}", cfg.c)));
    }
    if cfg.k < 1 {
        return Err(VexError::BadConfig("k must be at least 1".into()));
    }
    if !(cfg.alpha > 0.0) {
        return Err(VexError::BadConfig("α must be positive".into()));
    }
    if cfg.annuli < 6 {
        return Err(VexError::BadConfig("need at least 6 annuli to judge decay".into()));
    }
    let n1 = check_n1(profile);
    let n2 = check_n2(profile, cfg.k, cfg.alpha, cfg.n2_decades, cfg.n2_points_per_decade)?;

    let n = p.dimension();
    let dirs = axis_directions(n);
    let integrand = |r: f64| {
        let s = profile.value(r);
        let total: f64 = dirs
            .iter()
            .map(|d| {
                let x: Vec<f64> = d.iter().map(|c| c * r).collect();
                n3_integrand((p.eval(&x) - s).abs(), cfg.c)
            })
            .sum();
        total / dirs.len() as f64
    };
    let sums = annulus_integrals(&integrand, n, cfg.annuli);
    let n3 = N3Report { c: cfg.c, total: sums.iter().sum(), pass: decays_geometrically(&sums), annulus_sums: sums };

    let monotone = profile.monotonicity();
    let pass = n1.pass && n2.pass && n3.pass && monotone != Monotonicity::Unknown;
    Ok(NekvindaReport { monotone, n1, n2, n3, pass, config: cfg.clone() })
}

/// Radial gap models with a known (N3) verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GapModel {
    /// `γ(r) = 1/log r`: the integrand is `r^{log c}`.
    InverseLog,
    /// `E` contained in a ball of the given radius.
    Bounded { radius: f64 },
}

impl GapModel {
    pub fn gap(&self, r: f64) -> f64 {
        match *self {
            GapModel::InverseLog => 1.0 / r.ln(),
            GapModel::Bounded { radius } => {
                if r < radius {
                    0.5
                } else {
                    0.0
                }
            }
        }
    }
}

/// Analytic (N3) verdict: for `γ = 1/log r` the tail integrand is the power
/// `r^{log c}`, integrable at infinity in ℝⁿ iff `log c < -n`; a bounded `E`
/// always gives a finite integral for `c ∈ (0,1)`.
pub fn n3_oracle(model: GapModel, c: f64, n: usize) -> bool {
    match model {
        GapModel::InverseLog => c.ln() < -(n as f64),
        GapModel::Bounded { .. } => c > 0.0 && c < 1.0,
    }
}
