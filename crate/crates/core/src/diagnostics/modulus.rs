//! Sampled estimates of the local log-Hölder constant and of the decay
//! constant at infinity.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VexError};
use crate::exponent::VariableExponent;
use crate::sampling::{log_e_plus_exp, log_uniform, stream, unit_direction, RadiusSchedule, SamplePoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModulusWitness {
    Pair { x: Vec<f64>, y: Vec<f64> },
    Point { point: SamplePoint },
}

/// Per-scale maximum of the sampled functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMax {
    /// Scale label: `-log10 δ` for pair scales, `log10 |x|` shell start for
    /// radial shells.
    pub scale: f64,
    pub max: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusEstimate {
    pub c_est: f64,
    pub witness: ModulusWitness,
    pub samples: usize,
    pub divergent: bool,
    pub per_scale: Vec<ScaleMax>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_inf: Option<f64>,
}

/// True when the per-scale maxima increase at every step and grow by at
/// least half overall.
pub fn grows_monotonically(maxima: &[f64]) -> bool {
    if maxima.len() < 3 || !(maxima[0] > 0.0) {
        return false;
    }
    maxima.windows(2).all(|w| w[1] > w[0] * (1.0 + 1e-9)) && *maxima.last().unwrap() >= 1.5 * maxima[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderSampler {
    pub pairs_per_scale: usize,
    /// Pair distances are drawn per decade `[10^{-j-1}, 10^{-j}]` for
    /// `j = 0 .. decades`.
    pub decades: u32,
    /// Law of the base point `x`.
    pub schedule: RadiusSchedule,
    pub seed: u64,
}

impl Default for HolderSampler {
    fn default() -> Self {
        Self {
            pairs_per_scale: 2000,
            decades: 12,
            schedule: RadiusSchedule::LogUniform { min: 1e-13, max: 1e3 },
            seed: 0,
        }
    }
}

fn holder_functional(p: &VariableExponent, x: &[f64], y: &[f64]) -> Option<f64> {
    let dist = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    if dist == 0.0 {
        return None;
    }
    Some((p.eval(x) - p.eval(y)).abs() * (std::f64::consts::E + 1.0 / dist).ln())
}

/// `max |p(x) - p(y)| log(e + 1/|x - y|)` over sampled pairs.
pub fn log_holder_modulus(p: &VariableExponent, cfg: &HolderSampler) -> Result<ModulusEstimate> {
    if cfg.pairs_per_scale == 0 || cfg.decades == 0 {
        return Err(VexError::BadConfig("need at least one pair and one scale".into()));
    }
    cfg.schedule.validate()?;
    let n = p.dimension();
    let scales: Vec<(ScaleMax, Option<(f64, Vec<f64>, Vec<f64>)>)> = (0..cfg.decades)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(cfg.seed, j as u64);
            let (d_lo, d_hi) = (10f64.powi(-(j as i32) - 1), 10f64.powi(-(j as i32)));
            let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
            let mut used = 0;
            for i in 0..cfg.pairs_per_scale {
                let t = cfg.schedule.draw_log_radius(&mut rng, i);
                let dir = unit_direction(&mut rng, n);
                let delta = log_uniform(&mut rng, d_lo, d_hi);
                let step = unit_direction(&mut rng, n);
                let Some(x) = (SamplePoint { direction: dir, log_radius: t }).point() else {
                    continue;
                };
                let y: Vec<f64> = x.iter().zip(&step).map(|(a, s)| a + delta * s).collect();
                let Some(v) = holder_functional(p, &x, &y) else {
                    continue;
                };
                used += 1;
                if best.as_ref().is_none_or(|b| v > b.0) {
                    best = Some((v, x, y));
                }
            }
            let max = best.as_ref().map_or(0.0, |b| b.0);
            (ScaleMax { scale: j as f64, max, samples: used }, best)
        })
        .collect();

    let per_scale: Vec<ScaleMax> = scales.iter().map(|s| s.0.clone()).collect();
    let samples = per_scale.iter().map(|s| s.samples).sum();
    let (c_est, x, y) = scales
        .into_iter()
        .filter_map(|s| s.1)
        .fold(None, |acc: Option<(f64, Vec<f64>, Vec<f64>)>, b| match acc {
            Some(a) if a.0 >= b.0 => Some(a),
            _ => Some(b),
        })
        .ok_or_else(|| VexError::BadConfig("no pair could be evaluated".into()))?;
    let maxima: Vec<f64> = per_scale.iter().map(|s| s.max).collect();
    Ok(ModulusEstimate {
        c_est,
        witness: ModulusWitness::Pair { x, y },
        samples,
        divergent: grows_monotonically(&maxima),
        per_scale,
        p_inf: None,
    })
}

/// Recomputes the log-Hölder functional at a pair witness.
pub fn holder_at(p: &VariableExponent, x: &[f64], y: &[f64]) -> f64 {
    holder_functional(p, x, y).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PInf {
    Auto,
    #[serde(untagged)]
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinitySampler {
    /// Shells `[t_lo, t_hi]` in `t = log |x|`, in increasing order. A shell
    /// with `t_lo == t_hi` is a single sphere.
    pub shells: Vec<(f64, f64)>,
    pub samples_per_shell: usize,
    pub seed: u64,
}

impl InfinitySampler {
    /// Decade shells `|x| ∈ [10^j, 10^{j+1}]`, `j = 0 .. decades`.
    pub fn decades(decades: u32, samples_per_shell: usize, seed: u64) -> Self {
        let ln10 = std::f64::consts::LN_10;
        let shells = (0..decades).map(|j| (j as f64 * ln10, (j + 1) as f64 * ln10)).collect();
        Self { shells, samples_per_shell, seed }
    }

    /// One sphere per entry of `log_radii`.
    pub fn spheres(log_radii: &[f64], samples_per_shell: usize, seed: u64) -> Self {
        Self { shells: log_radii.iter().map(|&t| (t, t)).collect(), samples_per_shell, seed }
    }
}

impl Default for InfinitySampler {
    fn default() -> Self {
        Self::decades(12, 500, 0)
    }
}

fn shell_points(p: &VariableExponent, cfg: &InfinitySampler, idx: usize) -> Vec<(SamplePoint, f64)> {
    let (t_lo, t_hi) = cfg.shells[idx];
    let mut rng = stream(cfg.seed, idx as u64);
    (0..cfg.samples_per_shell)
        .filter_map(|_| {
            let t = t_lo + (t_hi - t_lo) * rng.gen::<f64>();
            let sp = SamplePoint { direction: unit_direction(&mut rng, p.dimension()), log_radius: t };
            p.eval_sample(&sp).map(|v| (sp, v))
        })
        .collect()
}

/// `max |p(x) - p_∞| log(e + |x|)` over radial shells. With `PInf::Auto`,
/// `p_∞` is the mean of `p` over the outermost shell.
pub fn infinity_modulus(p: &VariableExponent, p_inf: PInf, cfg: &InfinitySampler) -> Result<ModulusEstimate> {
    if cfg.shells.is_empty() || cfg.samples_per_shell == 0 {
        return Err(VexError::BadConfig("need at least one shell and one sample".into()));
    }
    if cfg.shells.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
        return Err(VexError::BadConfig("shells must be finite, ordered intervals of log |x|".into()));
    }
    let shells: Vec<Vec<(SamplePoint, f64)>> =
        (0..cfg.shells.len()).into_par_iter().map(|i| shell_points(p, cfg, i)).collect();
    let p_inf = match p_inf {
        PInf::Value(v) => v,
        PInf::Auto => {
            let outer = shells.last().unwrap();
            if outer.is_empty() {
                return Err(VexError::BadConfig("outermost shell could not be evaluated".into()));
            }
            outer.iter().map(|(_, v)| v).sum::<f64>() / outer.len() as f64
        }
    };
    let mut per_scale = Vec::with_capacity(shells.len());
    let mut best: Option<(f64, SamplePoint)> = None;
    for (i, shell) in shells.iter().enumerate() {
        let mut max = 0.0f64;
        for (sp, v) in shell {
            let w = (v - p_inf).abs() * log_e_plus_exp(sp.log_radius);
            max = max.max(w);
            if best.as_ref().is_none_or(|b| w > b.0) {
                best = Some((w, sp.clone()));
            }
        }
        per_scale.push(ScaleMax { scale: cfg.shells[i].0 / std::f64::consts::LN_10, max, samples: shell.len() });
    }
    let (c_est, point) = best.ok_or_else(|| VexError::BadConfig("no sample could be evaluated".into()))?;
    let maxima: Vec<f64> = per_scale.iter().map(|s| s.max).collect();
    Ok(ModulusEstimate {
        c_est,
        witness: ModulusWitness::Point { point },
        samples: per_scale.iter().map(|s| s.samples).sum(),
        divergent: grows_monotonically(&maxima),
        per_scale,
        p_inf: Some(p_inf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{build_exponent, ExponentSpec};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn small_holder(seed: u64) -> HolderSampler {
        HolderSampler { pairs_per_scale: 400, ..HolderSampler { seed, ..HolderSampler::default() } }
    }

    #[test]
    fn constant_exponent_has_zero_moduli() {
        let p = build_exponent(&ExponentSpec::constant(2.5, 2)).unwrap();
        let m = log_holder_modulus(&p, &small_holder(1)).unwrap();
        assert_eq!(m.c_est, 0.0);
        assert!(!m.divergent);
        let m = infinity_modulus(&p, PInf::Value(2.5), &InfinitySampler::decades(8, 50, 1)).unwrap();
        assert_eq!(m.c_est, 0.0);
        assert!(!m.divergent);
    }

    #[test]
    fn jump_diverges() {
        let spec = ExponentSpec {
            family: "piecewise-constant".into(),
            params: serde_json::json!({ "breaks": [0.0], "values": [2.0, 3.0], "coordinate": "x1" }),
            dimension: 1,
            bounds: None,
        };
        let p = build_exponent(&spec).unwrap();
        let m = log_holder_modulus(&p, &HolderSampler { seed: 3, ..HolderSampler::default() }).unwrap();
        assert!(m.divergent, "{:?}", m.per_scale);
        // top scale: pairs straddle 0 at distance ≤ 1e-11
        let last = m.per_scale.last().unwrap().max;
        assert!(last >= (1e11f64).ln() && last <= (std::f64::consts::E + 1e13).ln());
        if let ModulusWitness::Pair { x, y } = &m.witness {
            assert!((holder_at(&p, x, y) - m.c_est).abs() <= 1e-10 * m.c_est);
        } else {
            panic!("pair witness expected");
        }
    }

    #[test]
    fn lerner_is_locally_log_holder() {
        let p = build_exponent(&ExponentSpec::lerner(0.1, 0.05, 1)).unwrap();
        let m = log_holder_modulus(&p, &HolderSampler { seed: 4, ..HolderSampler::default() }).unwrap();
        assert!(!m.divergent);
        assert!(m.c_est.is_finite() && m.c_est < 1.0, "{}", m.c_est);
    }

    #[test]
    fn decaying_exponent_product_is_one() {
        let p = build_exponent(&ExponentSpec::expression("2 + 1/log(e + r)", (2.0, 3.0), 1)).unwrap();
        let m = infinity_modulus(&p, PInf::Value(2.0), &InfinitySampler::decades(12, 100, 2)).unwrap();
        assert!((m.c_est - 1.0).abs() < 1e-13, "{}", m.c_est);
        for s in &m.per_scale {
            assert!((s.max - 1.0).abs() < 1e-13);
        }
        assert!(!m.divergent);
    }

    #[test]
    fn lerner_violates_decay_at_infinity() {
        let p = build_exponent(&ExponentSpec::lerner(0.1, 0.05, 1)).unwrap();
        let radii: Vec<f64> = (1..=6).map(|m| (FRAC_PI_2 + 2.0 * PI * m as f64).exp()).collect();
        let m = infinity_modulus(&p, PInf::Value(2.1), &InfinitySampler::spheres(&radii, 1, 0)).unwrap();
        assert!(m.divergent);
        assert!((m.per_scale[0].max - 0.05 * radii[0]).abs() < 1e-6 * radii[0]);
    }

    #[test]
    fn auto_p_inf_uses_outer_shell() {
        let p = build_exponent(&ExponentSpec::piecewise_radial(&[10.0], &[2.0, 3.0], 1)).unwrap();
        let m = infinity_modulus(&p, PInf::Auto, &InfinitySampler::decades(6, 20, 0)).unwrap();
        assert_eq!(m.p_inf, Some(3.0));
        let e = std::f64::consts::E;
        assert!(m.c_est <= (e + 10.0).ln() && m.c_est > (e + 5.0).ln());
    }

    #[test]
    fn p_inf_serde() {
        assert_eq!(serde_json::to_string(&PInf::Auto).unwrap(), "\"auto\"");
        assert_eq!(serde_json::from_str::<PInf>("2.5").unwrap(), PInf::Value(2.5));
    }
}
