//! Global search for `sup_Q ℓ(Q) Ω(f, Q)`.
//!
//! Cube sides are stratified by whole decades `[10^d, 10^{d+1})`. Each stratum
//! draws its candidates from its own stream keyed by the absolute decade, so a
//! stratum's cubes do not depend on which other strata are present. Within a
//! stratum, every candidate that sets a new running maximum is the start of a
//! coordinate search in `(log side, center)` confined to that decade. The
//! trace lists the running sup after each decade in increasing order.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cube_weight, mean_oscillation_adaptive, Cube, DEFAULT_QUAD};
use crate::error::{Result, VexError};
use crate::field::ScalarField;
use crate::sampling::{stream, unit_direction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub side_min: f64,
    pub side_max: f64,
    pub center_radius: f64,
    /// Candidate draws per side decade.
    pub samples: usize,
    pub refinement_steps: usize,
    pub seed: u64,
    #[serde(default = "default_quad")]
    pub quad: usize,
}

fn default_quad() -> usize {
    DEFAULT_QUAD
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            side_min: 1e-6,
            side_max: 1e6,
            center_radius: 1e8,
            samples: 1000,
            refinement_steps: 24,
            seed: 0,
            quad: DEFAULT_QUAD,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.side_min > 0.0 && self.side_min < self.side_max && self.side_max.is_finite()) {
            return Err(VexError::BadConfig(format!(
                "scale range needs 0 < side_min < side_max, got [{}, {}]",
                self.side_min, self.side_max
            )));
        }
        if !(self.center_radius >= 0.0 && self.center_radius.is_finite()) {
            return Err(VexError::BadConfig("center radius must be finite and nonnegative".into()));
        }
        if self.samples == 0 {
            return Err(VexError::BadConfig("samples must be at least 1".into()));
        }
        if self.quad < 2 {
            return Err(VexError::BadConfig("quad must be at least 2".into()));
        }
        Ok(())
    }

    fn decades(&self) -> std::ops::Range<i32> {
        let lo = self.side_min.log10().floor() as i32;
        let mut hi = self.side_max.log10().ceil() as i32;
        if 10f64.powi(hi - 1) >= self.side_max {
            hi -= 1;
        }
        lo..hi.max(lo + 1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupSearchResult {
    pub sup: f64,
    pub witness: Cube,
    /// `(decade d, running sup over all strata up to and including d)`.
    pub trace: Vec<(i32, f64)>,
    pub seed: u64,
    pub config: SearchConfig,
}

impl SupSearchResult {
    /// Relative growth of the running sup over the last two decades of the
    /// trace (or over the whole trace when it is shorter).
    pub fn tail_change(&self) -> f64 {
        let t = &self.trace;
        let last = t.last().map(|e| e.1).unwrap_or(0.0);
        let back = if t.len() >= 3 { t[t.len() - 3].1 } else { t.first().map(|e| e.1).unwrap_or(0.0) };
        if last == back {
            0.0
        } else if back <= 0.0 {
            f64::INFINITY
        } else {
            (last - back) / back
        }
    }

    /// Operational "finite sup": the running sup changed by less than
    /// `threshold` (relative) across the last two decades.
    pub fn stabilized(&self, threshold: f64) -> bool {
        self.tail_change() < threshold
    }

    /// `ℓ(Q) Ω(f, Q)` recomputed at the witness with the same quadrature rule.
    pub fn recompute(&self, f: &dyn ScalarField) -> Result<f64> {
        objective(f, &self.witness, self.config.quad)
    }
}

fn objective(f: &dyn ScalarField, q: &Cube, quad: usize) -> Result<f64> {
    let (osc, _) = mean_oscillation_adaptive(f, q, quad)?;
    Ok(cube_weight(q) * osc)
}

struct Stratum {
    decade: i32,
    best: f64,
    witness: Option<Cube>,
}

fn stratum_search(f: &dyn ScalarField, cfg: &SearchConfig, decade: i32) -> Result<Stratum> {
    let n = f.dimension();
    let side_lo = 10f64.powi(decade).max(cfg.side_min);
    let side_hi = 10f64.powi(decade + 1).min(cfg.side_max);
    let (ln_lo, ln_hi) = (side_lo.ln(), side_hi.ln());
    let ln_radius = cfg.center_radius.ln_1p();
    let mut rng = stream(cfg.seed, (decade as i64 + (1 << 20)) as u64);

    let mut best = f64::NEG_INFINITY;
    let mut witness = None;
    let mut records = Vec::new();
    for _ in 0..cfg.samples {
        let side = (ln_lo + (ln_hi - ln_lo) * rng.gen::<f64>()).exp();
        let radius = (ln_radius * rng.gen::<f64>()).exp_m1();
        let dir = unit_direction(&mut rng, n);
        let q = Cube { center: dir.iter().map(|d| d * radius).collect(), side };
        let v = objective(f, &q, cfg.quad)?;
        if v > best {
            best = v;
            witness = Some(q.clone());
            records.push(q);
        }
    }

    for start in records {
        let (v, q) = refine(f, cfg, start, (ln_lo, ln_hi))?;
        if v > best {
            best = v;
            witness = Some(q);
        }
    }
    Ok(Stratum { decade, best, witness })
}

/// Coordinate search over `(ln side, center_1, …, center_n)`; a step is halved
/// whenever no move improves the objective.
fn refine(f: &dyn ScalarField, cfg: &SearchConfig, start: Cube, ln_range: (f64, f64)) -> Result<(f64, Cube)> {
    let n = start.dimension();
    let mut cur = start;
    let mut val = objective(f, &cur, cfg.quad)?;
    let mut ln_step = 0.5 * (ln_range.1 - ln_range.0).max(1e-12);
    let mut c_step = 0.5 * cur.side;
    for _ in 0..cfg.refinement_steps {
        let mut best_move: Option<(f64, Cube)> = None;
        let ln_side = cur.side.ln();
        let mut candidates = Vec::with_capacity(2 * (n + 1));
        for sign in [-1.0, 1.0] {
            let s = (ln_side + sign * ln_step).clamp(ln_range.0, ln_range.1).exp();
            candidates.push(Cube { center: cur.center.clone(), side: s });
        }
        for k in 0..n {
            for sign in [-1.0, 1.0] {
                let mut c = cur.center.clone();
                c[k] += sign * c_step;
                let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > cfg.center_radius {
                    let scale = cfg.center_radius / norm;
                    c.iter_mut().for_each(|v| *v *= scale);
                }
                candidates.push(Cube { center: c, side: cur.side });
            }
        }
        for q in candidates {
            let v = objective(f, &q, cfg.quad)?;
            if v > best_move.as_ref().map_or(val, |b| b.0) {
                best_move = Some((v, q));
            }
        }
        match best_move {
            Some((v, q)) => {
                val = v;
                cur = q;
            }
            None => {
                ln_step *= 0.5;
                c_step *= 0.5;
            }
        }
    }
    Ok((val, cur))
}

/// Estimates `sup ℓ(Q) Ω(f, Q)` over cubes with side in the configured range
/// and center within the configured radius. Divergence is not an error: it
/// shows up as a trace that keeps growing.
pub fn oscillation_sup(f: &dyn ScalarField, cfg: &SearchConfig) -> Result<SupSearchResult> {
    cfg.validate()?;
    let strata = cfg
        .decades()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|d| stratum_search(f, cfg, d))
        .collect::<Result<Vec<_>>>()?;

    let mut sup = f64::NEG_INFINITY;
    let mut witness = None;
    let mut trace = Vec::with_capacity(strata.len());
    for s in strata {
        if s.best > sup {
            sup = s.best;
            witness = s.witness;
        }
        trace.push((s.decade, sup));
    }
    let witness = witness.expect("at least one candidate per stratum");
    Ok(SupSearchResult { sup, witness, trace, seed: cfg.seed, config: cfg.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{DoubleLog, FnField};

    fn small(seed: u64) -> SearchConfig {
        SearchConfig {
            side_min: 1e-2,
            side_max: 1e2,
            center_radius: 1e3,
            samples: 64,
            refinement_steps: 8,
            seed,
            quad: 16,
        }
    }

    #[test]
    fn constant_gives_zero() {
        let c = FnField::new(1, |_: &[f64]| 3.0);
        let r = oscillation_sup(&c, &small(1)).unwrap();
        assert_eq!(r.sup, 0.0);
        assert!(r.stabilized(0.05));
    }

    #[test]
    fn decades_cover_range() {
        let cfg = SearchConfig { side_min: 1e-6, side_max: 1e6, ..SearchConfig::default() };
        assert_eq!(cfg.decades(), -6..6);
        let cfg = SearchConfig { side_min: 0.5, side_max: 20.0, ..SearchConfig::default() };
        assert_eq!(cfg.decades(), -1..2);
    }

    #[test]
    fn linear_function_diverges() {
        let f = FnField::new(1, |x: &[f64]| x[0]);
        let r = oscillation_sup(&f, &small(2)).unwrap();
        assert!(!r.stabilized(0.05));
        // ℓΩ = (h/4) log(e + max(h, 1/h, |c|)) grows roughly tenfold per decade
        let t = &r.trace;
        for w in t.windows(2) {
            assert!(w[1].1 > 5.0 * w[0].1);
        }
    }

    #[test]
    fn witness_reproduces_sup() {
        let f = DoubleLog { dimension: 1 };
        let r = oscillation_sup(&f, &small(3)).unwrap();
        let again = r.recompute(&f).unwrap();
        assert!((again - r.sup).abs() <= 1e-10 * r.sup.max(1.0));
    }

    #[test]
    fn deterministic() {
        let f = DoubleLog { dimension: 2 };
        let cfg = SearchConfig { samples: 16, ..small(9) };
        let a = oscillation_sup(&f, &cfg).unwrap();
        let b = oscillation_sup(&f, &cfg).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn monotone_in_samples_and_range() {
        let f = DoubleLog { dimension: 1 };
        let base = oscillation_sup(&f, &small(4)).unwrap();
        let more = oscillation_sup(&f, &SearchConfig { samples: 128, ..small(4) }).unwrap();
        assert!(more.sup >= base.sup);
        let wider = oscillation_sup(&f, &SearchConfig { side_min: 1e-3, side_max: 1e3, ..small(4) }).unwrap();
        assert!(wider.sup >= base.sup);
    }

    #[test]
    fn json_shape() {
        let f = FnField::new(1, |x: &[f64]| x[0]);
        let r = oscillation_sup(&f, &SearchConfig { samples: 2, refinement_steps: 0, ..small(5) }).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert!(v["sup"].is_number());
        assert!(v["witness"]["center"].is_array());
        assert!(v["witness"]["side"].is_number());
        assert_eq!(v["trace"][0][0], -2);
        assert_eq!(v["seed"], 5);
        assert!(v["config"].is_object());
    }

    #[test]
    fn bad_config() {
        let f = FnField::new(1, |x: &[f64]| x[0]);
        let cfg = SearchConfig { side_min: 2.0, side_max: 1.0, ..small(0) };
        assert!(oscillation_sup(&f, &cfg).is_err());
        let cfg = SearchConfig { samples: 0, ..small(0) };
        assert!(oscillation_sup(&f, &cfg).is_err());
    }
}
