//! Empirical ratios `‖Mf‖ / ‖f‖` over families of compactly supported test
//! functions. These are lower estimates of an operator norm, never the norm.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vexlab_core::exponent::VariableExponent;
use vexlab_core::grid::{dyadic_scales, maximal_function, sample_function, ExponentGrid, ScaleSet};
use vexlab_core::sampling::{log_uniform, stream};
use vexlab_core::{GridFunction, GridSpec, Result, VexError};

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A test function defined pointwise, so it can be sampled at any resolution.
#[derive(Clone)]
pub struct TestFunction {
    pub id: String,
    pub kind: &'static str,
    f: PointFn,
}

impl TestFunction {
    pub fn new(id: String, kind: &'static str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { id, kind, f: Arc::new(f) }
    }

    pub fn sample(&self, grid: &GridSpec) -> Result<GridFunction> {
        sample_function(|x| (self.f)(x), grid)
    }
}

/// Generator of seeded test functions supported inside a grid box.
pub trait TestFamily: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, grid: &GridSpec, index: usize, rng: &mut ChaCha8Rng) -> TestFunction;
}

fn inside(x: &[f64], lo: &[f64], hi: &[f64]) -> bool {
    x.iter().zip(lo).zip(hi).all(|((c, a), b)| c >= a && c < b)
}

/// Indicator of a random cube with side between four cells and half the box.
pub struct Indicators;

impl TestFamily for Indicators {
    fn name(&self) -> &'static str {
        "indicators"
    }

    fn generate(&self, grid: &GridSpec, index: usize, rng: &mut ChaCha8Rng) -> TestFunction {
        let axes = grid.axes();
        let min_len = axes.iter().map(|a| a.hi - a.lo).fold(f64::INFINITY, f64::min);
        let h = axes.iter().map(|a| a.spacing()).fold(0.0, f64::max);
        let side = log_uniform(rng, (4.0 * h).min(0.5 * min_len), 0.5 * min_len);
        let lo: Vec<f64> = axes.iter().map(|a| a.lo + (a.hi - a.lo - side) * rng.gen::<f64>()).collect();
        let hi: Vec<f64> = lo.iter().map(|l| l + side).collect();
        TestFunction::new(format!("indicator-{index}"), self.name(), move |x| {
            if inside(x, &lo, &hi) {
                1.0
            } else {
                0.0
            }
        })
    }
}

/// Gaussian bump cut off at four standard deviations, with the cut-off ball
/// inside the box.
pub struct Gaussians;

impl TestFamily for Gaussians {
    fn name(&self) -> &'static str {
        "gaussians"
    }

    fn generate(&self, grid: &GridSpec, index: usize, rng: &mut ChaCha8Rng) -> TestFunction {
        let axes = grid.axes();
        let min_len = axes.iter().map(|a| a.hi - a.lo).fold(f64::INFINITY, f64::min);
        let h = axes.iter().map(|a| a.spacing()).fold(0.0, f64::max);
        let sigma = log_uniform(rng, (2.0 * h).min(min_len / 16.0), min_len / 16.0);
        let center: Vec<f64> = axes
            .iter()
            .map(|a| a.lo + 4.0 * sigma + (a.hi - a.lo - 8.0 * sigma) * rng.gen::<f64>())
            .collect();
        TestFunction::new(format!("gaussian-{index}"), self.name(), move |x| {
            let r2: f64 = x.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
            if r2 > 16.0 * sigma * sigma {
                0.0
            } else {
                (-0.5 * r2 / (sigma * sigma)).exp()
            }
        })
    }
}

/// Sums of at most eight dyadic sub-boxes with amplitudes log-uniform in
/// `[1e-3, 1e3]`.
pub struct RandomSteps;

impl TestFamily for RandomSteps {
    fn name(&self) -> &'static str {
        "random-steps"
    }

    fn generate(&self, grid: &GridSpec, index: usize, rng: &mut ChaCha8Rng) -> TestFunction {
        let axes: Vec<_> = grid.axes().to_vec();
        let min_count = axes.iter().map(|a| a.count).min().unwrap_or(2);
        // dyadic boxes keep at least two cells per axis at half resolution
        let max_level = ((min_count as f64).log2().floor() as u32).saturating_sub(2).clamp(1, 8);
        let pieces = rng.gen_range(1..=8usize);
        let boxes: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..pieces)
            .map(|_| {
                let level = rng.gen_range(1..=max_level);
                let parts = (1u64 << level) as f64;
                let (mut lo, mut hi) = (Vec::new(), Vec::new());
                for a in &axes {
                    let k = rng.gen_range(0..(1u64 << level)) as f64;
                    let w = (a.hi - a.lo) / parts;
                    lo.push(a.lo + k * w);
                    hi.push(a.lo + (k + 1.0) * w);
                }
                (lo, hi, log_uniform(rng, 1e-3, 1e3))
            })
            .collect();
        TestFunction::new(format!("steps-{index}"), self.name(), move |x| {
            boxes.iter().filter(|(lo, hi, _)| inside(x, lo, hi)).map(|b| b.2).sum()
        })
    }
}

pub struct TestFamilyRegistry {
    families: BTreeMap<&'static str, Box<dyn TestFamily>>,
}

impl TestFamilyRegistry {
    pub fn with_builtins() -> Self {
        let mut r = Self { families: BTreeMap::new() };
        r.register(Box::new(Indicators));
        r.register(Box::new(Gaussians));
        r.register(Box::new(RandomSteps));
        r
    }

    pub fn global() -> &'static TestFamilyRegistry {
        static REGISTRY: OnceLock<TestFamilyRegistry> = OnceLock::new();
        REGISTRY.get_or_init(TestFamilyRegistry::with_builtins)
    }

    pub fn register(&mut self, family: Box<dyn TestFamily>) {
        self.families.insert(family.name(), family);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.families.keys().copied().collect()
    }

    pub fn get(&self, name: &str) -> Result<&dyn TestFamily> {
        self.families
            .get(name)
            .map(|f| f.as_ref())
            .ok_or_else(|| VexError::Spec(format!("unknown test family {name:?}; known: {:?}", self.names())))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub count: usize,
    pub kinds: Vec<String>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub id: String,
    pub kind: String,
    pub ratio: f64,
    /// Same test function on the grid with half as many cells per axis.
    pub ratio_half: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeTable {
    pub rows: Vec<ProbeRow>,
    pub max_ratio: f64,
    pub witness: String,
    pub max_ratio_half: Option<f64>,
    /// `|max_ratio - max_ratio_half| / max_ratio`.
    pub refinement_change: Option<f64>,
    pub skipped: Vec<String>,
}

/// `‖Mf‖ / ‖f‖` on a fixed exponent grid; `None` for `f ≡ 0`.
pub fn probe_ratio(p: &ExponentGrid, f: &GridFunction, scales: &ScaleSet, tol: f64) -> Result<Option<f64>> {
    if f.is_zero() {
        return Ok(None);
    }
    let mf = maximal_function(f, scales)?;
    Ok(Some(p.luxemburg(&mf, tol)? / p.luxemburg(f, tol)?))
}

fn scales_for(grid: &GridSpec, requested: &Option<Vec<f64>>) -> Result<ScaleSet> {
    match requested {
        None => dyadic_scales(grid),
        Some(sides) => {
            // keep sides that are whole multiples of every cell side
            let kept: Vec<f64> = sides
                .iter()
                .copied()
                .filter(|&s| {
                    grid.axes().iter().all(|a| {
                        let m = s / a.spacing();
                        m >= 1.0 - 1e-9 && (m - m.round()).abs() <= 1e-9 * m.max(1.0)
                    })
                })
                .collect();
            if kept.is_empty() {
                return Err(VexError::BadScale("no requested cube side fits this grid".into()));
            }
            Ok(ScaleSet { sides: kept })
        }
    }
}

pub fn test_functions(grid: &GridSpec, cfg: &ProbeConfig) -> Result<Vec<TestFunction>> {
    if cfg.kinds.is_empty() {
        return Err(VexError::BadConfig("probe needs at least one test-function kind".into()));
    }
    let registry = TestFamilyRegistry::global();
    let families = cfg.kinds.iter().map(|k| registry.get(k)).collect::<Result<Vec<_>>>()?;
    Ok((0..cfg.count)
        .map(|i| {
            let mut rng = stream(cfg.seed, i as u64);
            families[i % families.len()].generate(grid, i, &mut rng)
        })
        .collect())
}

fn ratios(p: &VariableExponent, grid: &GridSpec, fns: &[TestFunction], cfg: &ProbeConfig) -> Result<Vec<Option<f64>>> {
    let pg = ExponentGrid::new(p, grid)?;
    let scales = scales_for(grid, &cfg.scales)?;
    fns.par_iter()
        .map(|t| probe_ratio(&pg, &t.sample(grid)?, &scales, cfg.tol))
        .collect()
}

/// Ratio table on `grid`, plus the same test functions on the half-resolution
/// grid when every axis count is even.
pub fn boundedness_probe(p: &VariableExponent, cfg: &ProbeConfig, grid: &GridSpec) -> Result<ProbeTable> {
    if cfg.count == 0 {
        return Err(VexError::BadConfig("probe count must be positive".into()));
    }
    let fns = test_functions(grid, cfg)?;
    let full = ratios(p, grid, &fns, cfg)?;
    let mut skipped = Vec::new();
    let half = if grid.axes().iter().all(|a| a.count % 2 == 0 && a.count >= 4) {
        let coarse = grid.coarsened(2)?;
        Some(ratios(p, &coarse, &fns, cfg)?)
    } else {
        skipped.push("half resolution: some axis count is odd or below 4".into());
        None
    };

    let mut rows = Vec::new();
    let (mut max_ratio, mut witness) = (0.0f64, String::new());
    let mut max_half: Option<f64> = None;
    for (i, t) in fns.iter().enumerate() {
        let Some(r) = full[i] else {
            skipped.push(format!("{}: identically zero on the grid", t.id));
            continue;
        };
        let rh = half.as_ref().and_then(|h| h[i]);
        if r > max_ratio {
            max_ratio = r;
            witness = t.id.clone();
        }
        if let Some(v) = rh {
            max_half = Some(max_half.map_or(v, |m: f64| m.max(v)));
        }
        rows.push(ProbeRow { id: t.id.clone(), kind: t.kind.to_string(), ratio: r, ratio_half: rh });
    }
    if rows.is_empty() {
        return Err(VexError::BadConfig("every test function vanished on the grid".into()));
    }
    let refinement_change = max_half.map(|h| (max_ratio - h).abs() / max_ratio);
    Ok(ProbeTable { rows, max_ratio, witness, max_ratio_half: max_half, refinement_change, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vexlab_core::exponent::{build_exponent, ExponentSpec};

    fn cfg(kinds: &[&str], count: usize) -> ProbeConfig {
        ProbeConfig { count, kinds: kinds.iter().map(|s| s.to_string()).collect(), seed: 11, scales: None, tol: 1e-8 }
    }

    #[test]
    fn constant_on_box_has_ratio_one() {
        let g: GridSpec = "-4:4:64".parse().unwrap();
        let p = build_exponent(&ExponentSpec::lerner(0.1, 0.05, 1)).unwrap();
        let pg = ExponentGrid::new(&p, &g).unwrap();
        let f = sample_function(|_| 3.0, &g).unwrap();
        let r = probe_ratio(&pg, &f, &dyadic_scales(&g).unwrap(), 1e-10).unwrap().unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn families_stay_inside_and_are_deterministic() {
        let g: GridSpec = "-16:16:256".parse().unwrap();
        let c = cfg(&["indicators", "gaussians", "random-steps"], 12);
        let a = test_functions(&g, &c).unwrap();
        let b = test_functions(&g, &c).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let (fx, fy) = (x.sample(&g).unwrap(), y.sample(&g).unwrap());
            assert_eq!(fx.values(), fy.values());
            assert!(!fx.is_zero(), "{}", x.id);
            // support inside the open box: outside points evaluate to zero
            assert_eq!((x.f)(&[16.5]), 0.0);
            assert_eq!((x.f)(&[-16.5]), 0.0);
        }
    }

    #[test]
    fn ratios_at_least_one() {
        let g: GridSpec = "-8:8:128".parse().unwrap();
        let p = build_exponent(&ExponentSpec::constant(2.0, 1)).unwrap();
        let t = boundedness_probe(&p, &cfg(&["indicators", "gaussians"], 6), &g).unwrap();
        assert_eq!(t.rows.len(), 6);
        for r in &t.rows {
            assert!(r.ratio >= 1.0 - 1e-7, "{r:?}");
            assert!(r.ratio_half.is_some());
        }
        assert!(t.max_ratio <= 1.0 + std::f64::consts::SQRT_2 + 1e-6);
    }

    #[test]
    fn more_scales_never_lower_ratios() {
        let g: GridSpec = "0:32:64".parse().unwrap();
        let p = build_exponent(&ExponentSpec::lerner(0.3, 0.2, 1)).unwrap();
        let few = ProbeConfig { scales: Some(vec![0.5, 4.0]), ..cfg(&["random-steps"], 8) };
        let all = cfg(&["random-steps"], 8);
        let (a, b) = (boundedness_probe(&p, &few, &g).unwrap(), boundedness_probe(&p, &all, &g).unwrap());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert!(y.ratio >= x.ratio * (1.0 - 1e-7), "{x:?} {y:?}");
        }
    }

    #[test]
    fn unknown_family() {
        let g: GridSpec = "0:1:16".parse().unwrap();
        let p = build_exponent(&ExponentSpec::constant(2.0, 1)).unwrap();
        assert!(boundedness_probe(&p, &cfg(&["sawtooth"], 2), &g).is_err());
    }
}
