//! Uniform grids over truncated boxes and functions sampled at cell centers.
//!
//! Integrals over ℝⁿ are replaced by midpoint sums over the box, so test
//! functions must be compactly supported inside it or decay fast enough that
//! the tail is negligible.

mod maximal;
mod modular;

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use maximal::{dyadic_scales, maximal_function, ScaleSet};
pub use modular::{luxemburg_norm, modular_value, ExponentGrid};

use crate::error::{Result, VexError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.count as f64
    }

    pub fn center(&self, i: usize) -> f64 {
        self.lo + (i as f64 + 0.5) * self.spacing()
    }
}

/// Axis-aligned box in ℝⁿ (`n ≤ 3`) cut into uniform cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(VexError::BadGrid(format!("dimension must be 1..=3, got {}", axes.len())));
        }
        for (k, a) in axes.iter().enumerate() {
            if !(a.lo.is_finite() && a.hi.is_finite() && a.lo < a.hi) {
                return Err(VexError::BadGrid(format!("axis {k}: need finite lo < hi")));
            }
            if a.count < 2 {
                return Err(VexError::BadGrid(format!("axis {k}: need at least 2 cells")));
            }
        }
        Ok(Self { axes })
    }

    pub fn uniform_1d(lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(vec![Axis { lo, hi, count }])
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Same box with every axis count divided by `factor` (at least 2 cells).
    pub fn coarsened(&self, factor: usize) -> Result<Self> {
        let axes = self
            .axes
            .iter()
            .map(|a| Axis { count: a.count / factor, ..*a })
            .collect();
        Self::new(axes)
    }

    /// Multi-index of a flat index; the last axis varies fastest.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for k in (0..self.axes.len()).rev() {
            idx[k] = flat % self.axes[k].count;
            flat /= self.axes[k].count;
        }
        idx
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.center(i))
            .collect()
    }

    /// Flat index of the cell whose closed extent contains `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        let mut flat = 0;
        for (a, &c) in self.axes.iter().zip(x) {
            if c < a.lo || c > a.hi {
                return None;
            }
            let i = (((c - a.lo) / a.spacing()) as usize).min(a.count - 1);
            flat = flat * a.count + i;
        }
        Some(flat)
    }
}

impl FromStr for GridSpec {
    type Err = VexError;

    /// `lo:hi:count` per axis, axes separated by commas.
    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .split(',')
            .map(|part| {
                let fields: Vec<&str> = part.trim().split(':').collect();
                if fields.len() != 3 {
                    return Err(VexError::BadGrid(format!("expected lo:hi:count, got {part:?}")));
                }
                let num = |t: &str| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| VexError::BadGrid(format!("bad number {t:?} in {part:?}")))
                };
                let count = fields[2]
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| VexError::BadGrid(format!("bad count in {part:?}")))?;
                Ok(Axis { lo: num(fields[0])?, hi: num(fields[1])?, count })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(axes)
    }
}

/// Samples at cell centers of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(VexError::BadGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(VexError::NonFiniteSample { location: format!("{:?}", grid.center(i)), value: *v });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Value at the cell containing `x`.
    pub fn at(&self, x: &[f64]) -> Option<f64> {
        self.grid.locate(x).map(|i| self.values[i])
    }

    /// CSV dump with header `x1[,x2[,x3]],value`.
    pub fn to_csv(&self) -> String {
        let n = self.grid.dimension();
        let mut out = String::new();
        let header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
        let _ = writeln!(out, "{},value", header.join(","));
        for (i, v) in self.values.iter().enumerate() {
            for c in self.grid.center(i) {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{v}");
        }
        out
    }
}

/// Samples `f` at every cell center.
pub fn sample_function<F>(f: F, grid: &GridSpec) -> Result<GridFunction>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    use rayon::prelude::*;
    let values: Vec<f64> = (0..grid.len()).into_par_iter().map(|i| f(&grid.center(i))).collect();
    GridFunction::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    #[test]
    fn parse_grid_grammar() {
        let g: GridSpec = "-8:8:4096".parse().unwrap();
        assert_eq!(g.dimension(), 1);
        assert_eq!(g.cell_volume(), 16.0 / 4096.0);
        let g2: GridSpec = "0:1:4, -1:1:8".parse().unwrap();
        assert_eq!(g2.shape(), vec![4, 8]);
        assert_eq!(g2.cell_volume(), 0.25 * 0.25);
        assert!("1:0:4".parse::<GridSpec>().is_err());
        assert!("0:1:1".parse::<GridSpec>().is_err());
        assert!("0:1".parse::<GridSpec>().is_err());
        assert!("0:1:4,0:1:4,0:1:4,0:1:4".parse::<GridSpec>().is_err());
    }

    #[test]
    fn zero_function() {
        let g = GridSpec::uniform_1d(-1.0, 1.0, 10).unwrap();
        let f = sample_function(|_| 0.0, &g).unwrap();
        assert!(f.is_zero());
    }

    #[test]
    fn indicator_cell_count() {
        let g = GridSpec::uniform_1d(-2.0, 2.0, 64).unwrap();
        let e = Expr::parse("indicator(0,1)").unwrap();
        let f = sample_function(|x| e.eval(x), &g).unwrap();
        assert_eq!(f.values().iter().filter(|&&v| v == 1.0).count(), 16);
        assert_eq!(f.values().iter().filter(|&&v| v != 0.0).count(), 16);
    }

    #[test]
    fn gaussian_is_symmetric_with_central_max() {
        let g = GridSpec::uniform_1d(-8.0, 8.0, 256).unwrap();
        let f = sample_function(|x| (-x[0] * x[0]).exp(), &g).unwrap();
        let v = f.values();
        for i in 0..128 {
            assert_eq!(v[i], v[255 - i]);
        }
        let max = v.iter().copied().fold(0.0, f64::max);
        assert_eq!(max, v[127]);
    }

    #[test]
    fn non_finite_rejected() {
        let g = GridSpec::uniform_1d(-1.0, 1.0, 4).unwrap();
        let err = sample_function(|x| 1.0 / x[0].abs().min(0.0), &g).unwrap_err();
        assert!(matches!(err, VexError::NonFiniteSample { .. }));
    }

    #[test]
    fn row_major_layout_and_csv() {
        let g: GridSpec = "0:2:2,0:3:3".parse().unwrap();
        assert_eq!(g.center(0), vec![0.5, 0.5]);
        assert_eq!(g.center(1), vec![0.5, 1.5]);
        assert_eq!(g.center(3), vec![1.5, 0.5]);
        assert_eq!(g.locate(&[1.5, 0.5]), Some(3));
        let f = sample_function(|x| x[0] + 10.0 * x[1], &g).unwrap();
        let csv = f.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x1,x2,value"));
        assert_eq!(lines.next(), Some("0.5,0.5,5.5"));
        assert_eq!(csv.lines().count(), 7);
    }
}
