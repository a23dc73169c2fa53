use rayon::prelude::*;

use super::{GridFunction, GridSpec};
use crate::error::{Result, VexError};
use crate::exponent::VariableExponent;
use crate::reduce::pairwise_sum;

/// Exponent values at the cell centers of a grid, reused across λ evaluations.
#[derive(Debug, Clone)]
pub struct ExponentGrid {
    grid: GridSpec,
    values: Vec<f64>,
}

impl ExponentGrid {
    pub fn new(p: &VariableExponent, grid: &GridSpec) -> Result<Self> {
        if p.dimension() != grid.dimension() {
            return Err(VexError::BadGrid(format!(
                "exponent dimension {} does not match grid dimension {}",
                p.dimension(),
                grid.dimension()
            )));
        }
        let values = (0..grid.len()).into_par_iter().map(|i| p.eval(&grid.center(i))).collect();
        Ok(Self { grid: grid.clone(), values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Midpoint approximation of `∫ |f/λ|^{p(x)} dx` over the box.
    pub fn modular(&self, f: &GridFunction, lambda: f64) -> Result<f64> {
        if !(lambda > 0.0) {
            return Err(VexError::BadLambda(lambda));
        }
        if f.grid() != &self.grid {
            return Err(VexError::BadGrid("function and exponent grids differ".into()));
        }
        let terms: Vec<f64> = f
            .values()
            .par_iter()
            .zip(self.values.par_iter())
            .map(|(&v, &p)| if v == 0.0 { 0.0 } else { (v.abs() / lambda).powf(p) })
            .collect();
        Ok(pairwise_sum(&terms) * self.grid.cell_volume())
    }

    /// `inf { λ > 0 : I(f/λ) <= 1 }`, bracketed from λ = 1 by doubling or
    /// halving and then bisected to relative width `tol`.
    pub fn luxemburg(&self, f: &GridFunction, tol: f64) -> Result<f64> {
        if !(tol > 0.0 && tol <= 1e-3) {
            return Err(VexError::BadConfig(format!("tol must lie in (0, 1e-3], got {tol}")));
        }
        if f.is_zero() {
            return Ok(0.0);
        }
        const MAX_EXPANSIONS: usize = 1100;
        let above = |lambda: f64| -> Result<bool> { Ok(self.modular(f, lambda)? > 1.0) };

        let (mut lo, mut hi) = if above(1.0)? {
            let mut lo = 1.0;
            let mut hi = 2.0;
            let mut steps = 0;
            while above(hi)? {
                lo = hi;
                hi *= 2.0;
                steps += 1;
                if steps > MAX_EXPANSIONS || !hi.is_finite() {
                    return Err(VexError::BracketFailure(format!("modular still above 1 at λ = {lo:e}")));
                }
            }
            (lo, hi)
        } else {
            let mut hi = 1.0;
            let mut lo = 0.5;
            let mut steps = 0;
            while !above(lo)? {
                hi = lo;
                lo *= 0.5;
                steps += 1;
                if steps > MAX_EXPANSIONS || lo == 0.0 {
                    return Err(VexError::BracketFailure(format!("modular still below 1 at λ = {hi:e}")));
                }
            }
            (lo, hi)
        };
        while hi - lo > tol * hi {
            let mid = 0.5 * (lo + hi);
            if above(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

pub fn modular_value(f: &GridFunction, p: &VariableExponent, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(VexError::BadLambda(lambda));
    }
    ExponentGrid::new(p, f.grid())?.modular(f, lambda)
}

pub fn luxemburg_norm(f: &GridFunction, p: &VariableExponent, tol: f64) -> Result<f64> {
    ExponentGrid::new(p, f.grid())?.luxemburg(f, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::{build_exponent, ExponentSpec};
    use crate::grid::sample_function;

    fn indicator(lo: f64, hi: f64, grid: &str) -> GridFunction {
        let g: GridSpec = grid.parse().unwrap();
        sample_function(|x| if x[0] >= lo && x[0] <= hi { 1.0 } else { 0.0 }, &g).unwrap()
    }

    fn two_block() -> VariableExponent {
        build_exponent(&ExponentSpec::piecewise_radial(&[1.0], &[2.0, 4.0], 1)).unwrap()
    }

    #[test]
    fn modular_closed_forms() {
        let f = indicator(0.0, 4.0, "-8:8:4096");
        let p2 = build_exponent(&ExponentSpec::constant(2.0, 1)).unwrap();
        assert_eq!(modular_value(&f, &p2, 2.0).unwrap(), 1.0);
        let z = f.scaled(0.0);
        assert_eq!(modular_value(&z, &two_block(), 1.0).unwrap(), 0.0);
        let g = indicator(0.0, 2.0, "-1:3:4096");
        assert!((modular_value(&g, &two_block(), 1.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bad_lambda() {
        let f = indicator(0.0, 1.0, "-1:1:8");
        let p = build_exponent(&ExponentSpec::constant(2.0, 1)).unwrap();
        assert_eq!(modular_value(&f, &p, 0.0).unwrap_err(), VexError::BadLambda(0.0));
        assert!(modular_value(&f, &p, -1.0).is_err());
    }

    #[test]
    fn norm_of_zero_is_zero() {
        let f = indicator(5.0, 6.0, "-1:1:8");
        let p = two_block();
        assert_eq!(luxemburg_norm(&f, &p, 1e-8).unwrap(), 0.0);
    }

    #[test]
    fn bracket_handles_tiny_and_huge_functions() {
        let f = indicator(0.0, 4.0, "-8:8:4096");
        let p = build_exponent(&ExponentSpec::constant(2.0, 1)).unwrap();
        for c in [1e-200, 1e-5, 1e5, 1e200] {
            let n = luxemburg_norm(&f.scaled(c), &p, 1e-10).unwrap();
            assert!((n / (2.0 * c) - 1.0).abs() < 1e-9, "c={c}: {n}");
        }
    }

    #[test]
    fn tol_validated() {
        let f = indicator(0.0, 4.0, "-8:8:64");
        let p = build_exponent(&ExponentSpec::constant(2.0, 1)).unwrap();
        assert!(matches!(luxemburg_norm(&f, &p, 0.1).unwrap_err(), VexError::BadConfig(_)));
        assert!(luxemburg_norm(&f, &p, 0.0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let f = indicator(0.0, 4.0, "-8:8:64");
        let p = build_exponent(&ExponentSpec::constant(2.0, 2)).unwrap();
        assert!(matches!(luxemburg_norm(&f, &p, 1e-6).unwrap_err(), VexError::BadGrid(_)));
    }
}
