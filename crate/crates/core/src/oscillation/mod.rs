//! Cube averages, mean oscillation `Ω(f, Q)` and the weight `ℓ(Q)`.

mod search;

use serde::{Deserialize, Serialize};

pub use search::{oscillation_sup, SearchConfig, SupSearchResult};

use crate::error::{Result, VexError};
use crate::field::ScalarField;
use crate::reduce::pairwise_sum;

/// Default midpoint nodes per axis.
pub const DEFAULT_QUAD: usize = 64;

/// Upper limit on quadrature nodes per cube when refining automatically.
const MAX_NODES: usize = 1 << 20;

/// Axis-aligned cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0 && side.is_finite()) {
            return Err(VexError::BadParameter(format!("cube side must be positive, got {side}")));
        }
        if center.is_empty() || center.iter().any(|c| !c.is_finite()) {
            return Err(VexError::BadParameter("cube center must be finite".into()));
        }
        Ok(Self { center, side })
    }

    /// The interval `[lo, hi]` as a 1-D cube.
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![0.5 * (lo + hi)], hi - lo)
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    /// `|Q| = side^n`.
    pub fn measure(&self) -> f64 {
        self.side.powi(self.dimension() as i32)
    }

    pub fn center_norm(&self) -> f64 {
        self.center.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// `ℓ(Q) = log(e + max{|Q|, |Q|⁻¹, |cen_Q|})`.
pub fn cube_weight(q: &Cube) -> f64 {
    let m = q.measure();
    let big = m.max(1.0 / m).max(q.center_norm());
    (std::f64::consts::E + big).ln()
}

/// Values of `f` at the `quad^n` tensor midpoint nodes of `q`.
fn node_values(f: &dyn ScalarField, q: &Cube, quad: usize) -> Result<Vec<f64>> {
    let n = q.dimension();
    if f.dimension() != n {
        return Err(VexError::BadParameter(format!(
            "field dimension {} does not match cube dimension {n}",
            f.dimension()
        )));
    }
    let total = quad.pow(n as u32);
    let h = q.side / quad as f64;
    let lo: Vec<f64> = q.center.iter().map(|c| c - 0.5 * q.side).collect();
    let mut x = vec![0.0; n];
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        for k in (0..n).rev() {
            x[k] = lo[k] + ((rem % quad) as f64 + 0.5) * h;
            rem /= quad;
        }
        let v = f.value(&x);
        if !v.is_finite() {
            return Err(VexError::NonFiniteSample { location: format!("{x:?}"), value: v });
        }
        out.push(v);
    }
    Ok(out)
}

fn check_quad(quad: usize) -> Result<()> {
    if quad < 2 {
        return Err(VexError::BadConfig(format!("need at least 2 quadrature points per axis, got {quad}")));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    pairwise_sum(values) / values.len() as f64
}

fn oscillation_of(values: &[f64]) -> f64 {
    let m = mean(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    mean(&dev)
}

/// Midpoint approximation of `f_Q`.
pub fn cube_mean(f: &dyn ScalarField, q: &Cube, quad: usize) -> Result<f64> {
    check_quad(quad)?;
    Ok(mean(&node_values(f, q, quad)?))
}

/// Midpoint approximation of `Ω(f, Q)` on a fixed node set; the same nodes
/// serve for `f_Q` and for the outer average.
pub fn mean_oscillation(f: &dyn ScalarField, q: &Cube, quad: usize) -> Result<f64> {
    check_quad(quad)?;
    Ok(oscillation_of(&node_values(f, q, quad)?))
}

/// `Ω(f, Q)` starting at `quad` nodes per axis and doubling while the coarse
/// and fine values disagree by more than 1%. Returns the value and the node
/// count per axis that produced it.
pub fn mean_oscillation_adaptive(f: &dyn ScalarField, q: &Cube, quad: usize) -> Result<(f64, usize)> {
    check_quad(quad)?;
    let n = q.dimension() as u32;
    let mut q_cur = quad;
    let mut coarse = mean_oscillation(f, q, q_cur)?;
    loop {
        let q_next = q_cur * 2;
        if q_next.pow(n) > MAX_NODES {
            return Ok((coarse, q_cur));
        }
        let fine = mean_oscillation(f, q, q_next)?;
        if (fine - coarse).abs() <= 0.01 * fine.abs() + 1e-13 {
            return Ok((fine, q_next));
        }
        coarse = fine;
        q_cur = q_next;
    }
}

/// One row of a Lipschitz-oscillation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRow {
    pub cube: Cube,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub violation: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzReport {
    pub lipschitz_constant: f64,
    pub rows: Vec<LipschitzRow>,
    pub violations: usize,
    pub max_ratio: f64,
}

/// Checks `Ω(F∘f, Q) <= 2c Ω(f, Q)` on each cube, with both oscillations on
/// the same `quad^n` nodes. A row is a violation iff
/// `lhs > rhs + 1e-9 (1 + rhs)`.
pub fn lipschitz_oscillation_check<F>(
    outer: F,
    c: f64,
    f: &dyn ScalarField,
    cubes: &[Cube],
    quad: usize,
) -> Result<LipschitzReport>
where
    F: Fn(f64) -> f64 + Sync,
{
    use rayon::prelude::*;
    if !(c > 0.0) {
        return Err(VexError::BadParameter(format!("Lipschitz constant must be positive, got {c}")));
    }
    check_quad(quad)?;
    let rows = cubes
        .par_iter()
        .map(|q| {
            let inner = node_values(f, q, quad)?;
            let composed: Vec<f64> = inner.iter().map(|&v| outer(v)).collect();
            let lhs = oscillation_of(&composed);
            let rhs = 2.0 * c * oscillation_of(&inner);
            let slack = rhs - lhs;
            Ok(LipschitzRow { cube: q.clone(), lhs, rhs, slack, violation: lhs > rhs + 1e-9 * (1.0 + rhs) })
        })
        .collect::<Result<Vec<_>>>()?;
    let violations = rows.iter().filter(|r| r.violation).count();
    let max_ratio = rows
        .iter()
        .filter(|r| r.rhs > 0.0)
        .map(|r| r.lhs / r.rhs)
        .fold(0.0, f64::max);
    Ok(LipschitzReport { lipschitz_constant: c, rows, violations, max_ratio })
}
