//! Discretized Hardy–Littlewood maximal function.
//!
//! For each side length in the scale set, the cubes considered are the
//! grid-aligned cubes of that side lying inside the box. Window sums come from a
//! summed-area table; the max over all windows containing a cell is a separable
//! sliding max, one axis at a time.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GridFunction, GridSpec};
use crate::error::{Result, VexError};

/// Cube side lengths, in the grid's physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSet {
    pub sides: Vec<f64>,
}

/// Sides `{1, 2, 4, …} × cell` up to the shortest box side. Needs cubic cells.
pub fn dyadic_scales(grid: &GridSpec) -> Result<ScaleSet> {
    let h = grid.axes()[0].spacing();
    for a in grid.axes() {
        if ((a.spacing() - h) / h).abs() > 1e-9 {
            return Err(VexError::BadScale("dyadic scale set needs cubic cells".into()));
        }
    }
    let max_cells = grid.axes().iter().map(|a| a.count).min().unwrap();
    let mut sides = Vec::new();
    let mut m = 1usize;
    while m <= max_cells {
        sides.push(m as f64 * h);
        m *= 2;
    }
    Ok(ScaleSet { sides })
}

/// Per-axis cell counts of a cube side, or an error if it is not a whole
/// number of cells on some axis.
fn cells_per_axis(grid: &GridSpec, side: f64) -> Result<Vec<usize>> {
    if !(side > 0.0 && side.is_finite()) {
        return Err(VexError::BadScale(format!("side must be positive, got {side}")));
    }
    grid.axes()
        .iter()
        .map(|a| {
            let ratio = side / a.spacing();
            let m = ratio.round();
            if m < 1.0 || (ratio - m).abs() > 1e-9 * m.max(1.0) {
                Err(VexError::BadScale(format!(
                    "side {side} is not an integer multiple of cell side {}",
                    a.spacing()
                )))
            } else {
                Ok(m as usize)
            }
        })
        .collect()
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

/// Inclusive prefix sums with a zero border: shape `(n_k + 1)`.
fn summed_area(values: &[f64], shape: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let ext: Vec<usize> = shape.iter().map(|n| n + 1).collect();
    let est = strides(&ext);
    let sst = strides(shape);
    let mut table = vec![0.0; ext.iter().product()];
    let n = shape.len();
    // copy values to the interior
    for (flat, v) in values.iter().enumerate() {
        let mut rem = flat;
        let mut dst = 0;
        for k in 0..n {
            let i = rem / sst[k];
            rem %= sst[k];
            dst += (i + 1) * est[k];
        }
        table[dst] = v.abs();
    }
    // cumulative sums along each axis in turn
    for k in 0..n {
        let len = ext[k];
        let stride = est[k];
        for base in 0..table.len() {
            if !(base / stride).is_multiple_of(len) {
                continue;
            }
            let mut acc = 0.0;
            for j in 0..len {
                let idx = base + j * stride;
                acc += table[idx];
                table[idx] = acc;
            }
        }
    }
    (table, est)
}

/// Averages of `|f|` over every window of `m_k` cells per axis.
fn window_means(table: &[f64], est: &[usize], shape: &[usize], m: &[usize]) -> (Vec<f64>, Vec<usize>) {
    let n = shape.len();
    let out_shape: Vec<usize> = shape.iter().zip(m).map(|(s, w)| s - w + 1).collect();
    let ost = strides(&out_shape);
    let count: f64 = m.iter().map(|&w| w as f64).product();
    let total: usize = out_shape.iter().product();
    let out = (0..total)
        .map(|flat| {
            let mut start = vec![0; n];
            let mut rem = flat;
            for k in 0..n {
                start[k] = rem / ost[k];
                rem %= ost[k];
            }
            // inclusion-exclusion over the 2^n corners, fixed order
            let mut sum = 0.0;
            for corner in 0..(1usize << n) {
                let mut idx = 0;
                let mut sign = 1.0;
                for k in 0..n {
                    if corner & (1 << k) != 0 {
                        idx += (start[k] + m[k]) * est[k];
                    } else {
                        idx += start[k] * est[k];
                        sign = -sign;
                    }
                }
                sum += sign * table[idx];
            }
            sum / count
        })
        .collect();
    (out, out_shape)
}

/// `out[i] = max input[s]` over window starts `s` whose length-`m` window
/// contains `i`, for `i in 0..n_out`.
fn sliding_max_containing(input: &[f64], m: usize, n_out: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_out);
    let mut deque: VecDeque<usize> = VecDeque::new();
    for i in 0..n_out {
        if i < input.len() {
            while let Some(&back) = deque.back() {
                if input[back] <= input[i] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(i);
        }
        while let Some(&front) = deque.front() {
            if front + m <= i {
                deque.pop_front();
            } else {
                break;
            }
        }
        out.push(input[*deque.front().expect("window never empty")]);
    }
    out
}

/// Applies [`sliding_max_containing`] along axis `k`, growing it to `n_out`.
fn sliding_max_axis(values: &[f64], shape: &[usize], k: usize, m: usize, n_out: usize) -> (Vec<f64>, Vec<usize>) {
    let mut out_shape = shape.to_vec();
    out_shape[k] = n_out;
    let ist = strides(shape);
    let ost = strides(&out_shape);
    let mut out = vec![0.0; out_shape.iter().product()];
    let lines: usize = shape.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, s)| s).product();
    let mut line = Vec::with_capacity(shape[k]);
    for l in 0..lines {
        // decode the line's coordinates on the other axes
        let mut rem = l;
        let mut ibase = 0;
        let mut obase = 0;
        for j in (0..shape.len()).rev() {
            if j == k {
                continue;
            }
            let c = rem % shape[j];
            rem /= shape[j];
            ibase += c * ist[j];
            obase += c * ost[j];
        }
        line.clear();
        line.extend((0..shape[k]).map(|i| values[ibase + i * ist[k]]));
        for (i, v) in sliding_max_containing(&line, m, n_out).into_iter().enumerate() {
            out[obase + i * ost[k]] = v;
        }
    }
    (out, out_shape)
}

fn maximal_one_scale(f: &GridFunction, table: &[f64], est: &[usize], m: &[usize]) -> Vec<f64> {
    let shape = f.grid().shape();
    let (mut vals, mut cur) = window_means(table, est, &shape, m);
    for k in 0..shape.len() {
        let (v, s) = sliding_max_axis(&vals, &cur, k, m[k], shape[k]);
        vals = v;
        cur = s;
    }
    vals
}

/// `Mf` at each cell center: the largest average of `|f|` over the cubes of
/// the scale set that contain the cell and lie inside the box.
pub fn maximal_function(f: &GridFunction, scales: &ScaleSet) -> Result<GridFunction> {
    if scales.sides.is_empty() {
        return Err(VexError::BadScale("scale set is empty".into()));
    }
    let grid = f.grid();
    let shape = grid.shape();
    let mut windows = Vec::new();
    for &side in &scales.sides {
        let m = cells_per_axis(grid, side)?;
        if m.iter().zip(&shape).all(|(w, n)| w <= n) {
            windows.push(m);
        }
    }
    if windows.is_empty() {
        return Err(VexError::BadScale("no cube of the scale set fits inside the box".into()));
    }
    let (table, est) = summed_area(f.values(), &shape);
    let per_scale: Vec<Vec<f64>> = windows
        .par_iter()
        .map(|m| maximal_one_scale(f, &table, &est, m))
        .collect();
    let mut out = vec![0.0f64; grid.len()];
    for vals in &per_scale {
        for (o, v) in out.iter_mut().zip(vals) {
            *o = o.max(*v);
        }
    }
    GridFunction::new(grid.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_function;

    fn brute_1d(values: &[f64], sides_cells: &[usize]) -> Vec<f64> {
        let n = values.len();
        (0..n)
            .map(|i| {
                let mut best = 0.0f64;
                for &m in sides_cells {
                    if m > n {
                        continue;
                    }
                    let first = i.saturating_sub(m - 1);
                    let last = i.min(n - m);
                    for s in first..=last {
                        let sum: f64 = values[s..s + m].iter().map(|v| v.abs()).sum();
                        best = best.max(sum / m as f64);
                    }
                }
                best
            })
            .collect()
    }

    #[test]
    fn indicator_examples() {
        let g = GridSpec::uniform_1d(-4.0, 4.0, 256).unwrap();
        let f = sample_function(|x| if (0.0..=1.0).contains(&x[0]) { 1.0 } else { 0.0 }, &g).unwrap();
        let mf = maximal_function(&f, &dyadic_scales(&g).unwrap()).unwrap();
        assert_eq!(mf.at(&[0.5]).unwrap(), 1.0);
        let h = g.cell_volume();
        let at2 = mf.at(&[2.0]).unwrap();
        assert!((at2 - 0.5).abs() <= h, "Mf(2) = {at2}");
    }

    #[test]
    fn constant_is_fixed_point() {
        let g: GridSpec = "0:4:16,0:4:16".parse().unwrap();
        let f = sample_function(|_| 3.0, &g).unwrap();
        let mf = maximal_function(&f, &dyadic_scales(&g).unwrap()).unwrap();
        assert!(mf.values().iter().all(|&v| v == 3.0));
    }

    #[test]
    fn sliding_max_matches_naive() {
        let input = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0];
        let m = 3;
        let n_out = input.len() + m - 1;
        let got = sliding_max_containing(&input, m, n_out);
        for i in 0..n_out {
            let lo = i.saturating_sub(m - 1);
            let hi = i.min(input.len() - 1);
            let want = input[lo..=hi].iter().copied().fold(f64::MIN, f64::max);
            assert_eq!(got[i], want);
        }
    }

    #[test]
    fn matches_brute_force_in_1d() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 37).unwrap();
        let vals: Vec<f64> = (0..37).map(|i| ((i * 7919) % 23) as f64 - 11.0).collect();
        let f = GridFunction::new(g.clone(), vals.clone()).unwrap();
        let scales = dyadic_scales(&g).unwrap();
        let mf = maximal_function(&f, &scales).unwrap();
        assert_eq!(mf.values(), brute_1d(&vals, &[1, 2, 4, 8, 16, 32]).as_slice());
    }

    #[test]
    fn matches_brute_force_in_2d() {
        let g: GridSpec = "0:6:6,0:5:5".parse().unwrap();
        let vals: Vec<f64> = (0..30).map(|i| ((i * 37) % 11) as f64).collect();
        let f = GridFunction::new(g.clone(), vals.clone()).unwrap();
        let scales = ScaleSet { sides: vec![1.0, 2.0, 3.0] };
        let mf = maximal_function(&f, &scales).unwrap();
        for i in 0..6usize {
            for j in 0..5usize {
                let mut best = 0.0f64;
                for m in 1..=3usize {
                    for si in i.saturating_sub(m - 1)..=i.min(6 - m) {
                        for sj in j.saturating_sub(m - 1)..=j.min(5 - m) {
                            let mut s = 0.0;
                            for a in si..si + m {
                                for b in sj..sj + m {
                                    s += vals[a * 5 + b];
                                }
                            }
                            best = best.max(s / (m * m) as f64);
                        }
                    }
                }
                assert_eq!(mf.values()[i * 5 + j], best, "cell ({i},{j})");
            }
        }
    }

    #[test]
    fn bad_scales() {
        let g = GridSpec::uniform_1d(0.0, 1.0, 10).unwrap();
        let f = sample_function(|_| 1.0, &g).unwrap();
        let err = maximal_function(&f, &ScaleSet { sides: vec![0.15] }).unwrap_err();
        assert!(matches!(err, VexError::BadScale(_)));
        assert!(maximal_function(&f, &ScaleSet { sides: vec![] }).is_err());
        assert!(maximal_function(&f, &ScaleSet { sides: vec![2.0] }).is_err());
    }

    #[test]
    fn single_cell_scale_dominates_abs() {
        let g = GridSpec::uniform_1d(-1.0, 1.0, 50).unwrap();
        let f = sample_function(|x| (5.0 * x[0]).sin(), &g).unwrap();
        let mf = maximal_function(&f, &dyadic_scales(&g).unwrap()).unwrap();
        for (m, v) in mf.values().iter().zip(f.values()) {
            // summed-area differences round at the last bit
            assert!(*m >= v.abs() - 1e-12);
        }
    }
}
