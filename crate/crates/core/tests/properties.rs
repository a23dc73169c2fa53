use proptest::prelude::*;

use vexlab_core::decomposition::{decompose, Mode};
use vexlab_core::diagnostics::b_weight;
use vexlab_core::exponent::{build_exponent, conjugate_exponent, ExponentSpec, ProfileSpec, Transform};
use vexlab_core::field::FnField;
use vexlab_core::grid::{dyadic_scales, luxemburg_norm, maximal_function, modular_value, sample_function, ScaleSet};
use vexlab_core::oscillation::{mean_oscillation, Cube};
use vexlab_core::sampling::SamplePoint;
use vexlab_core::{GridFunction, GridSpec};

fn lerner_params() -> impl Strategy<Value = (f64, f64)> {
    (0.01f64..2.0, 0.05f64..0.95).prop_map(|(a, r)| (a, a * r))
}

fn point() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1e6f64..1e6, 1..=3)
}

/// Brute-force maximal function over every grid-aligned window of a dyadic
/// length containing the cell.
fn brute_maximal_1d(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0f64; n];
    let mut w = 1;
    while w <= n {
        for start in 0..=n - w {
            let avg = values[start..start + w].iter().map(|v| v.abs()).sum::<f64>() / w as f64;
            for o in &mut out[start..start + w] {
                *o = o.max(avg);
            }
        }
        w *= 2;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_is_an_involution((a, b) in lerner_params(), x in point()) {
        let p = build_exponent(&ExponentSpec::lerner(a, b, x.len())).unwrap();
        let pp = conjugate_exponent(&conjugate_exponent(&p));
        prop_assert!((pp.eval(&x) - p.eval(&x)).abs() <= 1e-12);
        let q = conjugate_exponent(&p);
        prop_assert!((1.0 / p.eval(&x) + 1.0 / q.eval(&x) - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn values_respect_declared_bounds((a, b) in lerner_params(), log_r in -20.0f64..1e6, lo in 1.05f64..4.0, w in 0.0f64..3.0) {
        let sp = SamplePoint { direction: vec![1.0], log_radius: log_r };
        let p = build_exponent(&ExponentSpec::lerner(a, b, 1)).unwrap();
        let v = p.eval_sample(&sp).unwrap();
        prop_assert!(v >= p.lower() - 1e-12 && v <= p.upper() + 1e-12);
        let profile = ProfileSpec::LogDecay { a: lo, b: w };
        let s = build_exponent(&ExponentSpec::nekvinda(&profile, None, 1)).unwrap();
        let v = s.eval_sample(&sp).unwrap();
        prop_assert!(v >= s.lower() - 1e-12 && v <= s.upper() + 1e-12);
    }

    #[test]
    fn decomposition_identity_inverts((a, b) in lerner_params(), frac in 0.05f64..0.95, log_r in -10.0f64..1e4) {
        let p = build_exponent(&ExponentSpec::lerner(a, b, 1)).unwrap();
        let (lo, hi) = p.bounds();
        let theta = frac * (1.0 - 1.0 / lo);
        let p0 = hi;
        let p1 = decompose(&p, p0, theta, Mode::Strict).unwrap();
        let sp = SamplePoint { direction: vec![1.0], log_radius: log_r };
        let (pv, p1v) = (p.eval_sample(&sp).unwrap(), p1.eval_sample(&sp).unwrap());
        let rebuilt = 1.0 / (theta / p0 + (1.0 - theta) / p1v);
        prop_assert!((rebuilt - pv).abs() <= 1e-12);
        prop_assert!(p1v >= p1.lower() - 1e-12 && p1v <= p1.upper() + 1e-12);
    }

    #[test]
    fn monotone_profiles_transfer(a in 1.1f64..4.0, w in 0.0f64..2.0, frac in 0.05f64..0.95) {
        let profile = ProfileSpec::LogDecay { a, b: w };
        let p = build_exponent(&ExponentSpec::nekvinda(&profile, None, 1)).unwrap();
        let (lo, hi) = p.bounds();
        let t = Transform::Decompose { p0: hi, theta: frac * (1.0 - 1.0 / lo) };
        let mut prev = f64::INFINITY;
        for i in 0..1000 {
            let x = 10f64.powf(-3.0 + 15.0 * i as f64 / 999.0);
            let s1 = t.apply(p.eval(&[x]));
            prop_assert!(s1 <= prev);
            prev = s1;
        }
    }

    #[test]
    fn modular_decreases_in_lambda(amp in 0.01f64..100.0, l1 in 0.01f64..10.0, l2 in 0.01f64..10.0) {
        let g = GridSpec::uniform_1d(-4.0, 4.0, 256).unwrap();
        let p = build_exponent(&ExponentSpec::lerner(0.5, 0.3, 1)).unwrap();
        let f = sample_function(|x| amp * (-x[0] * x[0]).exp(), &g).unwrap();
        let (small, large) = if l1 < l2 { (l1, l2) } else { (l2, l1) };
        prop_assert!(modular_value(&f, &p, small).unwrap() >= modular_value(&f, &p, large).unwrap());
    }

    #[test]
    fn norm_is_homogeneous_and_subadditive(c in -50.0f64..50.0, s1 in 0.2f64..3.0, s2 in 0.2f64..3.0) {
        prop_assume!(c.abs() > 1e-3);
        let g = GridSpec::uniform_1d(-8.0, 8.0, 512).unwrap();
        let p = build_exponent(&ExponentSpec::piecewise_radial(&[2.0], &[1.5, 3.0], 1)).unwrap();
        let tol = 1e-9;
        let f = sample_function(|x| (-x[0] * x[0] / s1).exp(), &g).unwrap();
        let h = sample_function(|x| (x[0] / s2).sin(), &g).unwrap();
        let nf = luxemburg_norm(&f, &p, tol).unwrap();
        let ncf = luxemburg_norm(&f.scaled(c), &p, tol).unwrap();
        prop_assert!((ncf - c.abs() * nf).abs() <= 4.0 * tol * ncf);
        let sum: Vec<f64> = f.values().iter().zip(h.values()).map(|(a, b)| a + b).collect();
        let nsum = luxemburg_norm(&GridFunction::new(g.clone(), sum).unwrap(), &p, tol).unwrap();
        let nh = luxemburg_norm(&h, &p, tol).unwrap();
        prop_assert!(nsum <= (nf + nh) * (1.0 + 4.0 * tol));
    }

    #[test]
    fn maximal_matches_brute_force(values in prop::collection::vec(-1e3f64..1e3, 1..=8usize).prop_flat_map(|v| {
        let n = 1usize << v.len().min(7);
        prop::collection::vec(-1e3f64..1e3, n..=n)
    })) {
        let n = values.len();
        let g = GridSpec::uniform_1d(0.0, n as f64 * 0.5, n).unwrap();
        let f = GridFunction::new(g.clone(), values.clone()).unwrap();
        let mf = maximal_function(&f, &dyadic_scales(&g).unwrap()).unwrap();
        let want = brute_maximal_1d(&values);
        for (m, w) in mf.values().iter().zip(&want) {
            prop_assert!((m - w).abs() <= 1e-12 * w.max(1.0), "{m} vs {w}");
        }
    }

    #[test]
    fn maximal_is_sublinear(a in prop::collection::vec(-5.0f64..5.0, 64), b in prop::collection::vec(-5.0f64..5.0, 64), c in -3.0f64..3.0) {
        let g = GridSpec::uniform_1d(0.0, 64.0, 64).unwrap();
        let scales = dyadic_scales(&g).unwrap();
        let fa = GridFunction::new(g.clone(), a.clone()).unwrap();
        let fb = GridFunction::new(g.clone(), b.clone()).unwrap();
        let sum = GridFunction::new(g.clone(), a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
        let (ma, mb, ms) = (
            maximal_function(&fa, &scales).unwrap(),
            maximal_function(&fb, &scales).unwrap(),
            maximal_function(&sum, &scales).unwrap(),
        );
        for i in 0..64 {
            prop_assert!(ms.values()[i] <= ma.values()[i] + mb.values()[i] + 1e-12);
        }
        let mc = maximal_function(&fa.scaled(c), &scales).unwrap();
        for i in 0..64 {
            prop_assert!((mc.values()[i] - c.abs() * ma.values()[i]).abs() <= 1e-12 * (1.0 + ma.values()[i]));
        }
    }

    #[test]
    fn larger_scale_sets_never_decrease_m(v in prop::collection::vec(-5.0f64..5.0, 32)) {
        let g = GridSpec::uniform_1d(0.0, 32.0, 32).unwrap();
        let f = GridFunction::new(g.clone(), v).unwrap();
        let few = maximal_function(&f, &ScaleSet { sides: vec![1.0, 4.0] }).unwrap();
        let all = maximal_function(&f, &dyadic_scales(&g).unwrap()).unwrap();
        for (a, b) in few.values().iter().zip(all.values()) {
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn oscillation_shift_and_scale(c in -10.0f64..10.0, k in -10.0f64..10.0, center in -1e3f64..1e3, side in 1e-3f64..1e3) {
        let q = Cube::new(vec![center], side).unwrap();
        let f = FnField::new(1, |x: &[f64]| (x[0] * 0.37).sin() + 0.01 * x[0]);
        let shifted = FnField::new(1, |x: &[f64]| (x[0] * 0.37).sin() + 0.01 * x[0] + k);
        let scaled = FnField::new(1, |x: &[f64]| c * ((x[0] * 0.37).sin() + 0.01 * x[0]));
        let base = mean_oscillation(&f, &q, 64).unwrap();
        prop_assert!((mean_oscillation(&shifted, &q, 64).unwrap() - base).abs() <= 1e-9 * (1.0 + k.abs()));
        prop_assert!((mean_oscillation(&scaled, &q, 64).unwrap() - c.abs() * base).abs() <= 1e-12 * (1.0 + c.abs()));
    }

    #[test]
    fn oscillation_bracketed_by_double_integral(center in -100.0f64..100.0, side in 0.01f64..100.0, w in 0.1f64..5.0) {
        let quad = 48;
        let f = |x: f64| (w * x).sin() + x.abs().sqrt();
        let q = Cube::new(vec![center], side).unwrap();
        let omega = mean_oscillation(&FnField::new(1, move |x: &[f64]| f(x[0])), &q, quad).unwrap();
        let nodes: Vec<f64> = (0..quad)
            .map(|i| f(center - 0.5 * side + (i as f64 + 0.5) * side / quad as f64))
            .collect();
        let mut d = 0.0;
        for a in &nodes {
            for b in &nodes {
                d += (a - b).abs();
            }
        }
        d /= (quad * quad) as f64;
        prop_assert!(omega <= d + 1e-12);
        prop_assert!(d <= 2.0 * omega + 1e-12);
    }
}

/// Independent oracle: `-(1/α) d/dx (log_k x)^{-α}` by central differences.
#[test]
fn b_weight_matches_finite_differences() {
    for k in 1..=3u32 {
        for alpha in [0.5, 1.0, 2.0] {
            let phi = |x: f64| {
                let mut l = x;
                for _ in 0..k {
                    l = l.ln();
                }
                l.powf(-alpha)
            };
            let start = vexlab_core::diagnostics::iterated_exp(k) * 1.5;
            for i in 0..100 {
                let x = start * 10f64.powf(i as f64 * 0.1);
                let h = x * 1e-5;
                let fd = -(phi(x + h) - phi(x - h)) / (2.0 * h * alpha);
                let b = b_weight(k, alpha, x).unwrap();
                assert!(((fd - b) / b).abs() < 1e-6, "k={k} α={alpha} x={x}: {fd} vs {b}");
            }
        }
    }
}
