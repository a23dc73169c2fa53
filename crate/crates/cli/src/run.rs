use std::time::Instant;

use vexlab_core::decomposition::{decompose, select_parameters, verify_decomposition, Mode, StrategyRegistry};
use vexlab_core::diagnostics::{
    infinity_modulus, log_holder_modulus, nekvinda_check, HolderSampler, InfinitySampler, N2_STABILITY,
};
use vexlab_core::exponent::{build_exponent, ExponentSpec, VariableExponent};
use vexlab_core::field::ExprField;
use vexlab_core::grid::{dyadic_scales, maximal_function, sample_function, ExponentGrid, ScaleSet};
use vexlab_core::oscillation::oscillation_sup;
use vexlab_core::GridSpec;

use crate::error::{spec_error, HarnessError, HarnessResult};
use crate::inline::parse_function;
use crate::job::{ClassCheck, JobSpec, Task};
use crate::probe::{boundedness_probe, ProbeConfig};
use crate::report::{DiagnosticsReport, Payload, SCHEMA_VERSION};

/// Finiteness threshold for the running sup over the last two decades.
pub const STABILITY_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    CheckFailed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::CheckFailed => 1,
        }
    }

    fn from_pass(pass: bool) -> Self {
        if pass {
            Outcome::Pass
        } else {
            Outcome::CheckFailed
        }
    }
}

fn grid(text: &str) -> HarnessResult<GridSpec> {
    text.parse().map_err(|e| spec_error("grid", e))
}

fn exponent(spec: &ExponentSpec, n: usize) -> HarnessResult<VariableExponent> {
    if spec.dimension != n {
        return Err(HarnessError::Spec(format!(
            "exponent has dimension {} but the domain has dimension {n}",
            spec.dimension
        )));
    }
    build_exponent(spec).map_err(|e| spec_error("exponent", e))
}

/// Validates every part of a job that can be checked without computing.
pub fn validate(job: &JobSpec) -> HarnessResult<()> {
    match &job.task {
        Task::Norm { exponent: e, function, grid: g, tol } => {
            let g = grid(g)?;
            exponent(e, g.dimension())?;
            parse_function(function, g.dimension())?;
            if !(*tol > 0.0 && *tol <= 1e-3) {
                return Err(HarnessError::usage("tol", "must lie in (0, 1e-3]"));
            }
        }
        Task::Modular { exponent: e, function, grid: g, lambda } => {
            let g = grid(g)?;
            exponent(e, g.dimension())?;
            parse_function(function, g.dimension())?;
            if !(*lambda > 0.0) {
                return Err(HarnessError::usage("lambda", "must be positive"));
            }
        }
        Task::Maximal { function, grid: g, .. } => {
            parse_function(function, grid(g)?.dimension())?;
        }
        Task::Oscsup { function, dimension, search } => {
            parse_function(function, *dimension)?;
            search.config(job.seed).validate().map_err(|e| spec_error("search", e))?;
        }
        Task::Classify { exponent: e, .. } => {
            exponent(e, e.dimension)?;
        }
        Task::Decompose { exponent: e, strategy, .. } => {
            exponent(e, e.dimension)?;
            StrategyRegistry::global().build(strategy).map_err(|e| spec_error("strategy", e))?;
        }
        Task::Probe { exponent: e, grid: g, probe } => {
            exponent(e, grid(g)?.dimension())?;
            if probe.count == 0 {
                return Err(HarnessError::usage("count", "must be positive"));
            }
        }
    }
    Ok(())
}

fn sampled(function: &str, g: &GridSpec) -> HarnessResult<vexlab_core::GridFunction> {
    let expr = parse_function(function, g.dimension())?;
    Ok(sample_function(|x| expr.eval(x), g)?)
}

/// Runs a job. Errors are usage or spec problems (exit 2) or computations that
/// could not finish; check failures come back as [`Outcome::CheckFailed`].
pub fn run_job(job: &JobSpec) -> HarnessResult<(DiagnosticsReport, Outcome)> {
    validate(job)?;
    let start = Instant::now();
    let mut warnings = Vec::new();
    let (payload, outcome) = match &job.task {
        Task::Norm { exponent: e, function, grid: g, tol } => {
            let g = grid(g)?;
            let p = exponent(e, g.dimension())?;
            let f = sampled(function, &g)?;
            if f.is_zero() {
                warnings.push("function vanishes on the grid; norm is 0".into());
            }
            let pg = ExponentGrid::new(&p, &g)?;
            let value = pg.luxemburg(&f, *tol)?;
            let modular_at_value = if value > 0.0 { pg.modular(&f, value)? } else { 0.0 };
            (Payload::Norm { value, tol: *tol, modular_at_value }, Outcome::Pass)
        }
        Task::Modular { exponent: e, function, grid: g, lambda } => {
            let g = grid(g)?;
            let p = exponent(e, g.dimension())?;
            let f = sampled(function, &g)?;
            let value = ExponentGrid::new(&p, &g)?.modular(&f, *lambda)?;
            (Payload::Modular { lambda: *lambda, value }, Outcome::Pass)
        }
        Task::Maximal { function, grid: g, scales } => {
            let g = grid(g)?;
            let f = sampled(function, &g)?;
            let scales = match scales {
                Some(sides) => ScaleSet { sides: sides.clone() },
                None => dyadic_scales(&g)?,
            };
            let mf = maximal_function(&f, &scales)?;
            let cells = (0..g.len())
                .map(|i| {
                    let mut row = g.center(i);
                    row.push(mf.values()[i]);
                    row
                })
                .collect();
            let max = mf.values().iter().copied().fold(0.0, f64::max);
            (Payload::Maximal { sides: scales.sides, cells, max }, Outcome::Pass)
        }
        Task::Oscsup { function, dimension, search } => {
            let expr = parse_function(function, *dimension)?;
            let field = ExprField::new(expr, *dimension);
            let result = oscillation_sup(&field, &search.config(job.seed))?;
            let tail_change = result.tail_change();
            let stabilized = result.stabilized(STABILITY_THRESHOLD);
            if !stabilized {
                warnings.push(format!(
                    "running sup grew by {tail_change:.3e} (relative) over the last two decades"
                ));
            }
            let outcome = Outcome::from_pass(stabilized || !job.assert_finite);
            (Payload::Oscsup { result, tail_change, stabilized }, outcome)
        }
        Task::Classify { exponent: e, check } => {
            let p = exponent(e, e.dimension)?;
            match check {
                ClassCheck::LogHolder { pairs_per_scale, decades, schedule } => {
                    let cfg = HolderSampler {
                        pairs_per_scale: *pairs_per_scale,
                        decades: *decades,
                        schedule: schedule.clone(),
                        seed: job.seed,
                    };
                    let est = log_holder_modulus(&p, &cfg)?;
                    let ok = !est.divergent;
                    (Payload::Modulus(est), Outcome::from_pass(ok))
                }
                ClassCheck::Infinity { p_inf, log_radii, decades, samples_per_shell } => {
                    let cfg = match log_radii {
                        Some(t) => InfinitySampler::spheres(t, *samples_per_shell, job.seed),
                        None => InfinitySampler::decades(*decades, *samples_per_shell, job.seed),
                    };
                    let est = infinity_modulus(&p, *p_inf, &cfg)?;
                    let ok = !est.divergent;
                    (Payload::Modulus(est), Outcome::from_pass(ok))
                }
                ClassCheck::Nekvinda(cfg) => {
                    let profile = p.profile().ok_or_else(|| {
                        HarnessError::Spec("nekvinda check needs a radial exponent (family nekvinda-radial)".into())
                    })?;
                    let report = nekvinda_check(profile, &p, cfg)?;
                    if report.n2.numeric_derivative {
                        warnings.push("profile derivative taken by central differences".into());
                    }
                    if report.n2.tail_change >= N2_STABILITY {
                        warnings.push("K_est still growing over the scanned range".into());
                    }
                    let ok = report.pass;
                    (Payload::Nekvinda(report), Outcome::from_pass(ok))
                }
            }
        }
        Task::Decompose { exponent: e, strategy, verify } => {
            let p = exponent(e, e.dimension)?;
            let sel = select_parameters(&p, strategy)?;
            let mode = if job.strict { Mode::Strict } else { Mode::Free };
            let p1 = decompose(&p, sel.p0, sel.theta, mode)?;
            let cert = verify_decomposition(&p, sel.p0, sel.theta, &p1, &verify.config(job.seed, mode, &strategy.strategy));
            if !cert.proof_conforming {
                warnings.push("(p0, θ) outside the proof regime; certificate is not proof-conforming".into());
            }
            warnings.extend(cert.skipped.iter().cloned());
            let ok = cert.pass;
            (Payload::Certificate(cert), Outcome::from_pass(ok))
        }
        Task::Probe { exponent: e, grid: g, probe } => {
            let g = grid(g)?;
            let p = exponent(e, g.dimension())?;
            let cfg = ProbeConfig {
                count: probe.count,
                kinds: probe.kinds.clone(),
                seed: job.seed,
                scales: probe.scales.clone(),
                tol: probe.tol,
            };
            let table = boundedness_probe(&p, &cfg, &g)?;
            warnings.extend(table.skipped.iter().cloned());
            (Payload::Probe(table), Outcome::Pass)
        }
    };
    let report = DiagnosticsReport {
        schema: SCHEMA_VERSION,
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        job: job.clone(),
        payload,
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
        warnings,
    };
    Ok((report, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::job::{OutputFormat, SearchSettings, VerifySettings};
    use serde_json::json;
    use vexlab_core::decomposition::StrategySpec;

    fn job(task: Task) -> JobSpec {
        JobSpec { task, seed: 1, out: None, format: OutputFormat::Json, strict: false, assert_finite: false }
    }

    #[test]
    fn norm_of_indicator() {
        let j = job(Task::Norm {
            exponent: ExponentSpec::constant(2.0, 1),
            function: "indicator(0,4)".into(),
            grid: "-8:8:4096".into(),
            tol: 1e-8,
        });
        let (r, o) = run_job(&j).unwrap();
        assert_eq!(o, Outcome::Pass);
        let Payload::Norm { value, .. } = r.payload else { panic!() };
        assert!((value - 2.0).abs() < 1e-6);
    }

    #[test]
    fn decompose_constant_passes() {
        let mut j = job(Task::Decompose {
            exponent: ExponentSpec::constant(3.0, 1),
            strategy: StrategySpec::with_params("manual", json!({"p0": 4.0, "theta": 0.5})),
            verify: VerifySettings { samples: 500, pairs: 500, ladder: 100 },
        });
        j.strict = true;
        let (r, o) = run_job(&j).unwrap();
        assert_eq!(o, Outcome::Pass);
        assert!(matches!(r.payload, Payload::Certificate(ref c) if c.pass && c.proof_conforming));
    }

    #[test]
    fn linear_oscillation_fails_when_asserted() {
        let search = SearchSettings {
            side_min: 1e-2,
            side_max: 1e2,
            center_radius: 10.0,
            samples: 8,
            refinement_steps: 2,
            quad: 16,
        };
        let mut j = job(Task::Oscsup { function: "x".into(), dimension: 1, search });
        assert_eq!(run_job(&j).unwrap().1, Outcome::Pass);
        j.assert_finite = true;
        let (r, o) = run_job(&j).unwrap();
        assert_eq!(o, Outcome::CheckFailed);
        assert!(!r.warnings.is_empty());
    }

    #[test]
    fn dimension_mismatch_is_a_spec_error() {
        let j = job(Task::Norm {
            exponent: ExponentSpec::constant(2.0, 2),
            function: "1".into(),
            grid: "0:1:8".into(),
            tol: 1e-8,
        });
        let e = run_job(&j).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
