use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::{ContextKind, ContextValue};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use vexlab_core::decomposition::StrategySpec;
use vexlab_core::diagnostics::{NekvindaConfig, PInf};

use crate::error::{HarnessError, HarnessResult};
use crate::inline::parse_exponent;
use crate::job::{ClassCheck, JobSpec, OutputFormat, ProbeSettings, SearchSettings, Task, VerifySettings};
use crate::run::{run_job, validate};

#[derive(Debug, Parser)]
#[command(name = "vexlab", version, about = "Numerical diagnostics for variable-exponent Lebesgue spaces")]
pub struct Cli {
    /// Master seed for every randomized estimator.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Require the proof-regime preconditions when decomposing.
    #[arg(long, global = true)]
    pub strict: bool,

    /// Exit 1 when a sup search does not stabilize.
    #[arg(long, global = true)]
    pub assert_finite: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CheckArg {
    LogHolder,
    Infinity,
    Nekvinda,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Rs,
    Nekvinda,
    Lerner,
    Manual,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Luxemburg norm of a function on a grid.
    Norm {
        #[arg(long)]
        exponent: String,
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Modular of f/λ on a grid.
    Modular {
        #[arg(long)]
        exponent: String,
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        lambda: f64,
    },
    /// Discrete maximal function.
    Maximal {
        #[arg(long)]
        function: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Comma-separated cube sides; dyadic multiples of the cell otherwise.
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
    },
    /// Search for sup ℓ(Q)Ω(f,Q) over cubes.
    Oscsup {
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        side_min: Option<f64>,
        #[arg(long)]
        side_max: Option<f64>,
        #[arg(long)]
        center_radius: Option<f64>,
        /// Candidate cubes per side decade.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        refine: Option<usize>,
        #[arg(long)]
        quad: Option<usize>,
    },
    /// Log-Hölder, decay-at-infinity or Nekvinda diagnostics for an exponent.
    Classify {
        #[arg(long)]
        exponent: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, value_enum)]
        check: CheckArg,
        /// `auto` or a number.
        #[arg(long, default_value = "auto")]
        p_inf: String,
        /// Spheres log|x| for the infinity check.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        log_radii: Option<Vec<f64>>,
        #[arg(long)]
        decades: Option<u32>,
        /// Pairs per scale or samples per shell.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        c: f64,
        #[arg(long, default_value_t = 40)]
        annuli: usize,
    },
    /// Decompose an exponent and certify the result.
    Decompose {
        #[arg(long)]
        exponent: String,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        #[arg(long)]
        p0: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        s_minus: Option<f64>,
        #[arg(long)]
        s_plus: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        ladder: Option<usize>,
    },
    /// Ratios ‖Mf‖/‖f‖ over random test functions.
    Probe {
        #[arg(long)]
        exponent: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, value_delimiter = ',', default_value = "random-steps")]
        kinds: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        scales: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Run a JSON job file; global flags override the file.
    Run { job: PathBuf },
}

fn grid_dimension(grid: &str) -> HarnessResult<usize> {
    let g: vexlab_core::GridSpec = grid.parse().map_err(|e| HarnessError::Spec(format!("grid: {e}")))?;
    Ok(g.dimension())
}

fn parse_p_inf(text: &str) -> HarnessResult<PInf> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(PInf::Auto);
    }
    text.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(PInf::Value)
        .ok_or_else(|| HarnessError::usage("p-inf", format!("expected `auto` or a number, got {text:?}")))
}

fn task_from(command: Command) -> HarnessResult<Task> {
    Ok(match command {
        Command::Norm { exponent, function, grid, tol } => {
            let n = grid_dimension(&grid)?;
            Task::Norm { exponent: parse_exponent(&exponent, n)?, function, grid, tol }
        }
        Command::Modular { exponent, function, grid, lambda } => {
            let n = grid_dimension(&grid)?;
            Task::Modular { exponent: parse_exponent(&exponent, n)?, function, grid, lambda }
        }
        Command::Maximal { function, grid, scales } => Task::Maximal { function, grid, scales },
        Command::Oscsup { function, dim, side_min, side_max, center_radius, samples, refine, quad } => {
            let d = SearchSettings::default();
            let search = SearchSettings {
                side_min: side_min.unwrap_or(d.side_min),
                side_max: side_max.unwrap_or(d.side_max),
                center_radius: center_radius.unwrap_or(d.center_radius),
                samples: samples.unwrap_or(d.samples),
                refinement_steps: refine.unwrap_or(d.refinement_steps),
                quad: quad.unwrap_or(d.quad),
            };
            Task::Oscsup { function, dimension: dim, search }
        }
        Command::Classify { exponent, dim, check, p_inf, log_radii, decades, samples, k, alpha, c, annuli } => {
            let exponent = parse_exponent(&exponent, dim)?;
            let check = match check {
                CheckArg::LogHolder => match ClassCheck::log_holder_default() {
                    ClassCheck::LogHolder { pairs_per_scale, decades: d, schedule } => ClassCheck::LogHolder {
                        pairs_per_scale: samples.unwrap_or(pairs_per_scale),
                        decades: decades.unwrap_or(d),
                        schedule,
                    },
                    _ => unreachable!(),
                },
                CheckArg::Infinity => match ClassCheck::infinity_default() {
                    ClassCheck::Infinity { decades: d, samples_per_shell, .. } => ClassCheck::Infinity {
                        p_inf: parse_p_inf(&p_inf)?,
                        log_radii,
                        decades: decades.unwrap_or(d),
                        samples_per_shell: samples.unwrap_or(samples_per_shell),
                    },
                    _ => unreachable!(),
                },
                CheckArg::Nekvinda => {
                    let d = NekvindaConfig::default();
                    ClassCheck::Nekvinda(NekvindaConfig {
                        k,
                        alpha,
                        c,
                        annuli,
                        n2_decades: decades.unwrap_or(d.n2_decades),
                        n2_points_per_decade: samples.unwrap_or(d.n2_points_per_decade),
                    })
                }
            };
            Task::Classify { exponent, check }
        }
        Command::Decompose { exponent, dim, strategy, p0, theta, s_minus, s_plus, samples, pairs, ladder } => {
            let exponent = parse_exponent(&exponent, dim)?;
            let strategy = match strategy {
                StrategyArg::Rs => StrategySpec::named("rs"),
                StrategyArg::Lerner => StrategySpec::named("lerner"),
                StrategyArg::Nekvinda => match (s_minus, s_plus) {
                    (Some(a), Some(b)) => StrategySpec::with_params("nekvinda", json!({"s_minus": a, "s_plus": b})),
                    (None, None) => StrategySpec::named("nekvinda"),
                    (None, _) => return Err(HarnessError::usage("s-minus", "give --s-minus with --s-plus")),
                    (_, None) => return Err(HarnessError::usage("s-plus", "give --s-plus with --s-minus")),
                },
                StrategyArg::Manual => {
                    let p0 = p0.ok_or_else(|| HarnessError::usage("p0", "manual strategy needs --p0"))?;
                    let theta = theta.ok_or_else(|| HarnessError::usage("theta", "manual strategy needs --theta"))?;
                    StrategySpec::with_params("manual", json!({"p0": p0, "theta": theta}))
                }
            };
            let d = VerifySettings::default();
            let verify = VerifySettings {
                samples: samples.unwrap_or(d.samples),
                pairs: pairs.unwrap_or(d.pairs),
                ladder: ladder.unwrap_or(d.ladder),
            };
            Task::Decompose { exponent, strategy, verify }
        }
        Command::Probe { exponent, grid, count, kinds, scales, tol } => {
            let n = grid_dimension(&grid)?;
            Task::Probe { exponent: parse_exponent(&exponent, n)?, grid, probe: ProbeSettings { count, kinds, scales, tol } }
        }
        Command::Run { .. } => unreachable!("handled by job_from_cli"),
    })
}

/// Builds and validates the job described by parsed arguments.
pub fn job_from_cli(cli: Cli) -> HarnessResult<JobSpec> {
    let mut job = match cli.command {
        Command::Run { job } => {
            let text = std::fs::read_to_string(&job)
                .map_err(|source| HarnessError::Io { path: job.display().to_string(), source })?;
            serde_json::from_str::<JobSpec>(&text).map_err(|e| HarnessError::Spec(format!("{}: {e}", job.display())))?
        }
        command => JobSpec {
            task: task_from(command)?,
            seed: 0,
            out: None,
            format: OutputFormat::Json,
            strict: false,
            assert_finite: false,
        },
    };
    if let Some(seed) = cli.seed {
        job.seed = seed;
    }
    if cli.out.is_some() {
        job.out = cli.out;
    }
    if let Some(f) = cli.format {
        job.format = match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        };
    }
    job.strict |= cli.strict;
    job.assert_finite |= cli.assert_finite;
    validate(&job)?;
    Ok(job)
}

fn clap_flag(e: &clap::Error) -> String {
    match e.get(ContextKind::InvalidArg) {
        Some(ContextValue::String(s)) => s.trim_start_matches('-').split([' ', '=']).next().unwrap_or("").to_string(),
        _ => "args".to_string(),
    }
}

/// Parses argv (including the program name) into a validated job.
pub fn parse_job<I, T>(args: I) -> HarnessResult<JobSpec>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| HarnessError::usage(&clap_flag(&e), e.to_string()))?;
    job_from_cli(cli)
}

/// Runs a parsed command line and writes the report; returns the exit code.
pub fn execute(cli: Cli) -> HarnessResult<u8> {
    let job = job_from_cli(cli)?;
    let (report, outcome) = run_job(&job)?;
    let text = match job.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Csv => report.payload.to_csv(),
    };
    match &job.out {
        Some(path) => std::fs::write(path, text.as_bytes())
            .map_err(|source| HarnessError::Io { path: path.display().to_string(), source })?,
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = stdout.write_all(b"\n");
            }
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(outcome.exit_code())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn happy_path_norm() {
        let job = parse_job(["vexlab", "norm", "--exponent", "const:2", "--function", "indicator(0,4)", "--grid", "-8:8:4096"])
            .unwrap();
        assert!(matches!(job.task, Task::Norm { .. }));
        assert_eq!(job.seed, 0);
    }

    #[test]
    fn spec_errors() {
        let e = parse_job(["vexlab", "norm", "--exponent", "const:1", "--function", "1", "--grid", "0:1:8"]).unwrap_err();
        assert!(matches!(e, HarnessError::Spec(ref m) if m.contains("p_- must exceed 1")), "{e}");
        let e = parse_job(["vexlab", "decompose", "--exponent", "lerner:a=0.05,b=0.1", "--strategy", "lerner"]).unwrap_err();
        assert!(e.to_string().contains("require 0<β<α"));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let e = parse_job(["vexlab", "decompose", "--exponent", "const:3", "--strategy", "manual", "--p0", "4"]).unwrap_err();
        assert!(matches!(e, HarnessError::Usage { ref flag, .. } if flag == "theta"), "{e}");
        let e = parse_job(["vexlab", "norm", "--exponent", "const:2", "--function", "1", "--grid", "0:1:8", "--tol", "abc"])
            .unwrap_err();
        assert!(matches!(e, HarnessError::Usage { ref flag, .. } if flag == "tol"), "{e}");
        let e = parse_job(["vexlab", "classify", "--exponent", "const:2", "--check", "infinity", "--p-inf", "x"]).unwrap_err();
        assert!(matches!(e, HarnessError::Usage { ref flag, .. } if flag == "p-inf"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn globals_after_subcommand() {
        let job = parse_job([
            "vexlab", "oscsup", "--function", "x", "--seed", "9", "--assert-finite", "--format", "csv",
        ])
        .unwrap();
        assert_eq!(job.seed, 9);
        assert!(job.assert_finite);
        assert_eq!(job.format, OutputFormat::Csv);
    }
}
