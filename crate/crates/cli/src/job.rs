//! Serializable job descriptions. A job plus its seed determines every number
//! in the resulting report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use vexlab_core::decomposition::{Mode, StrategySpec, VerifyConfig};
use vexlab_core::diagnostics::{HolderSampler, InfinitySampler, NekvindaConfig, PInf};
use vexlab_core::exponent::ExponentSpec;
use vexlab_core::oscillation::{SearchConfig, DEFAULT_QUAD};
use vexlab_core::sampling::RadiusSchedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobSpec {
    #[serde(flatten)]
    pub task: Task,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default)]
    pub strict: bool,
    #[serde(default)]
    pub assert_finite: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Task {
    Norm {
        exponent: ExponentSpec,
        function: String,
        grid: String,
        #[serde(default = "default_tol")]
        tol: f64,
    },
    Modular {
        exponent: ExponentSpec,
        function: String,
        grid: String,
        lambda: f64,
    },
    Maximal {
        function: String,
        grid: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scales: Option<Vec<f64>>,
    },
    Oscsup {
        function: String,
        dimension: usize,
        search: SearchSettings,
    },
    Classify {
        exponent: ExponentSpec,
        check: ClassCheck,
    },
    Decompose {
        exponent: ExponentSpec,
        strategy: StrategySpec,
        verify: VerifySettings,
    },
    Probe {
        exponent: ExponentSpec,
        grid: String,
        probe: ProbeSettings,
    },
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Norm { .. } => "norm",
            Task::Modular { .. } => "modular",
            Task::Maximal { .. } => "maximal",
            Task::Oscsup { .. } => "oscsup",
            Task::Classify { .. } => "classify",
            Task::Decompose { .. } => "decompose",
            Task::Probe { .. } => "probe",
        }
    }
}

pub fn default_tol() -> f64 {
    1e-8
}

/// Sup-search settings; the seed comes from the job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSettings {
    pub side_min: f64,
    pub side_max: f64,
    pub center_radius: f64,
    pub samples: usize,
    pub refinement_steps: usize,
    #[serde(default = "default_quad")]
    pub quad: usize,
}

fn default_quad() -> usize {
    DEFAULT_QUAD
}

impl Default for SearchSettings {
    fn default() -> Self {
        let d = SearchConfig::default();
        Self {
            side_min: d.side_min,
            side_max: d.side_max,
            center_radius: d.center_radius,
            samples: d.samples,
            refinement_steps: d.refinement_steps,
            quad: d.quad,
        }
    }
}

impl SearchSettings {
    pub fn config(&self, seed: u64) -> SearchConfig {
        SearchConfig {
            side_min: self.side_min,
            side_max: self.side_max,
            center_radius: self.center_radius,
            samples: self.samples,
            refinement_steps: self.refinement_steps,
            seed,
            quad: self.quad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum ClassCheck {
    LogHolder {
        pairs_per_scale: usize,
        decades: u32,
        schedule: RadiusSchedule,
    },
    Infinity {
        p_inf: PInf,
        /// Explicit spheres `log |x|`; decade shells otherwise.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        log_radii: Option<Vec<f64>>,
        decades: u32,
        samples_per_shell: usize,
    },
    Nekvinda(NekvindaConfig),
}

impl ClassCheck {
    pub fn log_holder_default() -> Self {
        let d = HolderSampler::default();
        ClassCheck::LogHolder { pairs_per_scale: d.pairs_per_scale, decades: d.decades, schedule: d.schedule }
    }

    pub fn infinity_default() -> Self {
        let d = InfinitySampler::default();
        ClassCheck::Infinity {
            p_inf: PInf::Auto,
            log_radii: None,
            decades: d.shells.len() as u32,
            samples_per_shell: d.samples_per_shell,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifySettings {
    pub samples: usize,
    pub pairs: usize,
    pub ladder: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        let d = VerifyConfig::default();
        Self { samples: d.samples, pairs: d.pairs, ladder: d.ladder }
    }
}

impl VerifySettings {
    pub fn config(&self, seed: u64, mode: Mode, strategy: &str) -> VerifyConfig {
        VerifyConfig {
            samples: self.samples,
            pairs: self.pairs,
            ladder: self.ladder,
            seed,
            mode,
            strategy: strategy.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSettings {
    pub count: usize,
    pub kinds: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scales: Option<Vec<f64>>,
    #[serde(default = "default_probe_tol")]
    pub tol: f64,
}

pub fn default_probe_tol() -> f64 {
    1e-6
}

impl Default for ProbeSettings {
    fn default() -> Self {
        Self { count: 50, kinds: vec!["random-steps".into()], scales: None, tol: default_probe_tol() }
    }
}
