use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use vexlab_core::decomposition::DecompositionCertificate;
use vexlab_core::diagnostics::{ModulusEstimate, NekvindaReport};
use vexlab_core::oscillation::SupSearchResult;

use crate::job::JobSpec;
use crate::probe::ProbeTable;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Payload {
    Norm {
        value: f64,
        tol: f64,
        /// Modular at the returned λ; at most 1 up to the bisection width.
        modular_at_value: f64,
    },
    Modular {
        lambda: f64,
        value: f64,
    },
    Maximal {
        sides: Vec<f64>,
        /// `[x1, …, xn, Mf]` per cell, row-major.
        cells: Vec<Vec<f64>>,
        max: f64,
    },
    Oscsup {
        result: SupSearchResult,
        tail_change: f64,
        stabilized: bool,
    },
    Modulus(ModulusEstimate),
    Nekvinda(NekvindaReport),
    Certificate(DecompositionCertificate),
    Probe(ProbeTable),
}

impl Payload {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self {
            Payload::Norm { value, tol, modular_at_value } => {
                let _ = writeln!(out, "key,value\nnorm,{value}\ntol,{tol}\nmodular_at_value,{modular_at_value}");
            }
            Payload::Modular { lambda, value } => {
                let _ = writeln!(out, "key,value\nlambda,{lambda}\nmodular,{value}");
            }
            Payload::Maximal { cells, .. } => {
                let n = cells.first().map_or(1, |c| c.len() - 1);
                let header: Vec<String> = (1..=n).map(|k| format!("x{k}")).collect();
                let _ = writeln!(out, "{},value", header.join(","));
                for c in cells {
                    let row: Vec<String> = c.iter().map(f64::to_string).collect();
                    let _ = writeln!(out, "{}", row.join(","));
                }
            }
            Payload::Oscsup { result, .. } => {
                let _ = writeln!(out, "decade,running_sup");
                for (d, s) in &result.trace {
                    let _ = writeln!(out, "{d},{s}");
                }
            }
            Payload::Modulus(m) => {
                let _ = writeln!(out, "scale,max,samples");
                for s in &m.per_scale {
                    let _ = writeln!(out, "{},{},{}", s.scale, s.max, s.samples);
                }
            }
            Payload::Nekvinda(r) => {
                let _ = writeln!(out, "annulus,integral");
                for (i, v) in r.n3.annulus_sums.iter().enumerate() {
                    let _ = writeln!(out, "{i},{v}");
                }
            }
            Payload::Certificate(c) => {
                let _ = writeln!(out, "check,samples,max_violation,pass");
                for k in &c.checks {
                    let _ = writeln!(out, "{},{},{},{}", k.name, k.samples, k.max_violation, k.pass);
                }
            }
            Payload::Probe(t) => {
                let _ = writeln!(out, "id,kind,ratio,ratio_half");
                for r in &t.rows {
                    let half = r.ratio_half.map(|v| v.to_string()).unwrap_or_default();
                    let _ = writeln!(out, "{},{},{},{}", r.id, r.kind, r.ratio, half);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub job: JobSpec,
    pub payload: Payload,
    pub wall_clock_ms: f64,
    pub warnings: Vec<String>,
}

impl DiagnosticsReport {
    /// The payload alone, as compact JSON; identical across reruns of a job.
    pub fn payload_json(&self) -> String {
        serde_json::to_string(&self.payload).expect("payload serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
