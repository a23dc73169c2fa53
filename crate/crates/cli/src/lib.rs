//! Command-line harness for `vexlab-core`: job specs, a runner producing
//! versioned JSON reports, and the empirical maximal-boundedness probe.

pub mod cli;
pub mod error;
pub mod inline;
pub mod job;
pub mod probe;
pub mod report;
pub mod run;

pub use cli::{execute, job_from_cli, parse_job, Cli};
pub use error::{HarnessError, HarnessResult};
pub use job::{JobSpec, OutputFormat, Task};
pub use report::{DiagnosticsReport, Payload};
pub use run::{run_job, Outcome};
