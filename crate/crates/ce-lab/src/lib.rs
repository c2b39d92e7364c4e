//! Batch front end for the projection certification pipeline.
//!
//! Problem files (JSON with `[re, im]` complex entries) go in, certificate
//! reports come out. The [`pipeline`] module runs the full construction on
//! one map; [`corpus`] generates and certifies instance families in bulk;
//! [`problem`] and [`report`] define the interchange formats. The `ce-lab`
//! binary wraps all of this behind `certify`, `build`, `corpus` and
//! `proof-steps` subcommands.

pub mod corpus;
pub mod pipeline;
pub mod problem;
pub mod report;

pub use pipeline::{run_pipeline, run_pipeline_on_map, run_proof_steps, PipelineOptions};
pub use problem::{ProblemError, ProblemFile};
pub use report::{CertificateReport, CheckReport, Verdict};
