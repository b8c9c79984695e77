//! Traces, generators, the verification driver and report output for the
//! `dynsteiner` algorithms.

pub mod gen;
pub mod report;
pub mod run;
pub mod trace;

pub use gen::{gen_mixed, gen_random, Geometry};
pub use run::{run, Algo, Checks, RunConfig, RunError, RunOutput, StepReport, Summary};
pub use trace::{Request, Trace, TraceError};
