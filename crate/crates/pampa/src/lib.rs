//! Benchmark cases, configuration files, mesh and field IO, and the batch
//! driver around [`pampa_core`].

pub mod cases;
pub mod config;
pub mod convergence;
pub mod error;
pub mod generate;
pub mod mesh_io;
pub mod output;
pub mod run;

pub use config::CaseConfig;
pub use error::{Error, Result};
pub use run::{run_case, RunDiagnostics, RunSummary};
