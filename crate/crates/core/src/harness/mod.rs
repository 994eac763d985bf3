//! Instance generation, experiment configuration and the runner.

pub mod config;
pub mod experiment;
pub mod generate;
pub mod instance;

pub use config::{Algorithm, AuditLevel, ExperimentConfig, GeneratorSpec, InstanceSource, OutputPaths, Tolerances};
pub use experiment::{read_summary, report_text, run_experiment, ExperimentReport, PlotRow, SummaryRow};
pub use instance::{Instance, KServerInput, KServerInstance, PagingInstance, SetCoverInstance};
