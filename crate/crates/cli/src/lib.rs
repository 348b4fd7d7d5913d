pub mod config;
pub mod report;
pub mod suites;

pub use config::ExperimentConfig;
pub use report::ReportRow;
pub use suites::{run_suite, Suite, SuiteOutcome};
