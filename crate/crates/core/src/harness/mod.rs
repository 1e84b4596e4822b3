//! Experiment driver: synthetic spectra, Matrix Market files, Monte-Carlo
//! campaigns and reports.

pub mod campaign;
pub mod mm;
pub mod report;
pub mod spectrum;

pub use campaign::{run_campaign, run_campaign_with, CampaignConfig, Claim, Execution, MethodChoice};
pub use mm::{parse_matrix_market, read_matrix_market, write_matrix_market};
pub use report::{emit_report, Aggregate, ExperimentReport, ReportFormat, TrialRecord};
pub use spectrum::{synth_matrix, SpectrumKind, SpectrumSpec, SyntheticMatrix};
