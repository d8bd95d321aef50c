//! Scenario generation, verification campaigns and file formats for the
//! `ginv` command line.
//!
//! A campaign draws `count` scenarios from an [`EnsembleConfig`], evaluates
//! the selected checks on each one (in parallel), and folds the outcomes in
//! index order into a [`CampaignReport`], so equal configurations give equal
//! reports.

pub mod campaign;
pub mod checks;
pub mod cli;
pub mod config;
pub mod generate;
pub mod json;

pub use campaign::{run_campaign, BoundRow, CampaignReport, TheoremStats};
pub use checks::{CheckKind, Outcome, Theorem};
pub use config::EnsembleConfig;
pub use generate::{gen_scenario, Generated};

/// Problems with user input; the command line maps these to exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum InputError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] ginv_core::Error),
    #[error("unknown theorem id {0:?}")]
    UnknownTheorem(String),
}
