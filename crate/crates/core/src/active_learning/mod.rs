//! Active-learning orchestration: train a surrogate on the labeled set, run
//! the QGA against it, label the proposal with the optical solver, repeat.

mod budget;
mod config;
mod records;
mod run;

pub use budget::{evaluation_budget_report, BudgetReport};
pub use config::{preset, LoopConfig, Preset, SurrogateChoice, PRESETS};
pub use records::{read_iterations_csv, write_iterations_csv, IterationRecord, ITERATIONS_HEADER};
pub use run::{bootstrap_dataset, random_unlabeled_code, run_loop, run_loop_with, LoopOutcome, LoopStatus};

use thiserror::Error;

use crate::encoding::EncodingError;
use crate::qga::QgaError;
use crate::surrogate::SurrogateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("labeling failed: {0}")]
    Labeling(#[from] EncodingError),

    #[error("surrogate training failed at iteration {}: {source}", records.len())]
    Surrogate {
        source: SurrogateError,
        records: Vec<IterationRecord>,
    },

    #[error("optimizer failed at iteration {}: {source}", records.len())]
    Optimizer {
        source: QgaError,
        records: Vec<IterationRecord>,
    },
}

impl LoopError {
    /// Iterations completed before the failure.
    pub fn records(&self) -> &[IterationRecord] {
        match self {
            Self::Surrogate { records, .. } | Self::Optimizer { records, .. } => records,
            _ => &[],
        }
    }
}
