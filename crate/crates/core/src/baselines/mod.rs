//! Reference optimizers: exhaustive enumeration and a classical generational GA.

mod cga;
mod exhaustive;

pub use cga::{cga_evolve, cga_evolve_with, CgaConfig, CgaOutcome};
pub use exhaustive::{exhaustive_search, within_tie, ExhaustiveResult, DEFAULT_MAX_CODE_LENGTH, TIE_RELATIVE_TOLERANCE};

use thiserror::Error;

use crate::fitness::FitnessError;
use crate::qga::GenerationRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BaselineError {
    #[error("exhaustive search over {code_length} bits exceeds the cap of {cap} bits; use a heuristic search instead")]
    TooLarge { code_length: usize, cap: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Fitness(#[from] FitnessError),

    #[error("{source} (after {} generations)", trace.len())]
    Aborted {
        source: FitnessError,
        trace: Vec<GenerationRecord>,
    },
}
