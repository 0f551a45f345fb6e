//! Regressors standing in for the optical solver: a random forest and a
//! factorization machine, plus dataset storage and the evaluation harness.
//! Models predict the figure of merit (lower is better) from raw code bits.

mod dataset;
mod eval;
mod fm;
mod forest;
mod model;

pub use dataset::{LabeledDataset, DATASET_HEADER};
pub use eval::{cross_validate, evaluate_rmse, kfold_partition, mean_and_sem};
pub use fm::{FmConfig, FmGradient, FmModel, FM_INIT_STD};
pub use forest::{ForestConfig, Node, RandomForest, RegressionTree};
pub use model::{SurrogateModel, MODEL_FORMAT, MODEL_VERSION};

use thiserror::Error;

use crate::encoding::StructureCode;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurrogateError {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("duplicate code {0}")]
    Duplicate(String),

    #[error("code length {found} does not match expected length {expected}")]
    Shape { expected: usize, found: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Divergence { epoch: usize, loss: f64 },

    #[error("invalid model: {0}")]
    Model(String),
}

/// A trained regressor from codes to predicted figure of merit.
pub trait Surrogate: Send + Sync {
    fn code_length(&self) -> usize;

    fn predict(&self, code: &StructureCode) -> Result<f64, SurrogateError>;
}

pub(crate) fn check_length(expected: usize, code: &StructureCode) -> Result<(), SurrogateError> {
    if code.len() == expected {
        Ok(())
    } else {
        Err(SurrogateError::Shape {
            expected,
            found: code.len(),
        })
    }
}
