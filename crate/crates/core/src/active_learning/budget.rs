use serde::Serialize;

use super::{IterationRecord, LoopConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub tmm_evaluations: u64,
    pub surrogate_evaluations: u64,
    /// generations × iterations × population.
    pub surrogate_bound: u64,
    /// Evaluations an exhaustive search would need, `2^code_length`.
    pub exhaustive_evaluations: f64,
    /// `tmm_evaluations / exhaustive_evaluations`.
    pub tmm_fraction_of_exhaustive: f64,
}

pub fn evaluation_budget_report(records: &[IterationRecord], config: &LoopConfig, code_length: usize) -> BudgetReport {
    let (tmm, surrogate) = records
        .last()
        .map_or((config.initial_dataset_size as u64, 0), |r| (r.tmm_evaluations, r.surrogate_evaluations));
    let exhaustive = 2f64.powi(code_length as i32);
    BudgetReport {
        tmm_evaluations: tmm,
        surrogate_evaluations: surrogate,
        surrogate_bound: config.surrogate_budget(),
        exhaustive_evaluations: exhaustive,
        tmm_fraction_of_exhaustive: tmm as f64 / exhaustive,
    }
}
