use rayon::prelude::*;

use super::BaselineError;
use crate::encoding::StructureCode;
use crate::fitness::FitnessError;

/// Twenty bits, i.e. ten four-material layers.
pub const DEFAULT_MAX_CODE_LENGTH: usize = 20;

/// Relative fitness difference under which two codes count as tied.
///
/// Mirror-image stacks between identical media have equal transmittance, so
/// their fitnesses differ only by rounding.
pub const TIE_RELATIVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    /// Lowest code in lexicographic order among the maxima.
    pub best_code: StructureCode,
    pub best_fitness: f64,
    pub evaluation_count: u64,
    /// Number of codes tied with the maximum.
    pub tie_count: u64,
    /// Every tied code, in lexicographic order.
    pub optima: Vec<StructureCode>,
}

impl ExhaustiveResult {
    pub fn is_optimal(&self, code: &StructureCode) -> bool {
        self.optima.binary_search(code).is_ok()
    }
}

/// Whether `fitness` ties with `best` under [`TIE_RELATIVE_TOLERANCE`].
pub fn within_tie(fitness: f64, best: f64) -> bool {
    fitness >= best - TIE_RELATIVE_TOLERANCE * best.abs().max(1.0)
}

/// Evaluates every code of `code_length` bits. Evaluation is spread over the
/// rayon pool and reduced sequentially in index order, so the result does not
/// depend on scheduling.
pub fn exhaustive_search<F>(fitness: F, code_length: usize, max_code_length: usize) -> Result<ExhaustiveResult, BaselineError>
where
    F: Fn(&StructureCode) -> Result<f64, FitnessError> + Sync,
{
    if code_length == 0 || code_length > max_code_length || code_length > 40 {
        return Err(BaselineError::TooLarge {
            code_length,
            cap: max_code_length.min(40),
        });
    }
    let total = 1u64 << code_length;
    let values = (0..total)
        .into_par_iter()
        .map(|index| {
            let code = StructureCode::from_index(index, code_length);
            let f = fitness(&code)?;
            if !f.is_finite() {
                return Err(FitnessError(format!("non-finite fitness {f} for {code}")));
            }
            Ok(f)
        })
        .collect::<Result<Vec<f64>, FitnessError>>()?;
    let best_fitness = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let optima: Vec<StructureCode> = values
        .iter()
        .enumerate()
        .filter(|(_, &f)| within_tie(f, best_fitness))
        .map(|(i, _)| StructureCode::from_index(i as u64, code_length))
        .collect();
    Ok(ExhaustiveResult {
        best_code: optima[0].clone(),
        best_fitness,
        evaluation_count: total,
        tie_count: optima.len() as u64,
        optima,
    })
}
