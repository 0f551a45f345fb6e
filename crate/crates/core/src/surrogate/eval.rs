use rand::seq::SliceRandom;

use super::{LabeledDataset, Surrogate, SurrogateError};
use crate::rng::{seeded, stream};

/// Root-mean-square prediction error on `test`.
pub fn evaluate_rmse<S: Surrogate + ?Sized>(model: &S, test: &LabeledDataset) -> Result<f64, SurrogateError> {
    if test.is_empty() {
        return Err(SurrogateError::InvalidData("RMSE needs a non-empty test set".into()));
    }
    let mut sum = 0.0;
    for (code, y) in test.rows() {
        sum += (model.predict(code)? - y).powi(2);
    }
    Ok((sum / test.len() as f64).sqrt())
}

/// Mean and standard error of the mean (sample standard deviation over √n).
/// The error is 0 for fewer than two values; the mean of nothing is NaN.
pub fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Shuffles `0..rows` and deals it into `k` folds whose sizes differ by at most one.
pub fn kfold_partition(rows: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>, SurrogateError> {
    if k < 2 {
        return Err(SurrogateError::InvalidConfig(format!("need at least 2 folds, got {k}")));
    }
    if rows < k {
        return Err(SurrogateError::InvalidData(format!("{rows} rows cannot fill {k} folds")));
    }
    let mut order: Vec<usize> = (0..rows).collect();
    order.shuffle(&mut seeded(seed, stream::SURROGATE));
    let mut folds = vec![Vec::with_capacity(rows / k + 1); k];
    for (i, row) in order.into_iter().enumerate() {
        folds[i % k].push(row);
    }
    Ok(folds)
}

/// Held-out RMSE of each fold, training on the other `k − 1`.
pub fn cross_validate<S, T>(data: &LabeledDataset, k: usize, seed: u64, mut trainer: T) -> Result<Vec<f64>, SurrogateError>
where
    S: Surrogate,
    T: FnMut(&LabeledDataset) -> Result<S, SurrogateError>,
{
    let folds = kfold_partition(data.len(), k, seed)?;
    folds
        .iter()
        .enumerate()
        .map(|(f, test_rows)| {
            let train_rows: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != f)
                .flat_map(|(_, rows)| rows.iter().copied())
                .collect();
            let model = trainer(&data.subset(&train_rows)?)?;
            evaluate_rmse(&model, &data.subset(test_rows)?)
        })
        .collect()
}
