//! Second-order factorization machine trained by per-sample SGD.
//!
//! `ŷ(x) = w0 + Σ w_i x_i + Σ_{i<j} ⟨v_i, v_j⟩ x_i x_j`, with the pairwise
//! term evaluated as `½ Σ_f [(Σ_i v_if x_i)² − Σ_i v_if² x_i²]`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{check_length, LabeledDataset, Surrogate, SurrogateError};
use crate::encoding::StructureCode;
use crate::rng::{seeded, stream};

/// Standard deviation of the initial latent factors.
pub const FM_INIT_STD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FmConfig {
    pub latent_rank: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2_penalty: f64,
    pub rng_seed: u64,
}

impl Default for FmConfig {
    fn default() -> Self {
        Self {
            latent_rank: 8,
            learning_rate: 1e-2,
            epochs: 500,
            l2_penalty: 1e-4,
            rng_seed: 0,
        }
    }
}

impl FmConfig {
    pub fn validate(&self) -> Result<(), SurrogateError> {
        if self.latent_rank == 0 {
            return Err(SurrogateError::InvalidConfig("latent_rank must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(SurrogateError::InvalidConfig(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        if !(self.l2_penalty >= 0.0 && self.l2_penalty.is_finite()) {
            return Err(SurrogateError::InvalidConfig(format!(
                "l2_penalty must be finite and non-negative, got {}",
                self.l2_penalty
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmModel {
    pub w0: f64,
    pub w: Vec<f64>,
    /// `v[i][f]`: factor `f` of feature `i`.
    pub v: Vec<Vec<f64>>,
}

/// Gradient of the per-sample objective, shaped like [`FmModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct FmGradient {
    pub w0: f64,
    pub w: Vec<f64>,
    pub v: Vec<Vec<f64>>,
}

impl FmModel {
    pub fn zeros(features: usize, rank: usize) -> Self {
        Self {
            w0: 0.0,
            w: vec![0.0; features],
            v: vec![vec![0.0; rank]; features],
        }
    }

    /// Starting point of training: `w0` at the label mean, linear weights
    /// zero, factors drawn from `N(0, FM_INIT_STD²)`.
    pub fn initial(data: &LabeledDataset, config: &FmConfig) -> Result<Self, SurrogateError> {
        Self::initial_with(data, config, &mut seeded(config.rng_seed, stream::SURROGATE))
    }

    fn initial_with<R: Rng>(data: &LabeledDataset, config: &FmConfig, rng: &mut R) -> Result<Self, SurrogateError> {
        config.validate()?;
        let features = data
            .code_length()
            .ok_or_else(|| SurrogateError::InvalidData("cannot train on an empty dataset".into()))?;
        let normal = Normal::new(0.0, FM_INIT_STD).expect("valid normal");
        let mut model = Self::zeros(features, config.latent_rank);
        model.w0 = data.foms().iter().sum::<f64>() / data.len() as f64;
        for row in &mut model.v {
            for f in row.iter_mut() {
                *f = normal.sample(rng);
            }
        }
        Ok(model)
    }

    pub fn train(data: &LabeledDataset, config: &FmConfig) -> Result<Self, SurrogateError> {
        if data.len() < 2 {
            return Err(SurrogateError::InvalidData(format!("need at least 2 rows, got {}", data.len())));
        }
        // Shuffling continues the stream that drew the initial factors.
        let mut rng = seeded(config.rng_seed, stream::SURROGATE);
        let mut model = Self::initial_with(data, config, &mut rng)?;
        let features: Vec<Vec<f64>> = data.feature_matrix();
        let mut order: Vec<usize> = (0..data.len()).collect();
        for epoch in 0..config.epochs {
            order.shuffle(&mut rng);
            let mut loss = 0.0;
            for &i in &order {
                let x = &features[i];
                let (e, sums) = model.residual(x, data.foms()[i]);
                loss += 0.5 * e * e;
                model.sgd_step(x, e, &sums, config.learning_rate, config.l2_penalty);
            }
            if !loss.is_finite() || !model.is_finite() {
                return Err(SurrogateError::Divergence { epoch, loss });
            }
        }
        Ok(model)
    }

    pub fn rank(&self) -> usize {
        self.v.first().map_or(0, Vec::len)
    }

    pub fn is_finite(&self) -> bool {
        self.w0.is_finite() && self.w.iter().all(|w| w.is_finite()) && self.v.iter().flatten().all(|v| v.is_finite())
    }

    /// Per-factor sums `Σ_i v_if x_i`.
    fn factor_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.rank()];
        for (xi, vi) in x.iter().zip(&self.v) {
            if *xi != 0.0 {
                for (s, v) in sums.iter_mut().zip(vi) {
                    *s += v * xi;
                }
            }
        }
        sums
    }

    pub fn predict_features(&self, x: &[f64]) -> f64 {
        self.predict_with(x, &self.factor_sums(x))
    }

    fn predict_with(&self, x: &[f64], sums: &[f64]) -> f64 {
        let mut y = self.w0;
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                y += self.w[i] * xi;
                y -= 0.5 * self.v[i].iter().map(|v| v * v).sum::<f64>() * xi * xi;
            }
        }
        y + 0.5 * sums.iter().map(|s| s * s).sum::<f64>()
    }

    fn residual(&self, x: &[f64], y: f64) -> (f64, Vec<f64>) {
        let sums = self.factor_sums(x);
        (self.predict_with(x, &sums) - y, sums)
    }

    /// `½ (ŷ − y)² + ½ λ (‖w‖² + ‖V‖²)`; `w0` is not penalized.
    pub fn loss(&self, x: &[f64], y: f64, l2: f64) -> f64 {
        let e = self.predict_features(x) - y;
        let norm = self.w.iter().map(|w| w * w).sum::<f64>() + self.v.iter().flatten().map(|v| v * v).sum::<f64>();
        0.5 * e * e + 0.5 * l2 * norm
    }

    /// Analytic gradient of [`FmModel::loss`].
    pub fn gradient(&self, x: &[f64], y: f64, l2: f64) -> FmGradient {
        let (e, sums) = self.residual(x, y);
        FmGradient {
            w0: e,
            w: x.iter().zip(&self.w).map(|(xi, wi)| e * xi + l2 * wi).collect(),
            v: x.iter()
                .zip(&self.v)
                .map(|(xi, vi)| {
                    vi.iter()
                        .zip(&sums)
                        .map(|(vif, s)| e * xi * (s - vif * xi) + l2 * vif)
                        .collect()
                })
                .collect(),
        }
    }

    fn sgd_step(&mut self, x: &[f64], e: f64, sums: &[f64], lr: f64, l2: f64) {
        self.w0 -= lr * e;
        for (i, &xi) in x.iter().enumerate() {
            self.w[i] -= lr * (e * xi + l2 * self.w[i]);
            for (vif, s) in self.v[i].iter_mut().zip(sums) {
                *vif -= lr * (e * xi * (s - *vif * xi) + l2 * *vif);
            }
        }
    }

    pub(crate) fn validate(&self) -> Result<(), SurrogateError> {
        if self.v.len() != self.w.len() {
            return Err(SurrogateError::Model("factor rows do not match linear weights".into()));
        }
        let rank = self.rank();
        if rank == 0 || self.v.iter().any(|r| r.len() != rank) {
            return Err(SurrogateError::Model("factor rows must share a positive rank".into()));
        }
        if !self.is_finite() {
            return Err(SurrogateError::Model("parameters must be finite".into()));
        }
        Ok(())
    }
}

impl Surrogate for FmModel {
    fn code_length(&self) -> usize {
        self.w.len()
    }

    fn predict(&self, code: &StructureCode) -> Result<f64, SurrogateError> {
        check_length(self.w.len(), code)?;
        Ok(self.predict_features(&code.as_features()))
    }
}
