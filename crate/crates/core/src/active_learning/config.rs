use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::LoopError;
use crate::qga::{QgaConfig, RotationSchedule};
use crate::surrogate::{FmConfig, ForestConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateChoice {
    RandomForest,
    FactorizationMachine,
    /// The optical solver itself; a control with zero surrogate error.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopConfig {
    /// Randomly chosen structures labeled before the first iteration (`m`).
    pub initial_dataset_size: usize,
    pub max_iterations: usize,
    /// Stop once the same code is proposed this many times in a row.
    pub convergence_repeats: usize,
    pub surrogate: SurrogateChoice,
    /// `rng_seed` is ignored here; every stream derives from the loop seed.
    pub qga: QgaConfig,
    pub forest: ForestConfig,
    pub fm: FmConfig,
    pub rng_seed: u64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        PRESETS[0].loop_config(0)
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), LoopError> {
        let bad = |m: String| Err(LoopError::InvalidConfig(m));
        if self.initial_dataset_size < 2 {
            return bad(format!("initial_dataset_size must be at least 2, got {}", self.initial_dataset_size));
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        if self.convergence_repeats == 0 {
            return bad("convergence_repeats must be at least 1".into());
        }
        self.qga.validate().map_err(|e| LoopError::InvalidConfig(format!("qga: {e}")))?;
        self.forest.validate().map_err(|e| LoopError::InvalidConfig(format!("forest: {e}")))?;
        self.fm.validate().map_err(|e| LoopError::InvalidConfig(format!("fm: {e}")))?;
        Ok(())
    }

    /// Upper bound on surrogate calls: generations × iterations × population.
    pub fn surrogate_budget(&self) -> u64 {
        (self.qga.max_generations() * self.max_iterations * self.qga.population_size) as u64
    }
}

/// Per-size run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub layers: usize,
    pub initial_dataset_size: usize,
    pub generations: usize,
    pub iterations: usize,
    pub population_size: usize,
}

impl Preset {
    pub fn loop_config(&self, seed: u64) -> LoopConfig {
        LoopConfig {
            initial_dataset_size: self.initial_dataset_size,
            max_iterations: self.iterations,
            convergence_repeats: 3,
            surrogate: SurrogateChoice::RandomForest,
            qga: QgaConfig {
                population_size: self.population_size,
                mutation_rate: 0.001,
                schedule: RotationSchedule {
                    theta_max: 0.1 * PI,
                    theta_min: 0.01 * PI,
                    max_generations: self.generations,
                },
                stagnation_fraction: 0.5,
                memory_corruption_prob: 0.1,
                rng_seed: seed,
            },
            forest: ForestConfig {
                rng_seed: seed,
                ..ForestConfig::default()
            },
            fm: FmConfig {
                rng_seed: seed,
                ..FmConfig::default()
            },
            rng_seed: seed,
        }
    }

    pub fn surrogate_budget(&self) -> u64 {
        (self.generations * self.iterations * self.population_size) as u64
    }
}

const fn p(name: &'static str, layers: usize, m: usize, g: usize, it: usize, pop: usize) -> Preset {
    Preset {
        name,
        layers,
        initial_dataset_size: m,
        generations: g,
        iterations: it,
        population_size: pop,
    }
}

pub const PRESETS: [Preset; 7] = [
    p("n6", 6, 25, 100, 10, 25),
    p("n8", 8, 25, 100, 10, 50),
    p("n10", 10, 50, 200, 10, 50),
    p("n12", 12, 100, 200, 15, 50),
    p("n14", 14, 100, 400, 20, 100),
    p("n16", 16, 150, 800, 50, 100),
    p("n20", 20, 150, 1000, 100, 500),
];

pub fn preset(name: &str) -> Option<Preset> {
    PRESETS.iter().copied().find(|p| p.name == name)
}
