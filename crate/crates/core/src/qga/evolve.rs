use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::chromosome::QuantumChromosome;
use super::qubit::ry_apply;
use super::strategy::{rotation_direction, RotationSchedule};
use super::QgaError;
use crate::encoding::StructureCode;
use crate::fitness::{Fitness, FitnessError};
use crate::rng::{seeded, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QgaConfig {
    /// Measurements per generation.
    pub population_size: usize,
    pub mutation_rate: f64,
    pub schedule: RotationSchedule,
    /// Stop after `ceil(stagnation_fraction × max_generations)` generations without improvement.
    pub stagnation_fraction: f64,
    pub memory_corruption_prob: f64,
    pub rng_seed: u64,
}

impl Default for QgaConfig {
    fn default() -> Self {
        Self {
            population_size: 25,
            mutation_rate: 0.001,
            schedule: RotationSchedule {
                theta_max: 0.1 * PI,
                theta_min: 0.01 * PI,
                max_generations: 100,
            },
            stagnation_fraction: 0.5,
            memory_corruption_prob: 0.1,
            rng_seed: 0,
        }
    }
}

impl QgaConfig {
    pub fn validate(&self) -> Result<(), QgaError> {
        self.schedule.validate()?;
        if self.population_size == 0 {
            return Err(QgaError::InvalidConfig("population_size must be at least 1".into()));
        }
        for (name, p) in [
            ("mutation_rate", self.mutation_rate),
            ("memory_corruption_prob", self.memory_corruption_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(QgaError::InvalidConfig(format!("{name} must be in [0, 1], got {p}")));
            }
        }
        if !(self.stagnation_fraction > 0.0 && self.stagnation_fraction <= 1.0) {
            return Err(QgaError::InvalidConfig(format!(
                "stagnation_fraction must be in (0, 1], got {}",
                self.stagnation_fraction
            )));
        }
        Ok(())
    }

    pub fn max_generations(&self) -> usize {
        self.schedule.max_generations
    }

    pub fn stagnation_limit(&self) -> usize {
        (self.stagnation_fraction * self.schedule.max_generations as f64).ceil() as usize
    }
}

/// Best individual found so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    pub code: StructureCode,
    pub fitness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub alltime_best_fitness: f64,
    pub alltime_best_code: StructureCode,
    /// Cumulative fitness evaluations at the end of this generation.
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    MaxGenerations,
    Stagnation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QgaOutcome {
    pub best: Incumbent,
    pub trace: Vec<GenerationRecord>,
    pub chromosome: QuantumChromosome,
    pub evaluations: u64,
    pub termination: Termination,
}

/// Runs with an RNG seeded from `config.rng_seed` and no inherited incumbent.
pub fn evolve<F: Fitness>(
    config: &QgaConfig,
    fitness: &mut F,
    initial: QuantumChromosome,
) -> Result<QgaOutcome, QgaError> {
    let mut rng = seeded(config.rng_seed, stream::QGA);
    evolve_with(config, fitness, initial, None, &mut rng)
}

/// Generation loop.
///
/// Per generation, draws are consumed in this order: `population_size`
/// measurements (one draw per qubit each), random rotation signs for the
/// qubits that need one, then one mutation draw per qubit.
///
/// The rotation compares the generation's best measurement with the
/// incumbent as it stood before this generation, so a strictly fitter
/// measurement pulls the chromosome toward itself; the incumbent is updated
/// afterwards. Without an incumbent (first generation of a fresh run) no
/// rotation happens.
pub fn evolve_with<F: Fitness, R: Rng + ?Sized>(
    config: &QgaConfig,
    fitness: &mut F,
    initial: QuantumChromosome,
    inherited: Option<Incumbent>,
    rng: &mut R,
) -> Result<QgaOutcome, QgaError> {
    config.validate()?;
    if let Some(inc) = &inherited {
        if inc.code.len() != initial.len() {
            return Err(QgaError::Shape {
                expected: initial.len(),
                found: inc.code.len(),
            });
        }
    }
    let mut chromosome = initial;
    let mut best = inherited;
    let mut trace = Vec::with_capacity(config.max_generations());
    let mut evaluations = 0u64;
    let mut stagnant = 0usize;
    let stagnation_limit = config.stagnation_limit();
    let mut termination = Termination::MaxGenerations;

    for generation in 0..config.max_generations() {
        let measurements: Vec<StructureCode> = (0..config.population_size)
            .map(|_| chromosome.measure(rng))
            .collect();
        let mut scores = Vec::with_capacity(measurements.len());
        for code in &measurements {
            evaluations += 1;
            let score = fitness
                .evaluate(code)
                .and_then(|f| {
                    if f.is_finite() {
                        Ok(f)
                    } else {
                        Err(FitnessError(format!("non-finite fitness {f} for {code}")))
                    }
                })
                .map_err(|source| QgaError::Fitness {
                    source,
                    trace: trace.clone(),
                })?;
            scores.push(score);
        }
        // First maximum wins ties.
        let (top, top_score) = scores
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s > acc.1 { (i, s) } else { acc });
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;

        let improved = match &best {
            Some(inc) => top_score > inc.fitness,
            None => true,
        };
        if let Some(inc) = &best {
            let theta = config.schedule.angle(generation);
            let x = measurements[top].bits();
            for (k, q) in chromosome.qubits_mut().iter_mut().enumerate() {
                let dir = rotation_direction(x[k], inc.code.bits()[k], improved, q.a, q.b, rng);
                if dir != 0 {
                    *q = ry_apply(*q, f64::from(dir) * theta);
                }
            }
        }
        if improved {
            best = Some(Incumbent {
                code: measurements[top].clone(),
                fitness: top_score,
            });
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        chromosome.mutate(config.mutation_rate, rng);

        let inc = best.as_ref().expect("set in the first generation");
        trace.push(GenerationRecord {
            generation,
            best_fitness: top_score,
            mean_fitness: mean,
            alltime_best_fitness: inc.fitness,
            alltime_best_code: inc.code.clone(),
            evaluations,
        });
        if stagnant >= stagnation_limit {
            termination = Termination::Stagnation;
            break;
        }
    }

    Ok(QgaOutcome {
        best: best.expect("at least one generation ran"),
        trace,
        chromosome,
        evaluations,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::one_max;
    use crate::qga::warm_start;

    fn config(generations: usize, population: usize, seed: u64) -> QgaConfig {
        QgaConfig {
            population_size: population,
            schedule: RotationSchedule {
                max_generations: generations,
                ..QgaConfig::default().schedule
            },
            rng_seed: seed,
            ..QgaConfig::default()
        }
    }

    #[test]
    fn constant_fitness_stops_on_stagnation() {
        let cfg = config(100, 10, 1);
        let mut f = |_: &StructureCode| Ok(1.0);
        let out = evolve(&cfg, &mut f, QuantumChromosome::uniform(8)).unwrap();
        assert_eq!(out.termination, Termination::Stagnation);
        assert_eq!(out.trace.len(), 1 + 50);
        assert_eq!(out.evaluations, 51 * 10);
    }

    #[test]
    fn fitness_failure_keeps_partial_trace() {
        let cfg = config(100, 4, 2);
        let mut calls = 0;
        let mut f = |c: &StructureCode| {
            calls += 1;
            if calls > 10 {
                Err(FitnessError("solver exploded".into()))
            } else {
                one_max(c)
            }
        };
        match evolve(&cfg, &mut f, QuantumChromosome::uniform(6)) {
            Err(QgaError::Fitness { trace, source }) => {
                assert_eq!(trace.len(), 2);
                assert!(source.0.contains("exploded"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = config(60, 12, 3);
        let run = || {
            let mut rng = seeded(3, stream::QGA);
            let init = warm_start(None, 0.0, 10, &mut rng).unwrap();
            let mut f = one_max;
            evolve_with(&cfg, &mut f, init, None, &mut rng).unwrap()
        };
        assert_eq!(run().trace, run().trace);
    }

    #[test]
    fn inherited_incumbent_is_kept_when_unbeaten() {
        let cfg = config(20, 5, 4);
        let inherited = Incumbent {
            code: "1111".parse().unwrap(),
            fitness: 100.0,
        };
        let mut rng = seeded(4, stream::QGA);
        let mut f = one_max;
        let out = evolve_with(&cfg, &mut f, QuantumChromosome::uniform(4), Some(inherited.clone()), &mut rng)
            .unwrap();
        assert_eq!(out.best, inherited);
        assert!(matches!(
            evolve_with(&cfg, &mut f, QuantumChromosome::uniform(5), Some(inherited), &mut rng),
            Err(QgaError::Shape { .. })
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = config(10, 0, 0);
        let mut f = one_max;
        assert!(evolve(&cfg, &mut f, QuantumChromosome::uniform(2)).is_err());
        cfg.population_size = 1;
        cfg.stagnation_fraction = 0.0;
        assert!(evolve(&cfg, &mut f, QuantumChromosome::uniform(2)).is_err());
    }
}
