use rand::Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::encoding::StructureCode;
use crate::fitness::{Fitness, FitnessError};
use crate::qga::{GenerationRecord, Incumbent};
use crate::rng::{seeded, stream};

/// Generational GA with tournament selection, single-point crossover,
/// bit-flip mutation and elitism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CgaConfig {
    pub population_size: usize,
    /// Generations including the initial random population.
    pub generations: usize,
    pub crossover_rate: f64,
    /// Per-bit flip probability; `None` means `1 / code_length`.
    #[serde(default)]
    pub mutation_rate: Option<f64>,
    pub elitism_count: usize,
    pub tournament_size: usize,
    pub rng_seed: u64,
}

impl Default for CgaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 200,
            crossover_rate: 0.8,
            mutation_rate: None,
            elitism_count: 1,
            tournament_size: 3,
            rng_seed: 0,
        }
    }
}

impl CgaConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |m: String| Err(BaselineError::InvalidConfig(m));
        if self.population_size == 0 || self.generations == 0 || self.tournament_size == 0 {
            return bad("population_size, generations and tournament_size must be positive".into());
        }
        if self.elitism_count > self.population_size {
            return bad(format!(
                "elitism_count {} exceeds population_size {}",
                self.elitism_count, self.population_size
            ));
        }
        for (name, p) in [("crossover_rate", Some(self.crossover_rate)), ("mutation_rate", self.mutation_rate)] {
            if let Some(p) = p {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("{name} must be in [0, 1], got {p}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgaOutcome {
    pub best: Incumbent,
    pub trace: Vec<GenerationRecord>,
    pub evaluations: u64,
    /// Final population, best first.
    pub population: Vec<Incumbent>,
}

pub fn cga_evolve<F: Fitness>(
    config: &CgaConfig,
    fitness: &mut F,
    code_length: usize,
) -> Result<CgaOutcome, BaselineError> {
    let mut rng = seeded(config.rng_seed, stream::CGA);
    cga_evolve_with(config, fitness, code_length, &mut rng)
}

pub fn cga_evolve_with<F: Fitness, R: Rng + ?Sized>(
    config: &CgaConfig,
    fitness: &mut F,
    code_length: usize,
    rng: &mut R,
) -> Result<CgaOutcome, BaselineError> {
    config.validate()?;
    if code_length == 0 {
        return Err(BaselineError::InvalidConfig("code_length must be positive".into()));
    }
    let mutation_rate = config.mutation_rate.unwrap_or(1.0 / code_length as f64);
    let mut trace: Vec<GenerationRecord> = Vec::with_capacity(config.generations);
    let mut evaluations = 0u64;
    let mut best: Option<Incumbent> = None;

    let mut evaluate = |code: StructureCode,
                        evaluations: &mut u64,
                        trace: &[GenerationRecord]|
     -> Result<Incumbent, BaselineError> {
        *evaluations += 1;
        match fitness.evaluate(&code) {
            Ok(f) if f.is_finite() => Ok(Incumbent { code, fitness: f }),
            Ok(f) => Err(BaselineError::Aborted {
                source: FitnessError(format!("non-finite fitness {f}")),
                trace: trace.to_vec(),
            }),
            Err(source) => Err(BaselineError::Aborted {
                source,
                trace: trace.to_vec(),
            }),
        }
    };

    let mut population = Vec::with_capacity(config.population_size);
    for _ in 0..config.population_size {
        let code = random_code(code_length, rng);
        population.push(evaluate(code, &mut evaluations, &trace)?);
    }

    for generation in 0..config.generations {
        if generation > 0 {
            // Stable sort keeps earlier individuals ahead on ties.
            population.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
            let mut next: Vec<Incumbent> = population[..config.elitism_count].to_vec();
            while next.len() < config.population_size {
                let p1 = tournament(&population, config.tournament_size, rng);
                let p2 = tournament(&population, config.tournament_size, rng);
                let (mut c1, mut c2) = (p1.code.clone(), p2.code.clone());
                if code_length > 1 && rng.random::<f64>() < config.crossover_rate {
                    let point = rng.random_range(1..code_length);
                    let (b1, b2) = (c1.bits().to_vec(), c2.bits().to_vec());
                    for i in point..code_length {
                        c1.set(i, b2[i]);
                        c2.set(i, b1[i]);
                    }
                }
                for child in [c1, c2] {
                    if next.len() == config.population_size {
                        break;
                    }
                    let mut child = child;
                    for i in 0..code_length {
                        if rng.random::<f64>() < mutation_rate {
                            child.flip(i);
                        }
                    }
                    next.push(evaluate(child, &mut evaluations, &trace)?);
                }
            }
            population = next;
        }

        let top = population
            .iter()
            .fold(&population[0], |acc, ind| if ind.fitness > acc.fitness { ind } else { acc });
        if best.as_ref().is_none_or(|b| top.fitness > b.fitness) {
            best = Some(top.clone());
        }
        let inc = best.as_ref().expect("population is non-empty");
        trace.push(GenerationRecord {
            generation,
            best_fitness: top.fitness,
            mean_fitness: population.iter().map(|i| i.fitness).sum::<f64>() / population.len() as f64,
            alltime_best_fitness: inc.fitness,
            alltime_best_code: inc.code.clone(),
            evaluations,
        });
    }
    population.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    Ok(CgaOutcome {
        best: best.expect("at least one generation"),
        trace,
        evaluations,
        population,
    })
}

fn random_code<R: Rng + ?Sized>(len: usize, rng: &mut R) -> StructureCode {
    StructureCode::from_bits((0..len).map(|_| u8::from(rng.random::<bool>())).collect()).expect("bits")
}

fn tournament<'a, R: Rng + ?Sized>(population: &'a [Incumbent], size: usize, rng: &mut R) -> &'a Incumbent {
    let mut winner = &population[rng.random_range(0..population.len())];
    for _ in 1..size {
        let challenger = &population[rng.random_range(0..population.len())];
        if challenger.fitness > winner.fitness {
            winner = challenger;
        }
    }
    winner
}
