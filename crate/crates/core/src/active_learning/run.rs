use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;

use super::{IterationRecord, LoopConfig, LoopError, SurrogateChoice};
use crate::encoding::StructureCode;
use crate::fitness::FitnessError;
use crate::optics::FITNESS_SCALE;
use crate::problem::TrcProblem;
use crate::qga::{evolve_with, memory_corrupt, warm_start, warm_start_weight, GenerationRecord, Incumbent};
use crate::rng::{mix_seed, seeded, stream};
use crate::surrogate::{FmConfig, FmModel, ForestConfig, LabeledDataset, RandomForest, Surrogate, SurrogateError};

/// Code spaces up to this many bits are enumerated rather than rejection-sampled.
const ENUMERATION_BITS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopStatus {
    /// The proposal repeated `convergence_repeats` times, or the surrogate is exact.
    Converged,
    /// `max_iterations` ran without convergence.
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopOutcome {
    /// Lowest-FOM labeled code at exit.
    pub best_code: StructureCode,
    pub best_true_fom: f64,
    pub records: Vec<IterationRecord>,
    pub dataset: LabeledDataset,
    /// Optimizer trace of each iteration; fitness values are surrogate-based.
    pub traces: Vec<Vec<GenerationRecord>>,
    pub status: LoopStatus,
    pub surrogate_evaluations: u64,
}

fn space_size(code_length: usize) -> Option<u64> {
    (code_length < 64).then(|| 1u64 << code_length)
}

/// `m` distinct uniformly random codes labeled with their true figure of merit.
pub fn bootstrap_dataset<R: Rng + ?Sized>(problem: &TrcProblem, m: usize, rng: &mut R) -> Result<LabeledDataset, LoopError> {
    let len = problem.code_length();
    if space_size(len).is_some_and(|s| (m as u64) > s) {
        return Err(LoopError::InvalidConfig(format!("cannot draw {m} distinct codes of {len} bits")));
    }
    let codes: Vec<StructureCode> = if len <= ENUMERATION_BITS {
        sample(rng, 1usize << len, m)
            .into_iter()
            .map(|i| StructureCode::from_index(i as u64, len))
            .collect()
    } else {
        let mut seen = std::collections::HashSet::new();
        let mut codes = Vec::with_capacity(m);
        while codes.len() < m {
            let code = random_code(len, rng);
            if seen.insert(code.clone()) {
                codes.push(code);
            }
        }
        codes
    };
    let labels = codes
        .par_iter()
        .map(|c| problem.fom(c).map(|f| f.value()))
        .collect::<Result<Vec<_>, _>>()?;
    LabeledDataset::from_rows(codes.into_iter().zip(labels)).map_err(|source| LoopError::Surrogate {
        source,
        records: Vec::new(),
    })
}

fn random_code<R: Rng + ?Sized>(len: usize, rng: &mut R) -> StructureCode {
    StructureCode::from_bits((0..len).map(|_| u8::from(rng.random::<bool>())).collect()).expect("binary digits")
}

/// A code drawn uniformly from those not yet in `data`, or `None` if every code is labeled.
pub fn random_unlabeled_code<R: Rng + ?Sized>(data: &LabeledDataset, len: usize, rng: &mut R) -> Option<StructureCode> {
    if len <= ENUMERATION_BITS {
        let free = (1u64 << len) - data.len() as u64;
        if free == 0 {
            return None;
        }
        let mut target = rng.random_range(0..free);
        for i in 0..1u64 << len {
            let code = StructureCode::from_index(i, len);
            if !data.contains(&code) {
                if target == 0 {
                    return Some(code);
                }
                target -= 1;
            }
        }
        unreachable!("free count matches the complement")
    } else {
        loop {
            let code = random_code(len, rng);
            if !data.contains(&code) {
                return Some(code);
            }
        }
    }
}

enum Trained<'a> {
    Model(Box<dyn Surrogate + 'a>),
    Oracle(&'a TrcProblem),
}

impl Trained<'_> {
    fn fom(&self, code: &StructureCode) -> Result<f64, FitnessError> {
        match self {
            Self::Model(m) => m.predict(code).map_err(|e| FitnessError(e.to_string())),
            Self::Oracle(p) => p.fom(code).map(|f| f.value()).map_err(|e| FitnessError(e.to_string())),
        }
    }
}

fn train<'a>(
    config: &LoopConfig,
    problem: &'a TrcProblem,
    data: &LabeledDataset,
    iteration: usize,
) -> Result<Trained<'a>, SurrogateError> {
    let salt = iteration as u64;
    Ok(match config.surrogate {
        SurrogateChoice::RandomForest => {
            let cfg = ForestConfig {
                rng_seed: mix_seed(config.forest.rng_seed, salt),
                ..config.forest.clone()
            };
            Trained::Model(Box::new(RandomForest::train(data, &cfg)?))
        }
        SurrogateChoice::FactorizationMachine => {
            let cfg = FmConfig {
                rng_seed: mix_seed(config.fm.rng_seed, salt),
                ..config.fm.clone()
            };
            Trained::Model(Box::new(FmModel::train(data, &cfg)?))
        }
        SurrogateChoice::Oracle => Trained::Oracle(problem),
    })
}

/// Bootstraps `m` labeled codes from the dataset stream, then runs the loop.
pub fn run_loop(config: &LoopConfig, problem: &TrcProblem) -> Result<LoopOutcome, LoopError> {
    config.validate()?;
    let mut rng = seeded(config.rng_seed, stream::DATASET);
    let data = bootstrap_dataset(problem, config.initial_dataset_size, &mut rng)?;
    run_loop_with(config, problem, data)
}

/// Runs the loop from an existing labeled set.
///
/// Each iteration: retrain the surrogate from scratch; warm-start the
/// chromosome from the previous one; possibly discard the inherited best
/// (memory corruption); run the QGA with fitness `−100 × predicted FOM`;
/// label the proposal, or a random unlabeled code if the proposal is already
/// labeled. The inherited best is the best proposal so far, carrying its true
/// fitness.
///
/// Streams: the QGA stream draws warm-start angles and all optimizer
/// randomness; the loop stream draws one corruption decision per iteration
/// after the first and the substitutes for duplicate proposals.
pub fn run_loop_with(config: &LoopConfig, problem: &TrcProblem, initial: LabeledDataset) -> Result<LoopOutcome, LoopError> {
    config.validate()?;
    let len = problem.code_length();
    if initial.len() < 2 || initial.code_length() != Some(len) {
        return Err(LoopError::InvalidConfig(format!(
            "initial dataset needs at least 2 rows of {len}-bit codes"
        )));
    }
    let mut data = initial;
    let mut qga_rng = seeded(config.rng_seed, stream::QGA);
    let mut loop_rng = seeded(config.rng_seed, stream::LOOP);

    let mut records: Vec<IterationRecord> = Vec::with_capacity(config.max_iterations);
    let mut traces = Vec::with_capacity(config.max_iterations);
    let mut chromosome = None;
    let mut inherited: Option<Incumbent> = None;
    let mut best_proposal: Option<Incumbent> = None;
    let mut last_fitness = None;
    let mut surrogate_evaluations = 0u64;
    let mut repeats = 0usize;
    let mut status = LoopStatus::BudgetExhausted;

    for iteration in 0..config.max_iterations {
        let model = train(config, problem, &data, iteration).map_err(|source| LoopError::Surrogate {
            source,
            records: records.clone(),
        })?;
        let weight = match (last_fitness, &best_proposal) {
            (Some(current), Some(best)) => {
                let worst = FITNESS_SCALE * data.worst().expect("non-empty").1;
                warm_start_weight(current, best.fitness, worst)
            }
            _ => 0.0,
        };
        let optimizer_err = |source, records: &Vec<IterationRecord>| LoopError::Optimizer {
            source,
            records: records.clone(),
        };
        let start = warm_start(chromosome.as_ref(), weight, len, &mut qga_rng).map_err(|e| optimizer_err(e, &records))?;
        let mut memory_corrupted = false;
        if iteration > 0 {
            let had = inherited.is_some();
            inherited = memory_corrupt(inherited, config.qga.memory_corruption_prob, &mut loop_rng);
            memory_corrupted = had && inherited.is_none();
        }

        let mut fitness = |code: &StructureCode| model.fom(code).map(|f| FITNESS_SCALE * f);
        let outcome = evolve_with(&config.qga, &mut fitness, start, inherited.clone(), &mut qga_rng)
            .map_err(|e| optimizer_err(e, &records))?;
        surrogate_evaluations += outcome.evaluations;

        let proposed = outcome.best.code.clone();
        // Diagnostic only; not counted against the surrogate budget.
        let predicted_fom = model.fom(&proposed).map_err(|e| LoopError::Surrogate {
            source: SurrogateError::Model(e.0),
            records: records.clone(),
        })?;
        let (duplicate, proposed_true_fom, labeled_code, labeled_fom) = match data.get(&proposed) {
            Some(fom) => {
                let substitute = random_unlabeled_code(&data, len, &mut loop_rng);
                match substitute {
                    Some(code) => {
                        let f = problem.fom(&code)?.value();
                        (true, fom, code, f)
                    }
                    None => (true, fom, proposed.clone(), fom),
                }
            }
            None => {
                let f = problem.fom(&proposed)?.value();
                (false, f, proposed.clone(), f)
            }
        };
        if !data.contains(&labeled_code) {
            data.insert(labeled_code.clone(), labeled_fom).map_err(|source| LoopError::Surrogate {
                source,
                records: records.clone(),
            })?;
        }

        let proposal_fitness = FITNESS_SCALE * proposed_true_fom;
        if best_proposal.as_ref().is_none_or(|b| proposal_fitness > b.fitness) {
            best_proposal = Some(Incumbent {
                code: proposed.clone(),
                fitness: proposal_fitness,
            });
        }
        last_fitness = Some(proposal_fitness);
        inherited = best_proposal.clone();
        repeats = match records.last() {
            Some(prev) if prev.proposed_code == proposed => repeats + 1,
            _ => 1,
        };

        let (best_code, best_true_fom) = data.best().expect("non-empty");
        records.push(IterationRecord {
            iteration,
            proposed_code: proposed,
            predicted_fom,
            proposed_true_fom,
            duplicate,
            labeled_code,
            labeled_fom,
            dataset_size: data.len(),
            tmm_evaluations: data.len() as u64,
            surrogate_evaluations,
            generations: outcome.trace.len(),
            warm_start_weight: weight,
            memory_corrupted,
            best_true_fom,
            best_code: best_code.clone(),
        });
        traces.push(outcome.trace);
        chromosome = Some(outcome.chromosome);

        // An exact surrogate gains nothing from retraining.
        if config.surrogate == SurrogateChoice::Oracle || repeats >= config.convergence_repeats {
            status = LoopStatus::Converged;
            break;
        }
    }

    let (best_code, best_true_fom) = data.best().map(|(c, f)| (c.clone(), f)).expect("non-empty");
    Ok(LoopOutcome {
        best_code,
        best_true_fom,
        records,
        dataset: data,
        traces,
        status,
        surrogate_evaluations,
    })
}
