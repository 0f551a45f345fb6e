//! Quantum-inspired genetic algorithm.
//!
//! A single chromosome of real-amplitude qubits is measured repeatedly each
//! generation; the measurements are scored and the chromosome is rotated
//! toward the fitter of the generation's best measurement and the all-time
//! best individual, then mutated by random X gates.

mod chromosome;
mod evolve;
mod qubit;
mod strategy;
mod trace;

pub use chromosome::{blend_qubit, random_qubit, warm_start, QuantumChromosome};
pub use evolve::{evolve, evolve_with, GenerationRecord, Incumbent, QgaConfig, QgaOutcome, Termination};
pub use qubit::{hadamard_init, ry_apply, x_apply, QubitPair};
pub use strategy::{
    memory_corrupt, rotation_angle, rotation_direction, warm_start_weight, RotationSchedule,
};
pub use trace::{read_trace_csv, write_trace_csv, TRACE_HEADER};

use thiserror::Error;

use crate::fitness::FitnessError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QgaError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("chromosome length {found} does not match code length {expected}")]
    Shape { expected: usize, found: usize },

    #[error("{source} (after {} generations)", trace.len())]
    Fitness {
        source: FitnessError,
        trace: Vec<GenerationRecord>,
    },
}
