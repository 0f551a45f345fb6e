//! Quantum-inspired genetic algorithm with surrogate-assisted active learning,
//! applied to binary-encoded multilayer thin-film coatings.

pub mod active_learning;
pub mod baselines;
pub mod commands;
pub mod config;
pub mod encoding;
pub mod fitness;
pub mod optics;
pub mod problem;
pub mod qga;
pub mod rng;
pub mod surrogate;

pub use encoding::{MaterialPalette, StructureCode};
pub use problem::TrcProblem;
