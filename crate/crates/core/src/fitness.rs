//! Fitness functions shared by every optimizer. Higher is better.

use std::cell::Cell;

use thiserror::Error;

use crate::encoding::StructureCode;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("fitness evaluation failed: {0}")]
pub struct FitnessError(pub String);

pub trait Fitness {
    fn evaluate(&mut self, code: &StructureCode) -> Result<f64, FitnessError>;
}

impl<F> Fitness for F
where
    F: FnMut(&StructureCode) -> Result<f64, FitnessError>,
{
    fn evaluate(&mut self, code: &StructureCode) -> Result<f64, FitnessError> {
        self(code)
    }
}

/// Counts calls and rejects non-finite values.
pub struct Counted<F> {
    inner: F,
    calls: u64,
}

impl<F: Fitness> Counted<F> {
    pub fn new(inner: F) -> Self {
        Self { inner, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn into_inner(self) -> F {
        self.inner
    }
}

impl<F: Fitness> Fitness for Counted<F> {
    fn evaluate(&mut self, code: &StructureCode) -> Result<f64, FitnessError> {
        self.calls += 1;
        let value = self.inner.evaluate(code)?;
        if !value.is_finite() {
            return Err(FitnessError(format!("non-finite fitness {value} for {code}")));
        }
        Ok(value)
    }
}

/// Counter usable from `Fn` closures on one thread.
#[derive(Debug, Default)]
pub struct CallCounter(Cell<u64>);

impl CallCounter {
    pub fn tick(&self) {
        self.0.set(self.0.get() + 1);
    }

    pub fn get(&self) -> u64 {
        self.0.get()
    }
}

/// Number of ones; the classic toy objective with a known optimum.
pub fn one_max(code: &StructureCode) -> Result<f64, FitnessError> {
    Ok(code.count_ones() as f64)
}
