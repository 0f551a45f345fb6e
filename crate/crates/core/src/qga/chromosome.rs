use std::f64::consts::PI;

use rand::Rng;

use super::qubit::{hadamard_init, ry_apply, x_apply, QubitPair};
use super::QgaError;
use crate::encoding::StructureCode;

/// One qubit per bit; a distribution over all codes of its length.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChromosome {
    qubits: Vec<QubitPair>,
}

impl QuantumChromosome {
    pub fn new(qubits: Vec<QubitPair>) -> Self {
        Self { qubits }
    }

    pub fn uniform(len: usize) -> Self {
        Self::new(vec![hadamard_init(); len])
    }

    pub fn qubits(&self) -> &[QubitPair] {
        &self.qubits
    }

    pub fn qubits_mut(&mut self) -> &mut [QubitPair] {
        &mut self.qubits
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    /// Samples a code with bit `k` set with probability `b_k²`; the state is not collapsed.
    pub fn measure<R: Rng + ?Sized>(&self, rng: &mut R) -> StructureCode {
        let bits = self
            .qubits
            .iter()
            .map(|q| u8::from(rng.random::<f64>() < q.p_one()))
            .collect();
        StructureCode::from_bits(bits).expect("bits are 0 or 1")
    }

    /// Applies X to each qubit independently with probability `rate`; returns the swap count.
    pub fn mutate<R: Rng + ?Sized>(&mut self, rate: f64, rng: &mut R) -> usize {
        let mut swapped = 0;
        for q in &mut self.qubits {
            if rng.random::<f64>() < rate {
                *q = x_apply(*q);
                swapped += 1;
            }
        }
        swapped
    }

    /// Most likely code.
    pub fn mode(&self) -> StructureCode {
        StructureCode::from_bits(self.qubits.iter().map(|q| u8::from(q.p_one() > 0.5)).collect())
            .expect("bits are 0 or 1")
    }
}

/// `Ry(θ)·H|0⟩` with `θ` uniform in `[0, π]`.
pub fn random_qubit<R: Rng + ?Sized>(rng: &mut R) -> QubitPair {
    ry_apply(hadamard_init(), rng.random_range(0.0..=PI))
}

/// `w·previous + (1 − w)·fresh`, renormalized. Falls back to `fresh` if the blend cancels.
pub fn blend_qubit(previous: QubitPair, fresh: QubitPair, weight: f64) -> QubitPair {
    QubitPair::new(
        weight * previous.a + (1.0 - weight) * fresh.a,
        weight * previous.b + (1.0 - weight) * fresh.b,
    )
    .unwrap_or(fresh)
}

/// Initial chromosome of an optimization cycle.
///
/// Without a previous chromosome every qubit is a fresh random rotation of the
/// uniform superposition; with one, each qubit is blended toward the previous
/// amplitudes with weight `w_p ∈ [0, 0.5]`. One angle is drawn per qubit in
/// order either way.
pub fn warm_start<R: Rng + ?Sized>(
    previous: Option<&QuantumChromosome>,
    weight: f64,
    len: usize,
    rng: &mut R,
) -> Result<QuantumChromosome, QgaError> {
    if !(0.0..=0.5).contains(&weight) {
        return Err(QgaError::InvalidConfig(format!("warm-start weight {weight} outside [0, 0.5]")));
    }
    if let Some(prev) = previous {
        if prev.len() != len {
            return Err(QgaError::Shape {
                expected: len,
                found: prev.len(),
            });
        }
    }
    let qubits = (0..len)
        .map(|k| {
            let fresh = random_qubit(rng);
            match previous {
                Some(prev) => blend_qubit(prev.qubits[k], fresh, weight),
                None => fresh,
            }
        })
        .collect();
    Ok(QuantumChromosome::new(qubits))
}
