use std::f64::consts::FRAC_1_SQRT_2;

/// Real amplitudes `a|0⟩ + b|1⟩` with `a² + b² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitPair {
    pub a: f64,
    pub b: f64,
}

impl QubitPair {
    /// Normalizes `(a, b)`; the zero vector is not a state.
    pub fn new(a: f64, b: f64) -> Option<Self> {
        let norm = a.hypot(b);
        (norm > 1e-300 && norm.is_finite()).then(|| Self { a: a / norm, b: b / norm })
    }

    pub const fn zero() -> Self {
        Self { a: 1.0, b: 0.0 }
    }

    pub const fn one() -> Self {
        Self { a: 0.0, b: 1.0 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a * self.a + self.b * self.b
    }

    /// Probability of measuring 1.
    pub fn p_one(&self) -> f64 {
        self.b * self.b
    }

    fn renormalized(self) -> Self {
        let norm = self.a.hypot(self.b);
        Self {
            a: self.a / norm,
            b: self.b / norm,
        }
    }
}

/// Rotation `Ry(θ)`: `(a cos θ/2 − b sin θ/2, a sin θ/2 + b cos θ/2)`.
pub fn ry_apply(q: QubitPair, theta: f64) -> QubitPair {
    let (s, c) = (0.5 * theta).sin_cos();
    QubitPair {
        a: q.a * c - q.b * s,
        b: q.a * s + q.b * c,
    }
    .renormalized()
}

/// Pauli-X: swaps the amplitudes.
pub fn x_apply(q: QubitPair) -> QubitPair {
    QubitPair { a: q.b, b: q.a }
}

/// Hadamard applied to `|0⟩`.
pub fn hadamard_init() -> QubitPair {
    QubitPair {
        a: FRAC_1_SQRT_2,
        b: FRAC_1_SQRT_2,
    }
}
