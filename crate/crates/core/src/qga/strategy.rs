//! Rotation schedule, rotation-direction lookup, warm-start weighting and
//! memory corruption.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::QgaError;

/// Linearly decaying rotation angle `θ_i = θ_max − (θ_max − θ_min)/N · i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSchedule {
    pub theta_max: f64,
    pub theta_min: f64,
    pub max_generations: usize,
}

impl RotationSchedule {
    pub fn new(theta_max: f64, theta_min: f64, max_generations: usize) -> Result<Self, QgaError> {
        let s = Self {
            theta_max,
            theta_min,
            max_generations,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), QgaError> {
        if !(self.theta_min > 0.0 && self.theta_max >= self.theta_min && self.theta_max.is_finite()) {
            return Err(QgaError::InvalidConfig(format!(
                "need theta_max >= theta_min > 0, got {} and {}",
                self.theta_max, self.theta_min
            )));
        }
        if self.max_generations == 0 {
            return Err(QgaError::InvalidConfig("max_generations must be positive".into()));
        }
        Ok(())
    }

    pub fn angle(&self, generation: usize) -> f64 {
        rotation_angle(self, generation)
    }
}

/// Generations past the schedule end clamp to `theta_min`.
pub fn rotation_angle(schedule: &RotationSchedule, generation: usize) -> f64 {
    if generation >= schedule.max_generations {
        return schedule.theta_min;
    }
    let step = (schedule.theta_max - schedule.theta_min) / schedule.max_generations as f64;
    schedule.theta_max - step * generation as f64
}

/// Sign applied to the rotation angle of one qubit.
///
/// `x_bit` is the bit of the compared measurement, `best_bit` that of the
/// best individual, `x_better` whether the measurement is strictly fitter.
/// Positive rotations move amplitude toward `|1⟩` in the first quadrant. The
/// `±1` entries draw a fair sign from `rng`; no other entry touches it.
pub fn rotation_direction<R: Rng + ?Sized>(
    x_bit: u8,
    best_bit: u8,
    x_better: bool,
    a: f64,
    b: f64,
    rng: &mut R,
) -> i8 {
    // (a·b > 0, a·b < 0, a = 0, b = 0); `None` marks a random sign.
    let row: [Option<i8>; 4] = match (x_bit, best_bit, x_better) {
        (0, 1, false) | (1, 0, true) => [Some(1), Some(-1), Some(0), None],
        (0, 1, true) | (1, 0, false) => [Some(-1), Some(1), None, Some(0)],
        _ => return 0,
    };
    let entry = if a == 0.0 {
        row[2]
    } else if b == 0.0 {
        row[3]
    } else if a * b > 0.0 {
        row[0]
    } else {
        row[1]
    };
    entry.unwrap_or_else(|| if rng.random::<bool>() { 1 } else { -1 })
}

/// Weight of the previous chromosome when the next cycle starts.
///
/// Fitness values are `−100 × FOM` and so non-positive, which makes the plain
/// ratio `best_current / best_all` exceed one whenever the current cycle falls
/// short. The weight instead scales with how close `best_current` came to
/// `best_all` relative to the worst fitness seen in the run:
/// `0.5 · (best_current − worst) / (best_all − worst)`, clamped to `[0, 0.5]`,
/// and exactly 0.5 when the current cycle matched the all-time best.
pub fn warm_start_weight(best_current: f64, best_all: f64, worst_seen: f64) -> f64 {
    if best_current >= best_all {
        return 0.5;
    }
    let span = best_all - worst_seen;
    if span.is_nan() || span <= 0.0 {
        return 0.5;
    }
    (0.5 * (best_current - worst_seen) / span).clamp(0.0, 0.5)
}

/// Discards the inherited record with probability `probability`.
///
/// Exactly one draw is consumed whether or not a record is present.
pub fn memory_corrupt<T, R: Rng + ?Sized>(record: Option<T>, probability: f64, rng: &mut R) -> Option<T> {
    let corrupt = rng.random::<f64>() < probability;
    if corrupt {
        None
    } else {
        record
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::PI;

    #[test]
    fn schedule_endpoints_and_midpoint() {
        let s = RotationSchedule::new(0.1 * PI, 0.01 * PI, 100).unwrap();
        assert_eq!(s.angle(0), 0.1 * PI);
        assert!((s.angle(100) - 0.01 * PI).abs() < 1e-15);
        assert!((s.angle(50) - 0.055 * PI).abs() < 1e-15);
        assert_eq!(s.angle(1000), 0.01 * PI);
        assert!(RotationSchedule::new(0.01, 0.1, 10).is_err());
        assert!(RotationSchedule::new(0.1, 0.0, 10).is_err());
    }

    #[test]
    fn direction_table_rows() {
        let mut rng = seeded(0, 0);
        for (x, best) in [(0, 0), (1, 1)] {
            for better in [false, true] {
                assert_eq!(rotation_direction(x, best, better, 0.6, 0.8, &mut rng), 0);
                assert_eq!(rotation_direction(x, best, better, 0.0, 1.0, &mut rng), 0);
            }
        }
        // (x, best, better) → [ab>0, ab<0, a=0, b=0] with 2 marking ±1.
        let table: [((u8, u8, bool), [i8; 4]); 4] = [
            ((0, 1, false), [1, -1, 0, 2]),
            ((0, 1, true), [-1, 1, 2, 0]),
            ((1, 0, false), [-1, 1, 2, 0]),
            ((1, 0, true), [1, -1, 0, 2]),
        ];
        let cases = [(0.6, 0.8), (0.6, -0.8), (0.0, 1.0), (1.0, 0.0)];
        for ((x, best, better), row) in table {
            for (col, &(a, b)) in cases.iter().enumerate() {
                let got = rotation_direction(x, best, better, a, b, &mut rng);
                if row[col] == 2 {
                    assert!(got == 1 || got == -1);
                } else {
                    assert_eq!(got, row[col], "row {x}{best}{better} column {col}");
                }
            }
        }
    }

    #[test]
    fn random_sign_is_fair() {
        let mut rng = seeded(9, 0);
        let plus = (0..10_000)
            .filter(|_| rotation_direction(0, 1, false, 1.0, 0.0, &mut rng) == 1)
            .count();
        // Binomial(10_000, 0.5): sd = 50.
        assert!((plus as i64 - 5000).abs() < 200);
    }

    #[test]
    fn warm_weight_examples() {
        assert_eq!(warm_start_weight(-150.0, -150.0, -400.0), 0.5);
        assert!(warm_start_weight(-399.0, -150.0, -400.0) < 0.01);
        assert_eq!(warm_start_weight(-200.0, -150.0, -150.0), 0.5);
        let mut prev = 0.0;
        for i in 0..=250 {
            let current = -400.0 + i as f64;
            let w = warm_start_weight(current, -150.0, -400.0);
            assert!((0.0..=0.5).contains(&w));
            assert!(w >= prev);
            prev = w;
        }
    }

    #[test]
    fn corruption_extremes() {
        let mut rng = seeded(5, 0);
        for _ in 0..100 {
            assert_eq!(memory_corrupt(Some(1), 0.0, &mut rng), Some(1));
            assert_eq!(memory_corrupt(Some(1), 1.0, &mut rng), None);
        }
    }
}
