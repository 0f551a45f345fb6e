use super::spectrum::SpectralGrid;
use super::tmm::{transmittance, LayerStack};
use super::OpticsError;

/// Multiplier mapping a figure of merit onto a fitness to be maximized.
pub const FITNESS_SCALE: f64 = -100.0;

/// Solar-weighted squared distance from the ideal transmission profile; 0 is perfect.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FomValue(pub f64);

impl FomValue {
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn fitness(self) -> f64 {
        FITNESS_SCALE * self.0
    }
}

/// Trapezoid rule on a (possibly non-uniform) grid.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// `10 ∫ (S·T − S·T_ideal)² dλ / ∫ S² dλ` for a transmission spectrum sampled on the grid.
pub fn fom_from_transmittance(grid: &SpectralGrid, transmission: &[f64]) -> FomValue {
    assert_eq!(transmission.len(), grid.len(), "one transmittance per grid point");
    let s = grid.solar();
    let residual: Vec<f64> = transmission
        .iter()
        .zip(grid.ideal())
        .zip(s)
        .map(|((t, ideal), s)| {
            let d = s * t - s * ideal;
            d * d
        })
        .collect();
    let power: Vec<f64> = s.iter().map(|s| s * s).collect();
    let w = grid.wavelengths();
    FomValue(10.0 * trapezoid(w, &residual) / trapezoid(w, &power))
}

pub fn fom(stack: &LayerStack, grid: &SpectralGrid) -> Result<FomValue, OpticsError> {
    let (lo, hi) = grid.span();
    for layer in stack.layers() {
        let m = &layer.material;
        if !m.covers(lo, hi) {
            let (min, max) = m.span();
            return Err(OpticsError::OutOfRange {
                material: m.name().to_string(),
                wavelength_nm: if lo < min { lo } else { hi },
                min,
                max,
            });
        }
    }
    let t = grid
        .wavelengths()
        .iter()
        .map(|&w| transmittance(stack, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(fom_from_transmittance(grid, &t))
}
