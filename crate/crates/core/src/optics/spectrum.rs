use std::io::Read;

use super::material::read_numeric_csv;
use super::OpticsError;

/// Band in which the ideal coating transmits, inclusive on both ends.
pub const VISIBLE_BAND_NM: (f64, f64) = (400.0, 750.0);

/// Tabulated solar irradiance `S(λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolarSpectrum {
    wavelengths: Vec<f64>,
    irradiance: Vec<f64>,
}

impl SolarSpectrum {
    pub fn new(wavelengths: Vec<f64>, irradiance: Vec<f64>) -> Result<Self, OpticsError> {
        validate_axis(&wavelengths, "solar spectrum")?;
        if irradiance.len() != wavelengths.len() {
            return Err(OpticsError::InvalidGrid("solar spectrum columns differ in length".into()));
        }
        if let Some(i) = irradiance.iter().position(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(OpticsError::InvalidGrid(format!(
                "solar irradiance must be finite and non-negative (row {i})"
            )));
        }
        Ok(Self {
            wavelengths,
            irradiance,
        })
    }

    /// Parses a `wavelength_nm,irradiance` CSV file.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, OpticsError> {
        let rows = read_numeric_csv(reader, &["wavelength_nm", "irradiance"])?;
        let (w, s) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
        Self::new(w, s)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, OpticsError> {
        Self::from_csv(text.as_bytes())
    }

    pub fn span(&self) -> (f64, f64) {
        (self.wavelengths[0], self.wavelengths[self.wavelengths.len() - 1])
    }

    pub fn irradiance_at(&self, wavelength_nm: f64) -> Result<f64, OpticsError> {
        let (min, max) = self.span();
        if !(wavelength_nm >= min && wavelength_nm <= max) {
            return Err(OpticsError::OutOfRange {
                material: "solar spectrum".into(),
                wavelength_nm,
                min,
                max,
            });
        }
        let w = &self.wavelengths;
        let hi = w.partition_point(|&x| x < wavelength_nm);
        if w[hi] == wavelength_nm {
            return Ok(self.irradiance[hi]);
        }
        let t = (wavelength_nm - w[hi - 1]) / (w[hi] - w[hi - 1]);
        Ok(self.irradiance[hi - 1] + t * (self.irradiance[hi] - self.irradiance[hi - 1]))
    }
}

/// Wavelength grid with the solar weights and the ideal transmission profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    wavelengths: Vec<f64>,
    solar: Vec<f64>,
    ideal: Vec<f64>,
}

impl SpectralGrid {
    /// Ideal transmission is 1 inside [`VISIBLE_BAND_NM`] and 0 elsewhere.
    pub fn new(wavelengths: Vec<f64>, solar: Vec<f64>) -> Result<Self, OpticsError> {
        validate_axis(&wavelengths, "spectral grid")?;
        if solar.len() != wavelengths.len() {
            return Err(OpticsError::InvalidGrid("solar weights and wavelengths differ in length".into()));
        }
        if solar.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(OpticsError::InvalidGrid("solar weights must be finite and non-negative".into()));
        }
        if solar.iter().all(|&s| s == 0.0) {
            return Err(OpticsError::InvalidGrid("solar weights are identically zero".into()));
        }
        let ideal = wavelengths
            .iter()
            .map(|&w| {
                if (VISIBLE_BAND_NM.0..=VISIBLE_BAND_NM.1).contains(&w) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            wavelengths,
            solar,
            ideal,
        })
    }

    /// Uniform grid over `[start, end]` with the solar spectrum resampled onto it.
    pub fn uniform(solar: &SolarSpectrum, start_nm: f64, end_nm: f64, step_nm: f64) -> Result<Self, OpticsError> {
        if !(step_nm > 0.0 && step_nm.is_finite()) || end_nm.is_nan() || start_nm.is_nan() || end_nm <= start_nm {
            return Err(OpticsError::InvalidGrid(format!(
                "need start < end and a positive step, got [{start_nm}, {end_nm}] step {step_nm}"
            )));
        }
        let count = ((end_nm - start_nm) / step_nm + 1e-9).floor() as usize + 1;
        if count > 10_000_000 {
            return Err(OpticsError::InvalidGrid(format!("{count} grid points is too many")));
        }
        let wavelengths: Vec<f64> = (0..count).map(|i| start_nm + step_nm * i as f64).collect();
        let weights = wavelengths
            .iter()
            .map(|&w| solar.irradiance_at(w))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(wavelengths, weights)
    }

    pub fn wavelengths(&self) -> &[f64] {
        &self.wavelengths
    }

    pub fn solar(&self) -> &[f64] {
        &self.solar
    }

    pub fn ideal(&self) -> &[f64] {
        &self.ideal
    }

    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    pub fn span(&self) -> (f64, f64) {
        (self.wavelengths[0], self.wavelengths[self.wavelengths.len() - 1])
    }
}

fn validate_axis(wavelengths: &[f64], what: &str) -> Result<(), OpticsError> {
    if wavelengths.len() < 2 {
        return Err(OpticsError::InvalidGrid(format!("{what} needs at least 2 wavelengths")));
    }
    if wavelengths.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(OpticsError::InvalidGrid(format!("{what} wavelengths must be finite and positive")));
    }
    if wavelengths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OpticsError::InvalidGrid(format!("{what} wavelengths must be strictly increasing")));
    }
    Ok(())
}
