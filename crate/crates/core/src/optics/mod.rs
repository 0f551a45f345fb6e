//! Normal-incidence thin-film optics.
//!
//! Complex indices follow the `ñ = n − i·k` convention with an `e^{+iωt}`
//! time dependence, so a positive extinction coefficient attenuates the
//! forward wave. All operations are pure and safe to call from many threads.

mod data;
mod fom;
mod material;
mod spectrum;
mod tmm;

pub use data::{bundled_material, bundled_solar, BUNDLED_MATERIALS};
pub(crate) use data::require_bundled;
pub use fom::{fom, fom_from_transmittance, trapezoid, FomValue, FITNESS_SCALE};
pub use material::{interpolate_nk, MaterialTable, NkSample};
pub use spectrum::{SolarSpectrum, SpectralGrid, VISIBLE_BAND_NM};
pub use tmm::{layer_matrix, reflectance, response, response_from_matrix, stack_response, transmittance, Layer, LayerStack, Response};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("invalid table `{name}`: {message}")]
    InvalidTable { name: String, message: String },

    #[error("wavelength {wavelength_nm} nm is outside the data range [{min}, {max}] nm of `{material}`")]
    OutOfRange {
        material: String,
        wavelength_nm: f64,
        min: f64,
        max: f64,
    },

    #[error("invalid layer stack: {0}")]
    InvalidStack(String),

    #[error("invalid spectral grid: {0}")]
    InvalidGrid(String),

    #[error("evaluation failed at {wavelength_nm} nm: {message}")]
    Evaluation { wavelength_nm: f64, message: String },
}
