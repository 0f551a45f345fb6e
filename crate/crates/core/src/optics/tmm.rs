//! Characteristic-matrix (transfer matrix) solver at normal incidence.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::material::MaterialTable;
use super::OpticsError;

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub material: Arc<MaterialTable>,
    pub thickness_nm: f64,
}

/// Layers ordered from the incidence side, between two semi-infinite media.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    layers: Vec<Layer>,
    ambient_n: f64,
    substrate_n: f64,
}

impl LayerStack {
    pub fn new(layers: Vec<Layer>, ambient_n: f64, substrate_n: f64) -> Result<Self, OpticsError> {
        if layers.is_empty() {
            return Err(OpticsError::InvalidStack("a stack needs at least one layer".into()));
        }
        if let Some(i) = layers
            .iter()
            .position(|l| !(l.thickness_nm.is_finite() && l.thickness_nm > 0.0))
        {
            return Err(OpticsError::InvalidStack(format!(
                "layer {i} thickness must be finite and positive, got {}",
                layers[i].thickness_nm
            )));
        }
        for (what, n) in [("ambient", ambient_n), ("substrate", substrate_n)] {
            if !(n.is_finite() && n > 0.0) {
                return Err(OpticsError::InvalidStack(format!("{what} index must be positive, got {n}")));
            }
        }
        Ok(Self {
            layers,
            ambient_n,
            substrate_n,
        })
    }

    /// Layers in air on both sides.
    pub fn in_air(layers: Vec<Layer>) -> Result<Self, OpticsError> {
        Self::new(layers, 1.0, 1.0)
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn ambient_n(&self) -> f64 {
        self.ambient_n
    }

    pub fn substrate_n(&self) -> f64 {
        self.substrate_n
    }

    /// Layer order reversed with ambient and substrate swapped.
    pub fn reversed(&self) -> Self {
        Self {
            layers: self.layers.iter().rev().cloned().collect(),
            ambient_n: self.substrate_n,
            substrate_n: self.ambient_n,
        }
    }

    pub fn complex_indices(&self, wavelength_nm: f64) -> Result<Vec<Complex64>, OpticsError> {
        self.layers
            .iter()
            .map(|l| l.material.nk(wavelength_nm).map(|(n, k)| Complex64::new(n, -k)))
            .collect()
    }

    pub fn thicknesses(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.thickness_nm).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Response {
    pub transmittance: f64,
    pub reflectance: f64,
}

impl Response {
    pub fn absorptance(&self) -> f64 {
        1.0 - self.transmittance - self.reflectance
    }
}

/// Characteristic matrix of one layer, row-major.
pub fn layer_matrix(eta: Complex64, thickness_nm: f64, wavelength_nm: f64) -> [Complex64; 4] {
    let i = Complex64::i();
    let delta = eta * (2.0 * PI * thickness_nm / wavelength_nm);
    let (c, s) = (delta.cos(), delta.sin());
    [c, i * s / eta, i * s * eta, c]
}

/// Response of a stack from its total characteristic matrix.
pub fn response_from_matrix(
    m: [Complex64; 4],
    wavelength_nm: f64,
    ambient_n: f64,
    substrate_n: f64,
) -> Result<Response, OpticsError> {
    let b = m[0] + m[1] * substrate_n;
    let c = m[2] + m[3] * substrate_n;
    let denom = b * ambient_n + c;
    if !(b.is_finite() && c.is_finite()) || denom.norm_sqr() == 0.0 || !denom.norm_sqr().is_finite() {
        return Err(OpticsError::Evaluation {
            wavelength_nm,
            message: "characteristic matrix overflowed; check thicknesses and extinction".into(),
        });
    }
    let r = (b * ambient_n - c) / denom;
    Ok(Response {
        transmittance: 4.0 * ambient_n * substrate_n / denom.norm_sqr(),
        reflectance: r.norm_sqr(),
    })
}

/// Transmittance and reflectance for layers with complex indices `n − ik`.
pub fn stack_response(
    indices: &[Complex64],
    thicknesses_nm: &[f64],
    wavelength_nm: f64,
    ambient_n: f64,
    substrate_n: f64,
) -> Result<Response, OpticsError> {
    debug_assert_eq!(indices.len(), thicknesses_nm.len());
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [one, zero, zero, one];
    for (&eta, &d) in indices.iter().zip(thicknesses_nm) {
        let l = layer_matrix(eta, d, wavelength_nm);
        m = [
            m[0] * l[0] + m[1] * l[2],
            m[0] * l[1] + m[1] * l[3],
            m[2] * l[0] + m[3] * l[2],
            m[2] * l[1] + m[3] * l[3],
        ];
    }
    response_from_matrix(m, wavelength_nm, ambient_n, substrate_n)
}

pub fn response(stack: &LayerStack, wavelength_nm: f64) -> Result<Response, OpticsError> {
    let indices = stack.complex_indices(wavelength_nm)?;
    stack_response(
        &indices,
        &stack.thicknesses(),
        wavelength_nm,
        stack.ambient_n,
        stack.substrate_n,
    )
}

pub fn transmittance(stack: &LayerStack, wavelength_nm: f64) -> Result<f64, OpticsError> {
    response(stack, wavelength_nm).map(|r| r.transmittance)
}

pub fn reflectance(stack: &LayerStack, wavelength_nm: f64) -> Result<f64, OpticsError> {
    response(stack, wavelength_nm).map(|r| r.reflectance)
}
