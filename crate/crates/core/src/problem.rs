//! The coating design problem: codes are decoded into stacks and scored by
//! their figure of merit on a fixed spectral grid.

use num_complex::Complex64;

use crate::encoding::{decode, EncodingError, MaterialPalette, StructureCode};
use crate::fitness::FitnessError;
use crate::optics::{
    bundled_solar, fom_from_transmittance, layer_matrix, response_from_matrix, FomValue, LayerStack, OpticsError,
    Response, SpectralGrid, FITNESS_SCALE,
};

pub const DEFAULT_THICKNESS_NM: f64 = 100.0;
pub const DEFAULT_BAND_NM: (f64, f64) = (300.0, 2500.0);
pub const DEFAULT_STEP_NM: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct TrcProblem {
    palette: MaterialPalette,
    thicknesses_nm: Vec<f64>,
    grid: SpectralGrid,
    ambient_n: f64,
    substrate_n: f64,
    // matrices[layer][label][grid point]: characteristic matrix, row-major
    matrices: Vec<Vec<Vec<[Complex64; 4]>>>,
}

impl TrcProblem {
    pub fn new(
        palette: MaterialPalette,
        thicknesses_nm: Vec<f64>,
        grid: SpectralGrid,
        ambient_n: f64,
        substrate_n: f64,
    ) -> Result<Self, EncodingError> {
        if thicknesses_nm.is_empty() {
            return Err(OpticsError::InvalidStack("a stack needs at least one layer".into()).into());
        }
        let indices = palette
            .materials()
            .iter()
            .map(|m| {
                grid.wavelengths()
                    .iter()
                    .map(|&w| m.nk(w).map(|(n, k)| Complex64::new(n, -k)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut problem = Self {
            palette,
            thicknesses_nm,
            grid,
            ambient_n,
            substrate_n,
            matrices: Vec::new(),
        };
        // Validates thicknesses and media once up front.
        problem.stack(&StructureCode::zeros(problem.code_length()))?;
        problem.matrices = problem
            .thicknesses_nm
            .iter()
            .map(|&d| {
                indices
                    .iter()
                    .map(|per_label| {
                        per_label
                            .iter()
                            .zip(problem.grid.wavelengths())
                            .map(|(&eta, &w)| layer_matrix(eta, d, w))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Ok(problem)
    }

    /// Bundled materials and solar model, 100 nm layers, 300–2500 nm at 5 nm, air on both sides.
    pub fn bundled(layers: usize) -> Self {
        let grid = SpectralGrid::uniform(&bundled_solar(), DEFAULT_BAND_NM.0, DEFAULT_BAND_NM.1, DEFAULT_STEP_NM)
            .expect("bundled grid");
        Self::new(
            MaterialPalette::bundled(),
            vec![DEFAULT_THICKNESS_NM; layers],
            grid,
            1.0,
            1.0,
        )
        .expect("bundled problem")
    }

    pub fn layers(&self) -> usize {
        self.thicknesses_nm.len()
    }

    pub fn code_length(&self) -> usize {
        self.layers() * self.palette.bits_per_layer()
    }

    /// `log2` of the number of distinct designs.
    pub fn search_space_bits(&self) -> usize {
        self.code_length()
    }

    pub fn palette(&self) -> &MaterialPalette {
        &self.palette
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn thicknesses(&self) -> &[f64] {
        &self.thicknesses_nm
    }

    pub fn stack(&self, code: &StructureCode) -> Result<LayerStack, EncodingError> {
        decode(code, &self.thicknesses_nm, &self.palette, self.ambient_n, self.substrate_n)
    }

    /// Per-grid-point response of the decoded stack.
    pub fn spectrum(&self, code: &StructureCode) -> Result<Vec<(f64, Response)>, EncodingError> {
        let labels = self.palette.labels(code)?;
        if labels.len() != self.layers() {
            return Err(EncodingError::ThicknessCount {
                layers: labels.len(),
                thicknesses: self.layers(),
            });
        }
        let (n0, ns) = (self.ambient_n, self.substrate_n);
        self.grid
            .wavelengths()
            .iter()
            .enumerate()
            .map(|(g, &w)| {
                let one = Complex64::new(1.0, 0.0);
                let zero = Complex64::new(0.0, 0.0);
                let mut m = [one, zero, zero, one];
                for (layer, &label) in labels.iter().enumerate() {
                    let l = &self.matrices[layer][label][g];
                    m = [
                        m[0] * l[0] + m[1] * l[2],
                        m[0] * l[1] + m[1] * l[3],
                        m[2] * l[0] + m[3] * l[2],
                        m[2] * l[1] + m[3] * l[3],
                    ];
                }
                let r = response_from_matrix(m, w, n0, ns).map_err(EncodingError::from)?;
                Ok((w, r))
            })
            .collect()
    }

    pub fn fom(&self, code: &StructureCode) -> Result<FomValue, EncodingError> {
        let t: Vec<f64> = self.spectrum(code)?.into_iter().map(|(_, r)| r.transmittance).collect();
        Ok(fom_from_transmittance(&self.grid, &t))
    }

    /// `−100 × FOM`.
    pub fn fitness(&self, code: &StructureCode) -> Result<f64, FitnessError> {
        self.fom(code)
            .map(|f| FITNESS_SCALE * f.value())
            .map_err(|e| FitnessError(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::fom;

    #[test]
    fn fast_path_matches_generic_fom() {
        let problem = TrcProblem::bundled(3);
        for s in ["000000", "101101", "111001", "011011"] {
            let code: StructureCode = s.parse().unwrap();
            let fast = problem.fom(&code).unwrap().value();
            let slow = fom(&problem.stack(&code).unwrap(), problem.grid()).unwrap().value();
            assert!((fast - slow).abs() <= 1e-12 * slow.abs().max(1.0), "{s}: {fast} vs {slow}");
        }
    }

    #[test]
    fn wrong_length_code_is_rejected() {
        let problem = TrcProblem::bundled(2);
        assert!(problem.fom(&"101010".parse().unwrap()).is_err());
        assert!(problem.fitness(&"101".parse().unwrap()).is_err());
    }
}
