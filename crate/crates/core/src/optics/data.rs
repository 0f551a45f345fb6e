//! Reference data compiled into the library.
//!
//! Material tables are evaluated from published Sellmeier fits (fused silica,
//! Malitson 1965; silicon nitride, Luke et al. 2015; rutile ordinary ray,
//! DeVore 1951, with an approximate UV absorption edge; sapphire ordinary ray,
//! Malitson 1962). The solar table is a smooth clear-sky AM1.5G-style model
//! normalized to 1000 W/m² over 300–2500 nm, not the ASTM G173 table.
//! `tools/generate_reference_data.py` regenerates all of them.

use super::{MaterialTable, OpticsError, SolarSpectrum};

pub const BUNDLED_MATERIALS: [&str; 4] = ["SiO2", "Si3N4", "TiO2", "Al2O3"];

const SIO2: &str = include_str!("../../data/materials/SiO2.csv");
const SI3N4: &str = include_str!("../../data/materials/Si3N4.csv");
const TIO2: &str = include_str!("../../data/materials/TiO2.csv");
const AL2O3: &str = include_str!("../../data/materials/Al2O3.csv");
const SOLAR: &str = include_str!("../../data/am15g_model.csv");

pub fn bundled_material(name: &str) -> Option<MaterialTable> {
    let text = match name {
        "SiO2" => SIO2,
        "Si3N4" => SI3N4,
        "TiO2" => TIO2,
        "Al2O3" => AL2O3,
        _ => return None,
    };
    Some(MaterialTable::from_csv_str(name, text).expect("bundled material table is valid"))
}

pub fn bundled_solar() -> SolarSpectrum {
    SolarSpectrum::from_csv_str(SOLAR).expect("bundled solar table is valid")
}

pub(crate) fn require_bundled(name: &str) -> Result<MaterialTable, OpticsError> {
    bundled_material(name).ok_or_else(|| OpticsError::InvalidTable {
        name: name.to_string(),
        message: "no bundled table with this name; supply a file".into(),
    })
}
