//! Bit-string codec for layer stacks: each layer is a fixed-width label
//! selecting one material from a palette, most significant bit first, layers
//! ordered from the incidence side.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::optics::{bundled_material, Layer, LayerStack, MaterialTable, OpticsError, BUNDLED_MATERIALS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("invalid bit string: {0}")]
    InvalidBits(String),

    #[error("code length {length} is not a multiple of {bits_per_layer} bits per layer")]
    Shape { length: usize, bits_per_layer: usize },

    #[error("{layers} layers but {thicknesses} thicknesses")]
    ThicknessCount { layers: usize, thicknesses: usize },

    #[error("material `{0}` has no label in the palette")]
    UnlabeledMaterial(String),

    #[error("cannot encode an empty stack")]
    EmptyStack,

    #[error("invalid palette: {0}")]
    InvalidPalette(String),

    #[error(transparent)]
    Optics(#[from] OpticsError),
}

/// A vector of bits, each stored as 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StructureCode(Vec<u8>);

impl StructureCode {
    pub fn from_bits(bits: Vec<u8>) -> Result<Self, EncodingError> {
        if let Some(i) = bits.iter().position(|&b| b > 1) {
            return Err(EncodingError::InvalidBits(format!("bit {i} is {}, expected 0 or 1", bits[i])));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    /// The `index`-th code of length `len` in lexicographic order (bit 0 is the most significant).
    pub fn from_index(index: u64, len: usize) -> Self {
        assert!(len <= 64, "index codes are limited to 64 bits");
        assert!(len == 64 || index >> len == 0, "index {index} does not fit in {len} bits");
        Self((0..len).map(|i| ((index >> (len - 1 - i)) & 1) as u8).collect())
    }

    pub fn to_index(&self) -> u64 {
        assert!(self.0.len() <= 64, "index codes are limited to 64 bits");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn set(&mut self, i: usize, bit: u8) {
        assert!(bit <= 1);
        self.0[i] = bit;
    }

    pub fn as_features(&self) -> Vec<f64> {
        self.0.iter().map(|&b| b as f64).collect()
    }
}

impl fmt::Display for StructureCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for StructureCode {
    type Err = EncodingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(EncodingError::InvalidBits("empty bit string".into()));
        }
        s.chars()
            .enumerate()
            .map(|(i, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(EncodingError::InvalidBits(format!("character {i} is `{other}`"))),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Self)
    }
}

impl Serialize for StructureCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StructureCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Materials addressed by label value; the label width is `log2(len)` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialPalette {
    materials: Vec<Arc<MaterialTable>>,
    bits_per_layer: usize,
}

impl MaterialPalette {
    pub fn new(materials: Vec<Arc<MaterialTable>>) -> Result<Self, EncodingError> {
        let n = materials.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(EncodingError::InvalidPalette(format!(
                "need a power-of-two number of materials (at least 2), got {n}"
            )));
        }
        for (i, m) in materials.iter().enumerate() {
            if materials[..i].iter().any(|o| o.name() == m.name()) {
                return Err(EncodingError::InvalidPalette(format!("duplicate material `{}`", m.name())));
            }
        }
        Ok(Self {
            bits_per_layer: n.trailing_zeros() as usize,
            materials,
        })
    }

    /// `00 = SiO2, 01 = Si3N4, 10 = TiO2, 11 = Al2O3` with the bundled tables.
    pub fn bundled() -> Self {
        Self::new(
            BUNDLED_MATERIALS
                .iter()
                .map(|name| Arc::new(bundled_material(name).expect("bundled")))
                .collect(),
        )
        .expect("bundled palette is valid")
    }

    pub fn bits_per_layer(&self) -> usize {
        self.bits_per_layer
    }

    pub fn materials(&self) -> &[Arc<MaterialTable>] {
        &self.materials
    }

    pub fn material(&self, label: usize) -> &Arc<MaterialTable> {
        &self.materials[label]
    }

    pub fn label_of(&self, name: &str) -> Option<usize> {
        self.materials.iter().position(|m| m.name() == name)
    }

    pub fn layer_count(&self, code: &StructureCode) -> Result<usize, EncodingError> {
        if code.is_empty() || !code.len().is_multiple_of(self.bits_per_layer) {
            return Err(EncodingError::Shape {
                length: code.len(),
                bits_per_layer: self.bits_per_layer,
            });
        }
        Ok(code.len() / self.bits_per_layer)
    }

    /// Label value of every layer.
    pub fn labels(&self, code: &StructureCode) -> Result<Vec<usize>, EncodingError> {
        self.layer_count(code)?;
        Ok(code
            .bits()
            .chunks(self.bits_per_layer)
            .map(|chunk| chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
            .collect())
    }

    pub fn names(&self, code: &StructureCode) -> Result<Vec<&str>, EncodingError> {
        Ok(self
            .labels(code)?
            .into_iter()
            .map(|l| self.materials[l].name())
            .collect())
    }
}

pub fn decode(
    code: &StructureCode,
    thicknesses_nm: &[f64],
    palette: &MaterialPalette,
    ambient_n: f64,
    substrate_n: f64,
) -> Result<LayerStack, EncodingError> {
    let labels = palette.labels(code)?;
    if labels.len() != thicknesses_nm.len() {
        return Err(EncodingError::ThicknessCount {
            layers: labels.len(),
            thicknesses: thicknesses_nm.len(),
        });
    }
    let layers = labels
        .into_iter()
        .zip(thicknesses_nm)
        .map(|(label, &thickness_nm)| Layer {
            material: palette.material(label).clone(),
            thickness_nm,
        })
        .collect();
    Ok(LayerStack::new(layers, ambient_n, substrate_n)?)
}

pub fn encode(stack: &LayerStack, palette: &MaterialPalette) -> Result<StructureCode, EncodingError> {
    if stack.layers().is_empty() {
        return Err(EncodingError::EmptyStack);
    }
    let width = palette.bits_per_layer();
    let mut bits = Vec::with_capacity(stack.layers().len() * width);
    for layer in stack.layers() {
        let name = layer.material.name();
        let label = palette
            .label_of(name)
            .ok_or_else(|| EncodingError::UnlabeledMaterial(name.to_string()))?;
        bits.extend((0..width).rev().map(|shift| ((label >> shift) & 1) as u8));
    }
    Ok(StructureCode(bits))
}
