use std::collections::HashMap;
use std::io::{Read, Write};

use super::SurrogateError;
use crate::encoding::StructureCode;

pub const DATASET_HEADER: [&str; 2] = ["code", "fom"];

/// Labeled structures in insertion order. Codes are unique and share one length.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    codes: Vec<StructureCode>,
    foms: Vec<f64>,
    index: HashMap<StructureCode, usize>,
}

impl LabeledDataset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_rows(rows: impl IntoIterator<Item = (StructureCode, f64)>) -> Result<Self, SurrogateError> {
        let mut data = Self::new();
        for (code, fom) in rows {
            data.insert(code, fom)?;
        }
        Ok(data)
    }

    pub fn insert(&mut self, code: StructureCode, fom: f64) -> Result<(), SurrogateError> {
        if !fom.is_finite() {
            return Err(SurrogateError::InvalidData(format!("non-finite label {fom} for {code}")));
        }
        if let Some(first) = self.codes.first() {
            if first.len() != code.len() {
                return Err(SurrogateError::Shape {
                    expected: first.len(),
                    found: code.len(),
                });
            }
        }
        if self.index.contains_key(&code) {
            return Err(SurrogateError::Duplicate(code.to_string()));
        }
        self.index.insert(code.clone(), self.codes.len());
        self.codes.push(code);
        self.foms.push(fom);
        Ok(())
    }

    pub fn contains(&self, code: &StructureCode) -> bool {
        self.index.contains_key(code)
    }

    /// Label of `code`, if present.
    pub fn get(&self, code: &StructureCode) -> Option<f64> {
        self.index.get(code).map(|&i| self.foms[i])
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Code length, or `None` when empty.
    pub fn code_length(&self) -> Option<usize> {
        self.codes.first().map(StructureCode::len)
    }

    pub fn codes(&self) -> &[StructureCode] {
        &self.codes
    }

    pub fn foms(&self) -> &[f64] {
        &self.foms
    }

    pub fn rows(&self) -> impl Iterator<Item = (&StructureCode, f64)> {
        self.codes.iter().zip(self.foms.iter().copied())
    }

    /// Row with the smallest label; the earliest wins ties.
    pub fn best(&self) -> Option<(&StructureCode, f64)> {
        self.rows().fold(None, |acc, row| match acc {
            Some((_, f)) if f <= row.1 => acc,
            _ => Some(row),
        })
    }

    /// Row with the largest label; the earliest wins ties.
    pub fn worst(&self) -> Option<(&StructureCode, f64)> {
        self.rows().fold(None, |acc, row| match acc {
            Some((_, f)) if f >= row.1 => acc,
            _ => Some(row),
        })
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self, SurrogateError> {
        Self::from_rows(indices.iter().map(|&i| (self.codes[i].clone(), self.foms[i])))
    }

    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        self.codes.iter().map(StructureCode::as_features).collect()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(DATASET_HEADER)?;
        for (code, fom) in self.rows() {
            w.write_record([code.to_string(), fom.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, SurrogateError> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header = r.headers().map_err(|e| SurrogateError::Parse { line: 1, message: e.to_string() })?;
        if header.iter().collect::<Vec<_>>() != DATASET_HEADER {
            return Err(SurrogateError::Parse {
                line: 1,
                message: format!("expected header `{}`", DATASET_HEADER.join(",")),
            });
        }
        let mut data = Self::new();
        for (i, record) in r.records().enumerate() {
            let line = i + 2;
            let parse_err = |message: String| SurrogateError::Parse { line, message };
            let record = record.map_err(|e| parse_err(e.to_string()))?;
            if record.len() != 2 {
                return Err(parse_err(format!("expected 2 fields, found {}", record.len())));
            }
            let code: StructureCode = record[0].parse().map_err(|e| parse_err(format!("{e}")))?;
            let fom: f64 = record[1].parse().map_err(|_| parse_err(format!("invalid number `{}`", &record[1])))?;
            data.insert(code, fom).map_err(|e| parse_err(e.to_string()))?;
        }
        Ok(data)
    }
}
