use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{FmModel, RandomForest, Surrogate, SurrogateError};
use crate::encoding::StructureCode;

pub const MODEL_FORMAT: &str = "qga-photonics-surrogate";
pub const MODEL_VERSION: u32 = 1;

/// Any trained surrogate, persisted as tagged JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum SurrogateModel {
    RandomForest(RandomForest),
    FactorizationMachine(FmModel),
}

#[derive(Serialize)]
struct Envelope<M> {
    format: String,
    version: u32,
    #[serde(flatten)]
    body: M,
}

impl SurrogateModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&Envelope {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            body: self,
        })
        .expect("models serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SurrogateError> {
        let json_err = |e: serde_json::Error| SurrogateError::Parse {
            line: e.line(),
            message: e.to_string(),
        };
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(json_err)?;
        let object = value
            .as_object_mut()
            .ok_or_else(|| SurrogateError::Model("expected a JSON object".into()))?;
        match object.remove("format") {
            Some(serde_json::Value::String(f)) if f == MODEL_FORMAT => {}
            other => return Err(SurrogateError::Model(format!("unknown format {other:?}"))),
        }
        match object.remove("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_VERSION) => {}
            other => {
                return Err(SurrogateError::Model(format!(
                    "unsupported version {other:?} (expected {MODEL_VERSION})"
                )))
            }
        }
        let model: Self = serde_json::from_value(value).map_err(json_err)?;
        match &model {
            Self::RandomForest(m) => m.validate()?,
            Self::FactorizationMachine(m) => m.validate()?,
        }
        Ok(model)
    }

    pub fn save<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        writer.write_all(self.to_json().as_bytes())?;
        writer.write_all(b"\n")
    }

    pub fn load<R: Read>(mut reader: R) -> Result<Self, SurrogateError> {
        let mut text = String::new();
        reader
            .read_to_string(&mut text)
            .map_err(|e| SurrogateError::Parse { line: 0, message: e.to_string() })?;
        Self::from_json(&text)
    }

    fn inner(&self) -> &dyn Surrogate {
        match self {
            Self::RandomForest(m) => m,
            Self::FactorizationMachine(m) => m,
        }
    }
}

impl Surrogate for SurrogateModel {
    fn code_length(&self) -> usize {
        self.inner().code_length()
    }

    fn predict(&self, code: &StructureCode) -> Result<f64, SurrogateError> {
        self.inner().predict(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::{FmConfig, ForestConfig, LabeledDataset};

    fn data() -> LabeledDataset {
        LabeledDataset::from_rows((0..40u64).map(|i| (StructureCode::from_index(i * 5, 8), (i as f64 * 0.731).sin() + 1.0))).unwrap()
    }

    fn assert_round_trip(model: SurrogateModel) {
        let text = model.to_json();
        let back = SurrogateModel::from_json(&text).unwrap();
        for i in 0..256 {
            let code = StructureCode::from_index(i, 8);
            assert_eq!(model.predict(&code).unwrap().to_bits(), back.predict(&code).unwrap().to_bits());
        }
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn forest_round_trips_exactly() {
        let cfg = ForestConfig { tree_count: 10, ..ForestConfig::default() };
        assert_round_trip(SurrogateModel::RandomForest(RandomForest::train(&data(), &cfg).unwrap()));
    }

    #[test]
    fn fm_round_trips_exactly() {
        let cfg = FmConfig { epochs: 20, ..FmConfig::default() };
        assert_round_trip(SurrogateModel::FactorizationMachine(FmModel::train(&data(), &cfg).unwrap()));
    }

    #[test]
    fn rejects_foreign_or_corrupt_files() {
        let fm = SurrogateModel::FactorizationMachine(FmModel::zeros(2, 1));
        let text = fm.to_json();
        assert!(SurrogateModel::from_json(&text.replace("\"version\":1", "\"version\":2")).is_err());
        assert!(SurrogateModel::from_json(&text.replace(MODEL_FORMAT, "other")).is_err());
        assert!(SurrogateModel::from_json("{").is_err());
        let bad_tree = r#"{"format":"qga-photonics-surrogate","version":1,"kind":"random_forest","model":{"code_length":2,"trees":[{"code_length":2,"nodes":[{"type":"split","feature":0,"left":0,"right":0}]}]}}"#;
        assert!(matches!(SurrogateModel::from_json(bad_tree), Err(SurrogateError::Model(_))));
    }
}
