use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::encoding::StructureCode;

pub const ITERATIONS_HEADER: [&str; 15] = [
    "iteration",
    "proposed_code",
    "predicted_fom",
    "proposed_true_fom",
    "duplicate",
    "labeled_code",
    "labeled_fom",
    "dataset_size",
    "tmm_evaluations",
    "surrogate_evaluations",
    "generations",
    "warm_start_weight",
    "memory_corrupted",
    "best_true_fom",
    "best_code",
];

/// One pass of the loop. Counters are cumulative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// The optimizer's best code under the surrogate.
    pub proposed_code: StructureCode,
    pub predicted_fom: f64,
    pub proposed_true_fom: f64,
    /// The proposal was already labeled, so a random unlabeled code was added instead.
    pub duplicate: bool,
    pub labeled_code: StructureCode,
    pub labeled_fom: f64,
    pub dataset_size: usize,
    pub tmm_evaluations: u64,
    pub surrogate_evaluations: u64,
    /// Generations the optimizer ran this iteration.
    pub generations: usize,
    pub warm_start_weight: f64,
    pub memory_corrupted: bool,
    /// Lowest labeled figure of merit so far.
    pub best_true_fom: f64,
    pub best_code: StructureCode,
}

pub fn write_iterations_csv<W: Write>(writer: W, records: &[IterationRecord]) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(ITERATIONS_HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_iterations_csv<R: Read>(reader: R) -> Result<Vec<IterationRecord>, String> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().collect::<Vec<_>>() != ITERATIONS_HEADER {
        return Err(format!("expected header `{}`", ITERATIONS_HEADER.join(",")));
    }
    r.deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| format!("line {}: {e}", i + 2)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let code: StructureCode = "1001".parse().unwrap();
        let rec = IterationRecord {
            iteration: 0,
            proposed_code: code.clone(),
            predicted_fom: 1.25,
            proposed_true_fom: 1.5,
            duplicate: false,
            labeled_code: code.clone(),
            labeled_fom: 1.5,
            dataset_size: 26,
            tmm_evaluations: 26,
            surrogate_evaluations: 2500,
            generations: 100,
            warm_start_weight: 0.0,
            memory_corrupted: false,
            best_true_fom: 1.5,
            best_code: code,
        };
        let mut buf = Vec::new();
        write_iterations_csv(&mut buf, std::slice::from_ref(&rec)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), ITERATIONS_HEADER.join(","));
        assert_eq!(read_iterations_csv(text.as_bytes()).unwrap(), vec![rec]);
    }
}
