use std::io::{Read, Write};

use super::GenerationRecord;
use crate::encoding::StructureCode;

pub const TRACE_HEADER: [&str; 5] = [
    "generation",
    "best_fitness",
    "mean_fitness",
    "alltime_best_fitness",
    "alltime_best_code",
];

pub fn write_trace_csv<W: Write>(writer: W, trace: &[GenerationRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TRACE_HEADER)?;
    for r in trace {
        w.write_record([
            r.generation.to_string(),
            r.best_fitness.to_string(),
            r.mean_fitness.to_string(),
            r.alltime_best_fitness.to_string(),
            r.alltime_best_code.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace back; evaluation counts are not part of the file and come back as 0.
pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<GenerationRecord>, String> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| e.to_string())?;
    if headers.iter().ne(TRACE_HEADER) {
        return Err(format!("unexpected trace header `{}`", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let field = |j: usize| rec.get(j).ok_or_else(|| format!("row {}: missing field {j}", i + 2));
        let num = |j: usize| -> Result<f64, String> {
            field(j)?.parse().map_err(|_| format!("row {}: field {j} is not a number", i + 2))
        };
        out.push(GenerationRecord {
            generation: field(0)?.parse().map_err(|_| format!("row {}: bad generation", i + 2))?,
            best_fitness: num(1)?,
            mean_fitness: num(2)?,
            alltime_best_fitness: num(3)?,
            alltime_best_code: field(4)?
                .parse::<StructureCode>()
                .map_err(|e| format!("row {}: {e}", i + 2))?,
            evaluations: 0,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_schema_and_round_trip() {
        let trace = vec![GenerationRecord {
            generation: 0,
            best_fitness: -171.5,
            mean_fitness: -250.25,
            alltime_best_fitness: -171.5,
            alltime_best_code: "101000100111".parse().unwrap(),
            evaluations: 0,
        }];
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "generation,best_fitness,mean_fitness,alltime_best_fitness,alltime_best_code\n0,-171.5,-250.25,-171.5,101000100111\n"
        );
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), trace);
    }
}
