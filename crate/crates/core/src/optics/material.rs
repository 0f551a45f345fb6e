use std::io::Read;

use super::OpticsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NkSample {
    pub wavelength_nm: f64,
    pub n: f64,
    pub k: f64,
}

/// Tabulated optical constants of one material.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialTable {
    name: String,
    samples: Vec<NkSample>,
}

impl MaterialTable {
    pub fn new(name: impl Into<String>, samples: Vec<NkSample>) -> Result<Self, OpticsError> {
        let name = name.into();
        let invalid = |message: String| OpticsError::InvalidTable {
            name: name.clone(),
            message,
        };
        if samples.len() < 2 {
            return Err(invalid(format!("need at least 2 samples, got {}", samples.len())));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.wavelength_nm.is_finite() && s.n.is_finite() && s.k.is_finite()) {
                return Err(invalid(format!("sample {i} is not finite")));
            }
            if s.n <= 0.0 {
                return Err(invalid(format!("sample {i}: n must be positive, got {}", s.n)));
            }
            if s.k < 0.0 {
                return Err(invalid(format!("sample {i}: k must be non-negative, got {}", s.k)));
            }
        }
        if let Some(i) = samples
            .windows(2)
            .position(|w| w[1].wavelength_nm <= w[0].wavelength_nm)
        {
            return Err(invalid(format!(
                "wavelengths must be strictly increasing (sample {})",
                i + 1
            )));
        }
        Ok(Self { name, samples })
    }

    /// Parses a `wavelength_nm,n,k` CSV file.
    pub fn from_csv<R: Read>(name: impl Into<String>, reader: R) -> Result<Self, OpticsError> {
        let rows = read_numeric_csv(reader, &["wavelength_nm", "n", "k"])?;
        let samples = rows
            .into_iter()
            .map(|r| NkSample {
                wavelength_nm: r[0],
                n: r[1],
                k: r[2],
            })
            .collect();
        Self::new(name, samples)
    }

    pub fn from_csv_str(name: impl Into<String>, text: &str) -> Result<Self, OpticsError> {
        Self::from_csv(name, text.as_bytes())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[NkSample] {
        &self.samples
    }

    pub fn span(&self) -> (f64, f64) {
        (
            self.samples[0].wavelength_nm,
            self.samples[self.samples.len() - 1].wavelength_nm,
        )
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let (min, max) = self.span();
        min <= lo && hi <= max
    }

    pub fn nk(&self, wavelength_nm: f64) -> Result<(f64, f64), OpticsError> {
        interpolate_nk(self, wavelength_nm)
    }
}

/// Linear interpolation of `(n, k)`; exact at tabulated wavelengths.
pub fn interpolate_nk(material: &MaterialTable, wavelength_nm: f64) -> Result<(f64, f64), OpticsError> {
    let (min, max) = material.span();
    if !(wavelength_nm >= min && wavelength_nm <= max) {
        return Err(OpticsError::OutOfRange {
            material: material.name.clone(),
            wavelength_nm,
            min,
            max,
        });
    }
    let s = &material.samples;
    let hi = s.partition_point(|p| p.wavelength_nm < wavelength_nm);
    if s[hi].wavelength_nm == wavelength_nm {
        return Ok((s[hi].n, s[hi].k));
    }
    let (p0, p1) = (s[hi - 1], s[hi]);
    let t = (wavelength_nm - p0.wavelength_nm) / (p1.wavelength_nm - p0.wavelength_nm);
    Ok((p0.n + t * (p1.n - p0.n), p0.k + t * (p1.k - p0.k)))
}

/// Reads a CSV with an exact header and all-numeric cells.
pub(crate) fn read_numeric_csv<R: Read>(reader: R, header: &[&str]) -> Result<Vec<Vec<f64>>, OpticsError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let found = rdr.headers().map_err(|e| parse_error(1, e.to_string()))?;
    if found.iter().ne(header.iter().copied()) {
        return Err(parse_error(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| parse_error(line, format!("`{cell}` is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != header.len() {
            return Err(parse_error(line, format!("expected {} fields, found {}", header.len(), row.len())));
        }
        rows.push(row);
    }
    Ok(rows)
}

fn parse_error(line: u64, message: String) -> OpticsError {
    OpticsError::Parse { line, message }
}
