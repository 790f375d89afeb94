//! Reading, writing and merging optical-data tables.
//!
//! Files are CSV with a mandatory header naming the three columns in order:
//!
//! | schema      | header              |
//! |-------------|---------------------|
//! | `nk`        | `omega_eV,n,k`      |
//! | `eps`       | `omega_eV,eps1,eps2`|
//! | `lambda_nk` | `lambda_um,n,k`     |
//!
//! Lines starting with `#` are comments. LF and CRLF line endings are both
//! accepted. Wavelengths convert to photon energy through
//! `omega[eV] = 1.239841984 / lambda[um]`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::data::{OpticalDataset, OpticalSample};
use crate::error::{Error, Result};
use crate::models::{gold_interband_oscillators, DrudeParams, LorentzOscillator, OscillatorModel};
use crate::units::{Frequency, HC_EV_UM};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileSchema {
    Nk,
    Eps,
    LambdaNk,
}

impl FileSchema {
    pub fn header(&self) -> [&'static str; 3] {
        match self {
            FileSchema::Nk => ["omega_eV", "n", "k"],
            FileSchema::Eps => ["omega_eV", "eps1", "eps2"],
            FileSchema::LambdaNk => ["lambda_um", "n", "k"],
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "nk" => Ok(FileSchema::Nk),
            "eps" => Ok(FileSchema::Eps),
            "lambda_nk" => Ok(FileSchema::LambdaNk),
            _ => Err(Error::Unknown {
                kind: "file schema",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FileSchema::Nk => "nk",
            FileSchema::Eps => "eps",
            FileSchema::LambdaNk => "lambda_nk",
        }
    }

    fn sample(&self, a: f64, b: f64, c: f64) -> Result<OpticalSample> {
        let freq = |w: f64| Frequency::try_ev(w).ok_or_else(|| Error::invalid(format!("frequency must be finite and >= 0, got {w}")));
        match self {
            FileSchema::Nk => OpticalSample::new(freq(a)?, b, c),
            FileSchema::Eps => OpticalSample::from_eps(freq(a)?, Complex64::new(b, c)),
            FileSchema::LambdaNk => {
                if !(a > 0.0) || !a.is_finite() {
                    return Err(Error::invalid(format!("wavelength must be > 0, got {a}")));
                }
                OpticalSample::new(freq(HC_EV_UM / a)?, b, c)
            }
        }
    }
}

/// Reads a dataset from `path`; the file stem becomes the label.
pub fn load_dataset(path: &Path, schema: FileSchema) -> Result<OpticalDataset> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_dataset(File::open(path)?, schema, &path.display().to_string(), &label)
}

/// Parses a table from any reader. `origin` names the source in errors.
pub fn parse_dataset<R: Read>(reader: R, schema: FileSchema, origin: &str, label: &str) -> Result<OpticalDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let malformed = |line: u64, reason: String| Error::MalformedRow {
        path: origin.to_string(),
        line,
        reason,
    };

    let mut header_seen = false;
    let mut samples = Vec::new();
    let mut seen: HashMap<u64, u64> = HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            malformed(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if !header_seen {
            let found: Vec<&str> = rec.iter().map(|f| f.trim_start_matches('\u{feff}')).collect();
            let expected = schema.header();
            if found != expected {
                return Err(Error::BadHeader {
                    path: origin.to_string(),
                    expected: expected.join(","),
                    found: found.join(","),
                });
            }
            header_seen = true;
            continue;
        }
        if rec.len() != 3 {
            return Err(malformed(line, format!("expected 3 columns, found {}", rec.len())));
        }
        let mut v = [0.0; 3];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field
                .parse::<f64>()
                .map_err(|_| malformed(line, format!("cannot parse `{field}` as a number")))?;
        }
        let s = schema
            .sample(v[0], v[1], v[2])
            .map_err(|e| malformed(line, e.to_string()))?;
        if let Some(first) = seen.insert(s.omega.value().to_bits(), line) {
            return Err(malformed(
                line,
                format!("duplicate frequency {} eV (first on line {first})", s.omega.value()),
            ));
        }
        samples.push(s);
    }
    if !header_seen {
        return Err(Error::BadHeader {
            path: origin.to_string(),
            expected: schema.header().join(","),
            found: String::new(),
        });
    }
    OpticalDataset::new(samples, label, format!("{origin} ({})", schema.name()))
}

/// Writes `data` in the `nk` schema. Values use the shortest decimal form
/// that reads back to the same `f64`.
pub fn write_dataset<W: Write>(data: &OpticalDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(FileSchema::Nk.header()).map_err(io)?;
    for s in data.samples() {
        w.write_record([s.omega.value().to_string(), s.n.to_string(), s.k.to_string()])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_dataset(data: &OpticalDataset, path: &Path) -> Result<()> {
    write_dataset(data, File::create(path)?)
}

/// Result of [`merge_datasets`].
#[derive(Debug, Clone, PartialEq)]
pub struct MergeOutcome {
    pub dataset: OpticalDataset,
    pub warnings: Vec<String>,
}

/// Unites `sets` in priority order. Samples of a later set that fall inside
/// the frequency range `[omega_min, omega_max]` of an earlier set are
/// dropped; samples in any half-open exclusion interval `[lo, hi)` are
/// dropped too. The source metadata lists, for runs of consecutive merged
/// sample indices, the label they came from.
pub fn merge_datasets(sets: &[OpticalDataset], exclusions: &[(Frequency, Frequency)]) -> Result<MergeOutcome> {
    if sets.is_empty() {
        return Err(Error::EmptyMerge);
    }
    let mut warnings = Vec::new();
    let mut covered: Vec<(Frequency, Frequency)> = Vec::new();
    let mut tagged: Vec<(OpticalSample, usize)> = Vec::new();
    for (idx, set) in sets.iter().enumerate() {
        let mut overlapped = 0;
        for s in set.samples() {
            if covered.iter().any(|(lo, hi)| s.omega >= *lo && s.omega <= *hi) {
                overlapped += 1;
                continue;
            }
            if exclusions.iter().any(|(lo, hi)| s.omega >= *lo && s.omega < *hi) {
                continue;
            }
            tagged.push((*s, idx));
        }
        if overlapped > 0 {
            let msg = format!(
                "{overlapped} samples of `{}` overlap earlier datasets and were dropped",
                set.label()
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
        covered.push((set.omega_min(), set.omega_max()));
    }
    if tagged.is_empty() {
        return Err(Error::EmptyMerge);
    }
    tagged.sort_by(|a, b| a.0.omega.value().total_cmp(&b.0.omega.value()));

    let mut runs: Vec<String> = Vec::new();
    let mut start = 0;
    for i in 1..=tagged.len() {
        if i == tagged.len() || tagged[i].1 != tagged[start].1 {
            runs.push(format!("{}-{}:{}", start, i - 1, sets[tagged[start].1].label()));
            start = i;
        }
    }
    let label = sets.iter().map(|s| s.label()).collect::<Vec<_>>().join("+");
    let dataset = OpticalDataset::new(tagged.into_iter().map(|(s, _)| s).collect(), label, runs.join(";"))?;
    Ok(MergeOutcome { dataset, warnings })
}

/// Named generators for synthetic fixtures.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticPreset {
    /// Drude gold, 9 eV and 35 meV.
    DrudeGold,
    /// Drude gold plus two interband oscillators.
    DrudeLorentzGold,
    Custom {
        drude: DrudeParams,
        oscillators: Vec<LorentzOscillator>,
    },
}

impl SyntheticPreset {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "drude-gold" => Ok(SyntheticPreset::DrudeGold),
            "drude-lorentz-gold" => Ok(SyntheticPreset::DrudeLorentzGold),
            _ => Err(Error::Unknown {
                kind: "synthetic preset",
                name: name.to_string(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SyntheticPreset::DrudeGold => "drude-gold",
            SyntheticPreset::DrudeLorentzGold => "drude-lorentz-gold",
            SyntheticPreset::Custom { .. } => "custom",
        }
    }

    pub fn model(&self) -> OscillatorModel {
        match self {
            SyntheticPreset::DrudeGold => OscillatorModel {
                drude: Some(DrudeParams::gold()),
                oscillators: Vec::new(),
            },
            SyntheticPreset::DrudeLorentzGold => OscillatorModel {
                drude: Some(DrudeParams::gold()),
                oscillators: gold_interband_oscillators(),
            },
            SyntheticPreset::Custom { drude, oscillators } => OscillatorModel {
                drude: Some(*drude),
                oscillators: oscillators.clone(),
            },
        }
    }

    pub fn dataset(&self, grid: &[Frequency]) -> Result<OpticalDataset> {
        self.model().tabulate(grid, self.name())
    }
}

/// Tabulates `preset` on `grid` and writes it to `path` in the `nk` schema.
pub fn emit_synthetic(preset: &SyntheticPreset, grid: &[Frequency], path: &Path) -> Result<OpticalDataset> {
    let d = preset.dataset(grid)?;
    save_dataset(&d, path)?;
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, schema: FileSchema) -> Result<OpticalDataset> {
        parse_dataset(text.as_bytes(), schema, "mem", "mem")
    }

    #[test]
    fn three_rows_rejected() {
        let r = parse("omega_eV,n,k\n1,1,1\n2,1,1\n3,1,1\n", FileSchema::Nk);
        assert!(matches!(r, Err(Error::TooFewSamples { min: 4, got: 3 })));
    }

    #[test]
    fn crlf_and_comments() {
        let text = "# gold\r\nomega_eV,n,k\r\n1,0.2,5\r\n# mid\r\n2,0.3,4\r\n3,0.4,3\r\n4,0.5,2\r\n";
        let d = parse(text, FileSchema::Nk).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.samples()[1].n, 0.3);
    }

    #[test]
    fn errors_name_the_line() {
        let text = "omega_eV,n,k\n1,1,1\n2,abc,1\n";
        match parse(text, FileSchema::Nk) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse("omega_eV,n,k\n1,1,1\n2,-1,1\n", FileSchema::Nk) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse("omega_eV,n,k\n1,1,1\n2,1,-0.5\n", FileSchema::Nk) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse("omega_eV,n,k\n1,1,1\n2,1,1\n1,2,2\n", FileSchema::Nk) {
            Err(Error::MalformedRow { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("w,n,k\n1,1,1\n", FileSchema::Nk), Err(Error::BadHeader { .. })));
    }

    #[test]
    fn eps_row_round_trips() {
        let text = "omega_eV,eps1,eps2\n1.0,-79.9,1.1\n2,-19,0.2\n3,-8,0.1\n4,-4,0.05\n";
        let d = parse(text, FileSchema::Eps).unwrap();
        let e = d.samples()[0].eps();
        assert!((e - Complex64::new(-79.9, 1.1)).norm() < 1e-12);
    }

    #[test]
    fn wavelength_conversion() {
        let text = "lambda_um,n,k\n1.2399,1,1\n2,1,1\n3,1,1\n4,1,1\n";
        let d = parse(text, FileSchema::LambdaNk).unwrap();
        assert!((d.omega_max().value() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(SyntheticPreset::from_name("silver"), Err(Error::Unknown { .. })));
        assert!(FileSchema::from_name("xyz").is_err());
        assert_eq!(FileSchema::from_name("LAMBDA_NK").unwrap(), FileSchema::LambdaNk);
    }
}
