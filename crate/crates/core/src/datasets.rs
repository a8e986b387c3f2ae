//! Sensor trace ingestion, windowing and transform-domain sparsity.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::transform::{analyze, dct_synthesis_matrix, synthesize};

/// Column selector for delimited trace files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    /// Zero-based field index. A first row whose field does not parse is taken as a header.
    Index(usize),
    /// Header name; the first row must be a header.
    Name(String),
}

impl std::str::FromStr for Column {
    type Err = std::convert::Infallible;

    /// Digits select by index, anything else by header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(idx) => Column::Index(idx),
            Err(_) => Column::Name(s.to_owned()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedSeries {
    pub values: Vec<f64>,
    /// Data rows dropped because the selected field was empty, missing or not numeric.
    pub skipped_rows: usize,
}

fn parse_field(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn load_csv_trace(
    path: impl AsRef<Path>,
    column: &Column,
    delimiter: u8,
) -> Result<LoadedSeries> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Ingestion(format!("cannot open {}: {e}", path.display())))?;
    read_trace(file, column, delimiter, &path.display().to_string())
}

/// Like [`load_csv_trace`] over any reader; `label` names the source in messages.
pub fn read_trace(
    reader: impl std::io::Read,
    column: &Column,
    delimiter: u8,
    label: &str,
) -> Result<LoadedSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .delimiter(delimiter)
        .from_reader(reader);
    let mut records = rdr.records();

    let first = match records.next() {
        Some(rec) => rec.map_err(|e| Error::Ingestion(format!("{label}: {e}")))?,
        None => return Err(Error::Ingestion(format!("{label}: file is empty"))),
    };
    let (idx, first_value) = match column {
        Column::Name(name) => {
            let idx = first
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Ingestion(format!("{label}: no column named {name:?}")))?;
            (idx, None)
        }
        Column::Index(idx) => {
            if *idx >= first.len() {
                return Err(Error::Ingestion(format!(
                    "{label}: column {idx} out of range ({} fields)",
                    first.len()
                )));
            }
            (*idx, Some(first.get(*idx).and_then(parse_field)))
        }
    };

    let mut values = Vec::new();
    let mut skipped_rows = 0;
    // under Column::Index a non-numeric first row is a header, not a skipped row
    if let Some(Some(v)) = first_value {
        values.push(v);
    }
    for (line, rec) in records.enumerate() {
        let rec = rec.map_err(|e| Error::Ingestion(format!("{label}: {e}")))?;
        match rec.get(idx).and_then(parse_field) {
            Some(v) => values.push(v),
            None => {
                skipped_rows += 1;
                log::warn!(
                    "{label}: skipping row {} (column {idx} not numeric)",
                    line + 2
                );
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Ingestion(format!(
            "{label}: no numeric rows in column {idx}"
        )));
    }
    Ok(LoadedSeries {
        values,
        skipped_rows,
    })
}

/// A contiguous slice of readings.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceWindow {
    pub values: Array1<f64>,
    pub source_id: String,
    pub start_index: usize,
}

impl TraceWindow {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn window(
    series: &[f64],
    n: usize,
    start: usize,
    source_id: impl Into<String>,
) -> Result<TraceWindow> {
    if n == 0 {
        return Err(Error::invalid("window length must be positive"));
    }
    let end = start
        .checked_add(n)
        .filter(|&end| end <= series.len())
        .ok_or_else(|| {
            Error::invalid(format!(
                "window [{start}, {start}+{n}) exceeds series of length {}",
                series.len()
            ))
        })?;
    let values = Array1::from(series[start..end].to_vec());
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("window contains non-finite readings"));
    }
    Ok(TraceWindow {
        values,
        source_id: source_id.into(),
        start_index: start,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsityReport {
    pub coefficients: Array1<f64>,
    /// Entry `K` is the fraction of energy in coefficients `0..=K`.
    pub energy_prefix: Array1<f64>,
}

impl SparsityReport {
    /// `index,coefficient,cumulative_energy` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,coefficient,cumulative_energy\n");
        for (i, (c, e)) in self
            .coefficients
            .iter()
            .zip(&self.energy_prefix)
            .enumerate()
        {
            writeln!(out, "{i},{c:.9},{e:.6}").expect("write to string");
        }
        out
    }
}

pub fn sparsity_report(w: &TraceWindow, psi: &Array2<f64>) -> Result<SparsityReport> {
    let coefficients = analyze(w.values.view(), psi)?;
    let total: f64 = coefficients.iter().map(|c| c * c).sum();
    if total == 0.0 {
        return Err(Error::Degenerate(
            "all-zero window has no energy profile".into(),
        ));
    }
    let mut acc = 0.0;
    let energy_prefix = coefficients
        .iter()
        .map(|c| {
            acc += c * c;
            acc / total
        })
        .collect();
    Ok(SparsityReport {
        coefficients,
        energy_prefix,
    })
}

/// Deterministic synthetic traces standing in for the real datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fixture {
    /// Constant 17 °C.
    Dc,
    /// Ocean-temperature-like: four leading DCT coefficients hold over 99.97% of
    /// the energy, the rest is a small decaying tail.
    SeaLike,
    /// Indoor-lab-like: daily swing plus a slowly decaying spectrum.
    LabLike,
}

const FIXTURE_SEED: u64 = 20040302;

impl Fixture {
    pub const ALL: [Fixture; 3] = [Fixture::Dc, Fixture::SeaLike, Fixture::LabLike];

    pub fn id(self) -> &'static str {
        match self {
            Fixture::Dc => "dc",
            Fixture::SeaLike => "sea-like",
            Fixture::LabLike => "lab-like",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        Fixture::ALL
            .into_iter()
            .find(|f| f.id() == id)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown fixture {id:?}; expected dc, sea-like or lab-like"
                ))
            })
    }

    /// The first `n` readings of the fixture.
    pub fn series(self, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::invalid("fixture length must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(FIXTURE_SEED ^ self as u64);
        let coeffs: Array1<f64> = match self {
            Fixture::Dc => return Ok(vec![17.0; n]),
            Fixture::SeaLike => {
                let lead = [28.4, -0.31, 0.17, -0.09];
                let scale = 28.4 * (n as f64).sqrt();
                (0..n)
                    .map(|i| match lead.get(i) {
                        Some(&c) => c * (n as f64).sqrt(),
                        None => scale * 6e-4 * rng.random_range(-1.0..1.0) / (i as f64).powf(0.7),
                    })
                    .collect()
            }
            Fixture::LabLike => {
                let base = 19.5 * (n as f64).sqrt();
                (0..n)
                    .map(|i| {
                        if i == 0 {
                            base
                        } else {
                            base * 0.08 * rng.random_range(-1.0..1.0) / (i as f64).powf(1.1)
                        }
                    })
                    .collect()
            }
        };
        let psi = dct_synthesis_matrix(n)?;
        Ok(synthesize(coeffs.view(), &psi)?.to_vec())
    }

    pub fn window(self, n: usize) -> Result<TraceWindow> {
        window(&self.series(n)?, n, 0, self.id())
    }

    /// Two-column `t,value` CSV of the first `n` readings.
    pub fn to_csv(self, n: usize) -> Result<String> {
        let mut out = String::from("t,value\n");
        for (t, v) in self.series(n)?.iter().enumerate() {
            writeln!(out, "{t},{v:.6}").expect("write to string");
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn load_str(text: &str, column: Column) -> Result<LoadedSeries> {
        read_trace(text.as_bytes(), &column, b',', "inline")
    }

    #[test]
    fn loads_named_column() {
        let s = load_str("t,v\n1,2.5\n2,3.5\n", Column::Name("v".into())).unwrap();
        assert_eq!(s.values, vec![2.5, 3.5]);
        assert_eq!(s.skipped_rows, 0);
    }

    #[test]
    fn index_out_of_range() {
        let err = load_str("t,v\n1,2.5\n", Column::Index(5)).unwrap_err();
        assert!(matches!(err, Error::Ingestion(_)));
        assert!(matches!(
            load_str("t,v\n1,2\n", Column::Name("x".into())),
            Err(Error::Ingestion(_))
        ));
    }

    #[test]
    fn skips_malformed_rows() {
        let mut text = String::from("t,v\n");
        for i in 0..10 {
            if i == 4 {
                text.push_str("4,oops\n");
            } else {
                text.push_str(&format!("{i},{}.5\n", i));
            }
        }
        let s = load_str(&text, Column::Name("v".into())).unwrap();
        assert_eq!(s.values.len(), 9);
        assert_eq!(s.skipped_rows, 1);

        // headerless by index: first row is data
        let s = load_str(
            "1;2\n3;x\n5;6\n".replace(';', ",").as_str(),
            Column::Index(1),
        )
        .unwrap();
        assert_eq!(s.values, vec![2.0, 6.0]);
        assert_eq!(s.skipped_rows, 1);
    }

    #[test]
    fn other_delimiters_and_files() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        write!(f, "a\tb\n1\t10\n2\t\n3\t30\n").unwrap();
        let s = load_csv_trace(f.path(), &Column::Name("b".into()), b'\t').unwrap();
        assert_eq!(s.values, vec![10.0, 30.0]);
        assert_eq!(s.skipped_rows, 1);
        assert!(matches!(
            load_csv_trace("/nonexistent/trace.csv", &Column::Index(0), b','),
            Err(Error::Ingestion(_))
        ));
    }

    #[test]
    fn no_numeric_rows() {
        assert!(matches!(
            load_str("t,v\nx,y\n", Column::Name("v".into())),
            Err(Error::Ingestion(_))
        ));
        assert!(matches!(
            load_str("", Column::Index(0)),
            Err(Error::Ingestion(_))
        ));
    }

    #[test]
    fn windows() {
        let series: Vec<f64> = (0..250).map(f64::from).collect();
        let w = window(&series, 250, 0, "s").unwrap();
        assert_eq!(w.len(), 250);
        assert_eq!(w.start_index, 0);
        let w = window(&series, 1, 17, "s").unwrap();
        assert_eq!(w.values.to_vec(), vec![17.0]);
        assert!(window(&series, 10, 245, "s").is_err());
        assert!(window(&series, 1, usize::MAX, "s").is_err());
    }

    #[test]
    fn dc_window_energy() {
        let w = Fixture::Dc.window(64).unwrap();
        let r = sparsity_report(&w, &dct_synthesis_matrix(64).unwrap()).unwrap();
        assert!((r.energy_prefix[0] - 1.0).abs() < 1e-12);
        assert!(r.to_csv().lines().nth(1).unwrap().ends_with(",1.000000"));
    }

    #[test]
    fn basis_column_energy() {
        let n = 32;
        let psi = dct_synthesis_matrix(n).unwrap();
        let values = psi.column(5).to_owned() * 3.0;
        let w = TraceWindow {
            values,
            source_id: "col".into(),
            start_index: 0,
        };
        let r = sparsity_report(&w, &psi).unwrap();
        assert!(r.energy_prefix[4] < 1e-12);
        assert!((r.energy_prefix[5] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_window_is_degenerate() {
        let w = window(&[0.0; 8], 8, 0, "z").unwrap();
        let err = sparsity_report(&w, &dct_synthesis_matrix(8).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }

    #[test]
    fn fixture_profiles() {
        let n = 250;
        let psi = dct_synthesis_matrix(n).unwrap();
        let sea = sparsity_report(&Fixture::SeaLike.window(n).unwrap(), &psi).unwrap();
        assert!(sea.energy_prefix[3] >= 0.9997, "{}", sea.energy_prefix[3]);
        let lab = sparsity_report(&Fixture::LabLike.window(n).unwrap(), &psi).unwrap();
        assert!(lab.energy_prefix[3] < sea.energy_prefix[3]);
        assert_eq!(
            Fixture::SeaLike.series(n).unwrap(),
            Fixture::SeaLike.series(n).unwrap()
        );
        for r in [&sea, &lab] {
            assert!(r.energy_prefix.windows(2).into_iter().all(|w| w[1] >= w[0]));
            assert_eq!(r.energy_prefix[n - 1], 1.0);
        }
    }

    #[test]
    fn column_parse() {
        assert_eq!("3".parse::<Column>().unwrap(), Column::Index(3));
        assert_eq!(
            "temp".parse::<Column>().unwrap(),
            Column::Name("temp".into())
        );
    }
}
