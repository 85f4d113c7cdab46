//! Reading and writing functions, spaces and tables.
//!
//! Sampled functions are CSV with columns `value,grad[,weight]` (missing
//! weights mean uniform) or JSON `{"entries": [{"value", "grad", "weight"}]}`.
//! Spaces are JSON with either `coords` (points on a line) or `distances`,
//! optional `weights`, the resolution `h`, and an optional `grid` tag
//! `{"r", "lo", "hi", "count"}` naming the discretized measure.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{ModelMeasure, ProfileRow};
use crate::oracle::DiscreteMetricSpace;
use crate::rearrangement::{Entry, QuantileFunction, SampledFunction};

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(io_error(path))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(io_error(path))
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

#[derive(Deserialize)]
struct CsvEntry {
    value: f64,
    grad: f64,
    weight: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct JsonFunction {
    entries: Vec<Entry<f64>>,
}

fn with_context(path: &Path, e: Error) -> Error {
    match e {
        Error::Invalid(msg) => invalid(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Loads a sampled function from CSV or JSON (by extension).
pub fn read_function(path: &Path) -> Result<SampledFunction<f64>> {
    let reader = open(path)?;
    let entries = if is_json(path) {
        serde_json::from_reader::<_, JsonFunction>(reader)?.entries
    } else {
        let mut rows = Vec::new();
        for row in csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader)
            .deserialize()
        {
            rows.push(row?);
        }
        let rows: Vec<CsvEntry> = rows;
        let uniform = 1.0 / rows.len().max(1) as f64;
        if rows.iter().any(|r| r.weight.is_some()) && rows.iter().any(|r| r.weight.is_none()) {
            return Err(invalid(format!(
                "{}: weights given for some rows only",
                path.display()
            )));
        }
        rows.into_iter()
            .map(|r| Entry::new(r.value, r.grad, r.weight.unwrap_or(uniform)))
            .collect()
    };
    SampledFunction::normalized(entries).map_err(|e| with_context(path, e))
}

fn sink_error(source: std::io::Error) -> Error {
    Error::Io {
        path: "<output>".into(),
        source,
    }
}

/// Writes to `path` as JSON or CSV (by extension).
pub fn write_function(path: &Path, f: &SampledFunction<f64>) -> Result<()> {
    let mut out = create(path)?;
    if is_json(path) {
        serde_json::to_writer_pretty(
            &mut out,
            &JsonFunction {
                entries: f.entries().to_vec(),
            },
        )?;
    } else {
        write_function_csv(&mut out, f).map_err(|e| with_path(path, e))?;
    }
    out.flush().map_err(io_error(path))
}

fn with_path(path: &Path, e: Error) -> Error {
    match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    }
}

/// Rows `value,grad,weight`.
pub fn write_function_csv<W: Write>(out: W, f: &SampledFunction<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["value", "grad", "weight"])?;
    for e in f.entries() {
        w.serialize((e.value, e.grad, e.weight))?;
    }
    w.flush().map_err(sink_error)
}

/// Writes `f*` as rows `s,value` (the right end and value of each step).
pub fn write_quantile<W: Write>(out: W, q: &QuantileFunction<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["s", "value"])?;
    for (_, b, v) in q.steps() {
        w.serialize((b, v))?;
    }
    w.flush().map_err(sink_error)
}

/// Profile table with an empty `asymptotic`/`ratio` cell where undefined.
pub fn write_profile_table<W: Write>(out: W, rows: &[ProfileRow]) -> Result<()> {
    // the header comes from the field names
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(sink_error)
}

/// Which continuum measure a space discretizes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridTag {
    pub r: f64,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridTag>,
}

impl SpaceFile {
    /// The grid discretization of `μ_r` described by `tag`.
    pub fn from_grid(tag: GridTag) -> Result<Self> {
        let measure = ModelMeasure::new(tag.r, 1)?;
        let space = DiscreteMetricSpace::grid_discretization(&measure, tag.lo, tag.hi, tag.count)?;
        let coords = (0..tag.count)
            .map(|i| tag.lo + (tag.hi - tag.lo) * i as f64 / (tag.count - 1) as f64)
            .collect();
        Ok(SpaceFile {
            coords: Some(coords),
            distances: None,
            weights: Some(space.weights().to_vec()),
            h: Some(space.resolution()),
            grid: Some(tag),
        })
    }

    /// Builds the space. A grid tag alone is enough; explicit points win.
    pub fn build(&self) -> Result<DiscreteMetricSpace<f64>> {
        let n = match (&self.coords, &self.distances) {
            (Some(c), None) => c.len(),
            (None, Some(d)) => d.len(),
            (None, None) => {
                let tag = self
                    .grid
                    .ok_or_else(|| invalid("space needs coords, distances or a grid tag"))?;
                return Self::from_grid(tag)?.build();
            }
            (Some(_), Some(_)) => return Err(invalid("give either coords or distances, not both")),
        };
        let weights = self
            .weights
            .clone()
            .unwrap_or_else(|| vec![1.0 / n as f64; n]);
        let h = self
            .h
            .ok_or_else(|| invalid("space needs a resolution h"))?;
        match (&self.coords, &self.distances) {
            (Some(c), _) => DiscreteMetricSpace::from_line(c.clone(), weights, h),
            (_, Some(d)) => DiscreteMetricSpace::from_matrix(d.clone(), weights, h),
            _ => unreachable!("handled above"),
        }
    }
}

pub fn read_space(path: &Path) -> Result<SpaceFile> {
    Ok(serde_json::from_reader(open(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn function_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = SampledFunction::new(vec![
            Entry::new(1.5, 0.5, 0.25),
            Entry::new(-2.0, 1.0, 0.75),
        ])
        .unwrap();
        for name in ["f.csv", "f.json"] {
            let path = dir.path().join(name);
            write_function(&path, &f).unwrap();
            assert_eq!(read_function(&path).unwrap(), f);
        }
    }

    #[test]
    fn csv_without_weights_is_uniform() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        std::fs::write(&path, "value,grad\n1,0\n2,0\n3,0\n4,0\n").unwrap();
        let f = read_function(&path).unwrap();
        assert!(f.entries().iter().all(|e| e.weight == 0.25));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = read_function(Path::new("/nonexistent/f.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/f.csv"));
    }

    #[test]
    fn spaces_from_json() {
        let two: SpaceFile = serde_json::from_str(
            r#"{"distances": [[0, 1], [1, 0]], "weights": [0.3, 0.7], "h": 1}"#,
        )
        .unwrap();
        let sp = two.build().unwrap();
        assert!((sp.perimeter_h(&[true, false]) - 0.7).abs() < 1e-15);
        let tagged: SpaceFile =
            serde_json::from_str(r#"{"grid": {"r": 1, "lo": -0.99, "hi": 0.99, "count": 12}}"#)
                .unwrap();
        assert_eq!(tagged.build().unwrap().len(), 12);
        let bad: SpaceFile = serde_json::from_str(r#"{"coords": [0, 1]}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
