//! On-disk formats: point clouds, complexes and persistence diagrams.
//!
//! `complex.json` holds the landmarks and every simplex in filtration order:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "landmarks": [[0.0, 8.0], [-8.0, 0.0]],
//!   "simplices": [
//!     {"vertices": [0], "value": -512.0, "flagged_unbounded": false}
//!   ]
//! }
//! ```
//!
//! `diagram.json` lists `{"dim", "birth", "death"}` points, and
//! `diagram.csv` has the header `dim,birth,death`. An infinite death is
//! written as the string `"inf"` in both.

use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sublevel::complex::{sorted_filtration, FilteredComplex, SimplexValue};
use sublevel::persistence::{DiagramPoint, PersistenceDiagram};
use sublevel::LandmarkSet;

use crate::{CliError, Result};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl ToString) -> CliError {
    CliError::Format {
        path: path.to_path_buf(),
        message: message.to_string(),
    }
}

/// Parses comma-separated points, one per line. A first line that does not
/// parse as numbers is taken as a header; blank lines are skipped.
pub fn parse_points(text: &str) -> std::result::Result<Vec<Vec<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| e.to_string())?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match row {
            Ok(row) => {
                if let Some(first) = points.first() {
                    if first.len() != row.len() {
                        return Err(format!(
                            "line {}: expected {} columns, found {}",
                            line + 1,
                            first.len(),
                            row.len()
                        ));
                    }
                }
                points.push(row);
            }
            Err(_) if line == 0 => {}
            Err(e) => return Err(format!("line {}: {e}", line + 1)),
        }
    }
    if points.is_empty() {
        return Err("no points".into());
    }
    Ok(points)
}

pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_points(&text).map_err(|m| format_err(path, m))
}

pub fn write_points(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| format_err(path, e))?;
    for p in points {
        w.write_record(p.iter().map(f64::to_string))
            .map_err(|e| format_err(path, e))?;
    }
    w.flush().map_err(io_err(path))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexEntry {
    pub vertices: Vec<usize>,
    pub value: f64,
    pub flagged_unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub dim: usize,
    pub landmarks: Vec<Vec<f64>>,
    pub simplices: Vec<SimplexEntry>,
}

impl ComplexFile {
    pub fn new(landmarks: &LandmarkSet, complex: &FilteredComplex) -> Self {
        let simplices = sorted_filtration(complex)
            .into_iter()
            .map(|(vertices, value)| {
                let flagged_unbounded = complex.get(&vertices).is_some_and(|v| v.flagged_unbounded);
                SimplexEntry {
                    vertices,
                    value,
                    flagged_unbounded,
                }
            })
            .collect();
        ComplexFile {
            dim: landmarks.dim(),
            landmarks: landmarks.points().iter().map(|p| p.coords().to_vec()).collect(),
            simplices,
        }
    }

    pub fn to_complex(&self) -> FilteredComplex {
        let max_dim = self.simplices.iter().map(|s| s.vertices.len().saturating_sub(1)).max().unwrap_or(0);
        let mut c = FilteredComplex::new(max_dim);
        for s in &self.simplices {
            c.insert(
                s.vertices.clone(),
                SimplexValue {
                    value: s.value,
                    flagged_unbounded: s.flagged_unbounded,
                },
            );
        }
        c
    }
}

fn ser_death<S: Serializer>(death: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if *death == f64::INFINITY {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*death)
    }
}

fn de_death<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Death {
        Finite(f64),
        Text(String),
    }
    match Death::deserialize(d)? {
        Death::Finite(v) => Ok(v),
        Death::Text(t) if t == "inf" => Ok(f64::INFINITY),
        Death::Text(t) => Err(serde::de::Error::custom(format!("bad death value `{t}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointEntry {
    pub dim: usize,
    pub birth: f64,
    #[serde(serialize_with = "ser_death", deserialize_with = "de_death")]
    pub death: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramFile {
    pub points: Vec<PointEntry>,
}

impl DiagramFile {
    pub fn new(diagram: &PersistenceDiagram) -> Self {
        DiagramFile {
            points: diagram
                .points
                .iter()
                .map(|p| PointEntry {
                    dim: p.dim,
                    birth: p.birth,
                    death: p.death,
                })
                .collect(),
        }
    }

    pub fn to_diagram(&self) -> PersistenceDiagram {
        PersistenceDiagram::new(
            self.points
                .iter()
                .map(|p| DiagramPoint {
                    dim: p.dim,
                    birth: p.birth,
                    death: p.death,
                })
                .collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for p in &self.points {
            let death = if p.death == f64::INFINITY {
                "inf".to_string()
            } else {
                p.death.to_string()
            };
            out.push_str(&format!("{},{},{}\n", p.dim, p.birth, death));
        }
        out
    }

    pub fn parse_csv(text: &str) -> std::result::Result<Self, String> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut points = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            let field = |i: usize| record.get(i).ok_or_else(|| format!("line {}: missing column", line + 2));
            let bad = |e: &dyn std::fmt::Display| format!("line {}: {e}", line + 2);
            points.push(PointEntry {
                dim: field(0)?.parse().map_err(|e| bad(&e))?,
                birth: field(1)?.parse().map_err(|e| bad(&e))?,
                death: field(2)?.parse().map_err(|e| bad(&e))?,
            });
        }
        Ok(DiagramFile { points })
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| format_err(path, e))?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| format_err(path, e))
}

/// Reads a diagram from `.json` or, by extension, `.csv`.
pub fn read_diagram(path: &Path) -> Result<DiagramFile> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        DiagramFile::parse_csv(&text).map_err(|m| format_err(path, m))
    } else {
        read_json(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_optional() {
        let with = parse_points("x,y\n1,2\n3.5,-4\n").unwrap();
        let without = parse_points("1,2\n3.5,-4\n\n").unwrap();
        assert_eq!(with, vec![vec![1.0, 2.0], vec![3.5, -4.0]]);
        assert_eq!(with, without);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        assert!(parse_points("1,2\n3\n").is_err());
        assert!(parse_points("1,2\nfoo,3\n").is_err());
        assert!(parse_points("x,y\n").is_err());
    }

    #[test]
    fn infinite_death_is_a_string() {
        let d = DiagramFile {
            points: vec![PointEntry { dim: 0, birth: -1.5, death: f64::INFINITY }],
        };
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"inf\""));
        assert_eq!(serde_json::from_str::<DiagramFile>(&json).unwrap(), d);
        let csv = d.to_csv();
        assert_eq!(csv, "dim,birth,death\n0,-1.5,inf\n");
        assert_eq!(DiagramFile::parse_csv(&csv).unwrap(), d);
    }
}
