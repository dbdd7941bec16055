//! Landmark file ingestion and serialization.
//!
//! Two formats are supported, both locale-independent (dot decimal only):
//!
//! - `native`: a header line `k n`, then n blocks of k lines `x y`
//!   (whitespace-separated decimals). Blank lines and lines starting with `#`
//!   are ignored everywhere.
//! - `csv`: a header `object,landmark,x,y`, then one row per landmark with
//!   rows grouped contiguously by object and `landmark` running 1..k within
//!   each object.
//!
//! Writing uses Rust's shortest round-trip float formatting, so a write
//! followed by a parse reproduces every coordinate bit-exactly.

use std::path::Path;

use shapestat_core::{Complex64, KAd, Shape, ShapeError};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Native,
    Csv,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Native => "native",
            Format::Csv => "csv",
        }
    }
}

/// A parsed sample: n objects of k landmarks each, plus a label used in
/// reports (by default the file stem).
#[derive(Debug, Clone)]
pub struct LandmarkFile {
    pub label: String,
    pub k: usize,
    pub objects: Vec<KAd>,
}

impl LandmarkFile {
    pub fn new(label: impl Into<String>, objects: Vec<KAd>) -> Result<Self, CliError> {
        let label = label.into();
        if objects.is_empty() {
            return Err(CliError::Usage(format!("sample '{label}' has no objects")));
        }
        let k = objects[0].k();
        if let Some(bad) = objects.iter().find(|o| o.k() != k) {
            return Err(CliError::Usage(format!(
                "sample '{label}' mixes landmark counts ({k} vs {})",
                bad.k()
            )));
        }
        Ok(LandmarkFile { label, k, objects })
    }

    pub fn n(&self) -> usize {
        self.objects.len()
    }

    /// Shapes of all objects; fails on a degenerate configuration.
    pub fn shapes(&self) -> Result<Vec<Shape>, CliError> {
        self.objects
            .iter()
            .enumerate()
            .map(|(i, kad)| {
                Shape::from_kad(kad).map_err(|e| match e {
                    ShapeError::DegenerateConfiguration => CliError::Usage(format!(
                        "object {} of sample '{}' is degenerate: all landmarks coincide",
                        i + 1,
                        self.label
                    )),
                    other => CliError::Numerical(other),
                })
            })
            .collect()
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn label_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "sample".into())
}

/// Parses a landmark file in the given format.
pub fn parse_landmarks(path: &Path, format: Format) -> Result<LandmarkFile, CliError> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    match format {
        Format::Native => parse_native(&text, &name, label_of(path)),
        Format::Csv => parse_csv(&text, &name, label_of(path)),
    }
}

fn kad_from_points(
    points: Vec<Complex64>,
    path: &str,
    line: usize,
) -> Result<KAd, CliError> {
    KAd::new(points).map_err(|e| CliError::Parse {
        path: path.to_string(),
        line,
        message: e.to_string(),
    })
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_native(text: &str, path: &str, label: String) -> Result<LandmarkFile, CliError> {
    let mut lines = content_lines(text);
    let (header_no, header) = lines.next().ok_or_else(|| CliError::Parse {
        path: path.to_string(),
        line: 1,
        message: "empty file; expected header 'k n'".into(),
    })?;
    let mut fields = header.split_whitespace();
    let parse_usize = |field: Option<&str>, what: &str| -> Result<usize, CliError> {
        field
            .ok_or_else(|| CliError::Parse {
                path: path.to_string(),
                line: header_no,
                message: format!("header is missing {what}"),
            })?
            .parse::<usize>()
            .map_err(|_| CliError::Parse {
                path: path.to_string(),
                line: header_no,
                message: format!("header {what} is not a nonnegative integer"),
            })
    };
    let k = parse_usize(fields.next(), "k")?;
    let n = parse_usize(fields.next(), "n")?;
    if fields.next().is_some() {
        return Err(CliError::Parse {
            path: path.to_string(),
            line: header_no,
            message: "header must be exactly 'k n'".into(),
        });
    }

    let mut objects = Vec::with_capacity(n);
    let mut current: Vec<Complex64> = Vec::with_capacity(k);
    let mut first_line_of_object = header_no;
    let mut last_line = header_no;
    for (line_no, line) in lines {
        if objects.len() == n {
            return Err(CliError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("trailing content after {n} objects"),
            });
        }
        if current.is_empty() {
            first_line_of_object = line_no;
        }
        let mut fields = line.split_whitespace();
        let mut coord = |what: &str| -> Result<f64, CliError> {
            fields
                .next()
                .ok_or_else(|| CliError::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("landmark line is missing {what}"),
                })?
                .parse::<f64>()
                .map_err(|_| CliError::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("{what} is not a decimal number"),
                })
        };
        let x = coord("x")?;
        let y = coord("y")?;
        if fields.next().is_some() {
            return Err(CliError::Parse {
                path: path.to_string(),
                line: line_no,
                message: "landmark line must be exactly 'x y'".into(),
            });
        }
        current.push(Complex64::new(x, y));
        last_line = line_no;
        if current.len() == k {
            objects.push(kad_from_points(std::mem::take(&mut current), path, first_line_of_object)?);
        }
    }

    if !current.is_empty() {
        return Err(CliError::ShapeMismatch {
            path: path.to_string(),
            line: last_line,
            expected: k,
            got: current.len(),
        });
    }
    if objects.len() != n {
        return Err(CliError::ShapeMismatch {
            path: path.to_string(),
            line: last_line,
            expected: k,
            got: 0,
        });
    }
    LandmarkFile::new(label, objects)
}

pub fn parse_csv(text: &str, path: &str, label: String) -> Result<LandmarkFile, CliError> {
    let mut lines = content_lines(text);
    let (header_no, header) = lines.next().ok_or_else(|| CliError::Parse {
        path: path.to_string(),
        line: 1,
        message: "empty file; expected header 'object,landmark,x,y'".into(),
    })?;
    if header.split(',').map(str::trim).collect::<Vec<_>>() != ["object", "landmark", "x", "y"] {
        return Err(CliError::Parse {
            path: path.to_string(),
            line: header_no,
            message: "header must be 'object,landmark,x,y'".into(),
        });
    }

    let mut objects: Vec<KAd> = Vec::new();
    let mut k: Option<usize> = None;
    let mut current_id: Option<String> = None;
    let mut seen_ids = std::collections::HashSet::new();
    let mut current: Vec<Complex64> = Vec::new();
    let mut first_line_of_object = header_no;
    let mut last_line = header_no;

    let close_object = |current: &mut Vec<Complex64>,
                        k: &mut Option<usize>,
                        objects: &mut Vec<KAd>,
                        start_line: usize,
                        at_line: usize|
     -> Result<(), CliError> {
        let expected = *k.get_or_insert(current.len());
        if current.len() != expected {
            return Err(CliError::ShapeMismatch {
                path: path.to_string(),
                line: at_line,
                expected,
                got: current.len(),
            });
        }
        objects.push(kad_from_points(std::mem::take(current), path, start_line)?);
        Ok(())
    };

    for (line_no, line) in lines {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(CliError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("expected 4 comma-separated fields, got {}", fields.len()),
            });
        }
        let id = fields[0].to_string();
        if current_id.as_deref() != Some(id.as_str()) {
            if current_id.is_some() {
                close_object(&mut current, &mut k, &mut objects, first_line_of_object, line_no)?;
            }
            if seen_ids.contains(&id) {
                return Err(CliError::Parse {
                    path: path.to_string(),
                    line: line_no,
                    message: format!("rows for object '{id}' are not contiguous"),
                });
            }
            seen_ids.insert(id.clone());
            current_id = Some(id);
            first_line_of_object = line_no;
        }
        let landmark: usize = fields[1].parse().map_err(|_| CliError::Parse {
            path: path.to_string(),
            line: line_no,
            message: "landmark index is not an integer".into(),
        })?;
        if landmark != current.len() + 1 {
            return Err(CliError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("landmark index {landmark}, expected {}", current.len() + 1),
            });
        }
        let parse_coord = |field: &str, what: &str| -> Result<f64, CliError> {
            field.parse::<f64>().map_err(|_| CliError::Parse {
                path: path.to_string(),
                line: line_no,
                message: format!("{what} is not a decimal number"),
            })
        };
        let x = parse_coord(fields[2], "x")?;
        let y = parse_coord(fields[3], "y")?;
        current.push(Complex64::new(x, y));
        last_line = line_no;
    }
    if current_id.is_none() {
        return Err(CliError::Parse {
            path: path.to_string(),
            line: last_line,
            message: "file contains a header but no landmark rows".into(),
        });
    }
    close_object(&mut current, &mut k, &mut objects, first_line_of_object, last_line)?;
    LandmarkFile::new(label, objects)
}

/// Serializes to the requested format; see the module docs for the grammar.
pub fn to_string(file: &LandmarkFile, format: Format) -> String {
    match format {
        Format::Native => {
            let mut out = format!("{} {}\n", file.k, file.n());
            for object in &file.objects {
                for z in object.points() {
                    out.push_str(&format!("{} {}\n", z.re, z.im));
                }
            }
            out
        }
        Format::Csv => {
            let mut out = String::from("object,landmark,x,y\n");
            for (i, object) in file.objects.iter().enumerate() {
                for (j, z) in object.points().iter().enumerate() {
                    out.push_str(&format!("{},{},{},{}\n", i + 1, j + 1, z.re, z.im));
                }
            }
            out
        }
    }
}

pub fn write_landmarks(file: &LandmarkFile, path: &Path, format: Format) -> Result<(), CliError> {
    std::fs::write(path, to_string(file, format))
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}
