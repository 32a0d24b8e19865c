//! Point sets: construction, CSV and PPM ingestion, and summary statistics.
//!
//! Points are stored row-major in a single `Vec<f64>`; point `i` occupies
//! `points[i * d..(i + 1) * d]`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// An immutable `n × d` matrix of finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<f64>,
    n: usize,
    d: usize,
    name: String,
}

impl Dataset {
    /// Builds a dataset from row-major coordinates.
    pub fn new(points: Vec<f64>, d: usize, name: impl Into<String>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDataset("dimension must be at least 1".into()));
        }
        if points.is_empty() {
            return Err(Error::InvalidDataset("no points".into()));
        }
        if !points.len().is_multiple_of(d) {
            return Err(Error::InvalidDataset(format!(
                "{} coordinates do not form rows of dimension {d}",
                points.len()
            )));
        }
        if let Some(pos) = points.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidDataset(format!(
                "non-finite coordinate in point {}",
                pos / d
            )));
        }
        let n = points.len() / d;
        Ok(Self {
            points,
            n,
            d,
            name: name.into(),
        })
    }

    /// Builds a dataset from a list of equally sized rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], name: impl Into<String>) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::InvalidDataset(format!(
                    "row {i} has {} coordinates, expected {d}",
                    row.len()
                )));
            }
            points.extend_from_slice(row);
        }
        Self::new(points, d, name)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.d)
    }

    /// Serializes the points as comma-separated rows without a header.
    ///
    /// Values are written with Rust's shortest round-trip formatting, so
    /// [`load_csv`] reads back the exact same coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.points.len() * 8);
        for row in self.rows() {
            for (j, x) in row.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{x:?}");
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Per-dimension aggregates of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub d: usize,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
    pub mean: Vec<f64>,
}

pub fn describe(ds: &Dataset) -> Summary {
    let d = ds.dim();
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    let mut sum = vec![0.0; d];
    for row in ds.rows() {
        for j in 0..d {
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
            sum[j] += row[j];
        }
    }
    let n = ds.n() as f64;
    Summary {
        n: ds.n(),
        d,
        min,
        max,
        mean: sum.into_iter().map(|s| s / n).collect(),
    }
}

/// Loads one point per non-blank line of comma-separated numbers.
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, has_header, path)
}

pub fn parse_csv(text: &str, has_header: bool, path: &Path) -> Result<Dataset> {
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };

    let mut points = Vec::new();
    let mut dim: Option<usize> = None;
    let mut header_skipped = !has_header;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        if raw.trim().is_empty() {
            continue;
        }
        if !header_skipped {
            header_skipped = true;
            continue;
        }
        let mut count = 0;
        for field in raw.split(',') {
            let field = field.trim();
            let value: f64 = field
                .parse()
                .map_err(|_| parse_err(line_no, format!("non-numeric field {field:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(line_no, format!("non-finite value {field:?}")));
            }
            points.push(value);
            count += 1;
        }
        match dim {
            None => dim = Some(count),
            Some(d) if d != count => {
                return Err(parse_err(
                    line_no,
                    format!("ragged row: {count} fields, expected {d}"),
                ))
            }
            Some(_) => {}
        }
    }

    let Some(d) = dim else {
        return Err(parse_err(last_line.max(1), "empty file: no data rows".into()));
    };
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(points, d, name)
}

/// Loads a plain (P3) or binary (P6) PPM image as 3-d RGB points in
/// row-major pixel order. Values keep their 0–255 scale.
pub fn load_ppm_rgb(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ppm(&bytes, path)
}

pub fn parse_ppm(bytes: &[u8], path: &Path) -> Result<Dataset> {
    let fmt_err = |msg: String| Error::Format {
        path: path.to_path_buf(),
        msg,
    };

    let mut cur = PnmCursor { bytes, pos: 0 };
    let magic = cur
        .token()
        .ok_or_else(|| fmt_err("missing magic number".into()))?;
    let binary = match magic {
        b"P3" => false,
        b"P6" => true,
        other => {
            return Err(fmt_err(format!(
                "unsupported format {:?}: only P3 and P6 are accepted",
                String::from_utf8_lossy(other)
            )))
        }
    };

    let mut header = [0usize; 3];
    for (slot, what) in header.iter_mut().zip(["width", "height", "maxval"]) {
        let tok = cur
            .token()
            .ok_or_else(|| fmt_err(format!("truncated header: missing {what}")))?;
        *slot = parse_uint(tok).ok_or_else(|| fmt_err(format!("invalid {what}")))?;
    }
    let [width, height, maxval] = header;
    if width == 0 || height == 0 {
        return Err(fmt_err("image has no pixels".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(fmt_err(format!("unsupported maxval {maxval}")));
    }

    let samples = width * height * 3;
    let mut points = Vec::with_capacity(samples);
    if binary {
        // exactly one whitespace byte separates the header from the raster
        let start = cur.pos + 1;
        let raster = bytes.get(start..start + samples).ok_or_else(|| {
            fmt_err(format!(
                "truncated pixel data: expected {samples} bytes, found {}",
                bytes.len().saturating_sub(start)
            ))
        })?;
        points.extend(raster.iter().map(|&b| b as f64));
    } else {
        for i in 0..samples {
            let tok = cur.token().ok_or_else(|| {
                fmt_err(format!(
                    "truncated pixel data: expected {samples} samples, found {i}"
                ))
            })?;
            let v = parse_uint(tok).ok_or_else(|| fmt_err("invalid sample value".into()))?;
            if v > maxval {
                return Err(fmt_err(format!("sample {v} exceeds maxval {maxval}")));
            }
            points.push(v as f64);
        }
    }
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Dataset::new(points, 3, name)
}

fn parse_uint(tok: &[u8]) -> Option<usize> {
    std::str::from_utf8(tok).ok()?.parse().ok()
}

struct PnmCursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmCursor<'a> {
    /// Next whitespace-delimited token, skipping `#` comments. Leaves `pos`
    /// on the byte right after the token.
    fn token(&mut self) -> Option<&'a [u8]> {
        loop {
            let b = *self.bytes.get(self.pos)?;
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
        Some(&self.bytes[start..self.pos])
    }
}
