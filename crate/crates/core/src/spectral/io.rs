//! Field serialization: CSV with index and coordinate columns, and raw
//! little-endian `f64` with a JSON header.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Field, GridSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Metadata stored next to a binary field as `<file>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryHeader {
    pub grid: GridSpec<f64>,
    pub byte_order: String,
    pub dtype: String,
    pub length: usize,
}

fn header_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".json");
    PathBuf::from(p)
}

fn grid_f64<S: Scalar>(g: &GridSpec<S>) -> GridSpec<f64> {
    GridSpec {
        dim: g.dim,
        half_width: g.half_width.as_f64(),
        points: g.points,
    }
}

fn grid_from_f64<S: Scalar>(g: &GridSpec<f64>) -> Result<GridSpec<S>> {
    GridSpec::new(g.dim, S::lit(g.half_width), g.points)
}

/// Writes `i[,j],x[,y],value` rows preceded by a `#` comment with the grid.
pub fn write_field_csv<S: Scalar>(field: &Field<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let g = field.grid();
    let xs = g.coordinates();
    let io = |e| Error::io(path, e);
    writeln!(
        w,
        "# grid: dim={} half_width={:.16e} points={}",
        g.dim,
        g.half_width.as_f64(),
        g.points
    )
    .map_err(io)?;
    if g.dim == 1 {
        writeln!(w, "i,x,value").map_err(io)?;
    } else {
        writeln!(w, "i,j,x,y,value").map_err(io)?;
    }
    for (idx, v) in field.values().iter().enumerate() {
        let [i, j] = g.unflatten(idx);
        if g.dim == 1 {
            writeln!(w, "{i},{:.16e},{:.16e}", xs[i].as_f64(), v.as_f64()).map_err(io)?;
        } else {
            writeln!(
                w,
                "{i},{j},{:.16e},{:.16e},{:.16e}",
                xs[i].as_f64(),
                xs[j].as_f64(),
                v.as_f64()
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)
}

pub fn read_field_csv<S: Scalar>(path: impl AsRef<Path>) -> Result<Field<S>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    let header = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# grid:"))
        .ok_or_else(|| Error::Data(format!("{}: missing grid comment", path.display())))?;
    let mut dim = None;
    let mut half_width = None;
    let mut points = None;
    for kv in header.split_whitespace() {
        match kv.split_once('=') {
            Some(("dim", v)) => dim = v.parse::<usize>().ok(),
            Some(("half_width", v)) => half_width = v.parse::<f64>().ok(),
            Some(("points", v)) => points = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let (Some(dim), Some(hw), Some(points)) = (dim, half_width, points) else {
        return Err(Error::Data(format!("{}: malformed grid comment", path.display())));
    };
    let grid = GridSpec::new(dim, S::lit(hw), points)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut values = Vec::with_capacity(grid.len());
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        let v: f64 = rec
            .get(rec.len() - 1)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Data(format!("{}: unparsable value", path.display())))?;
        values.push(S::lit(v));
    }
    Field::from_values(grid, values)
}

/// Writes the values as little-endian `f64` and the header to `<path>.json`.
pub fn write_field_binary<S: Scalar>(field: &Field<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        bytes.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let header = BinaryHeader {
        grid: grid_f64(field.grid()),
        byte_order: "little".into(),
        dtype: "f64".into(),
        length: field.values().len(),
    };
    let hp = header_path(path);
    std::fs::write(&hp, serde_json::to_string_pretty(&header)?).map_err(|e| Error::io(&hp, e))
}

pub fn read_field_binary<S: Scalar>(path: impl AsRef<Path>) -> Result<Field<S>> {
    let path = path.as_ref();
    let hp = header_path(path);
    let text = std::fs::read_to_string(&hp).map_err(|e| Error::io(&hp, e))?;
    let header: BinaryHeader = serde_json::from_str(&text)?;
    if header.byte_order != "little" || header.dtype != "f64" {
        return Err(Error::Data(format!(
            "unsupported encoding {} {}",
            header.byte_order, header.dtype
        )));
    }
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() != 8 * header.length {
        return Err(Error::Data(format!(
            "{}: expected {} bytes, found {}",
            path.display(),
            8 * header.length,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| S::lit(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect();
    Field::from_values(grid_from_f64(&header.grid)?, values)
}
