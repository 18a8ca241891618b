//! CSV and TLPF binary field formats.
//!
//! TLPF layout (all integers and floats little-endian):
//!
//! ```text
//! "TLPF" | version u16 | n u32 | N u64 | grid flag u8 | [r u32]
//!        | N*n coordinates f64 | N values f64 | provenance length u64 | provenance JSON
//! ```
//!
//! The grid scale is carried inside the provenance object under a reserved key
//! and stripped again on read.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::{GridSpec, ScalarField};
use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"TLPF";
const VERSION: u16 = 1;
const SCALE_KEY: &str = "_grid_scale";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldFormat {
    Csv,
    Binary,
}

impl FieldFormat {
    /// `.csv` files are CSV; everything else is treated as TLPF.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => FieldFormat::Csv,
            _ => FieldFormat::Binary,
        }
    }
}

pub fn parse_field(path: &Path, format: FieldFormat) -> Result<ScalarField> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        FieldFormat::Csv => read_csv(reader, path),
        FieldFormat::Binary => read_binary(reader, path),
    }
}

pub fn write_field(field: &ScalarField, path: &Path, format: FieldFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    match format {
        FieldFormat::Csv => write_csv(field, &mut writer),
        FieldFormat::Binary => write_binary(field, &mut writer),
    }
    .map_err(|e| Error::io(path, e))?;
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads `alpha_1,...,alpha_n,loss` CSV. `origin` only labels errors.
pub fn read_csv<R: Read>(reader: R, origin: &Path) -> Result<ScalarField> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| Error::format(origin, format!("unreadable header: {e}")))?
        .clone();
    let columns = header.len();
    if columns < 2 {
        return Err(Error::format(origin, "header needs at least one alpha column and loss"));
    }
    for (i, name) in header.iter().take(columns - 1).enumerate() {
        if name != format!("alpha_{}", i + 1) {
            return Err(Error::format(
                origin,
                format!("header column {} is {name:?}, expected \"alpha_{}\"", i + 1, i + 1),
            ));
        }
    }
    if &header[columns - 1] != "loss" {
        return Err(Error::format(origin, "last header column must be \"loss\""));
    }

    let dims = columns - 1;
    let mut coords = Vec::new();
    let mut values = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::format(origin, format!("row {row}: {e}")))?;
        if record.len() != columns {
            return Err(Error::Dimension(format!(
                "row {row} has {} columns, header has {columns}",
                record.len()
            )));
        }
        for (col, cell) in record.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| Error::format(origin, format!("row {row}: cannot parse {cell:?}")))?;
            if !x.is_finite() {
                return Err(Error::NonFinite { row, value: x });
            }
            if col < dims {
                coords.push(x);
            } else {
                values.push(x);
            }
        }
    }
    ScalarField::new(dims, coords, values, None, Map::new())
}

pub fn write_csv<W: Write>(field: &ScalarField, mut out: W) -> std::io::Result<()> {
    let header: Vec<String> = (1..=field.dims())
        .map(|i| format!("alpha_{i}"))
        .chain(std::iter::once("loss".to_string()))
        .collect();
    writeln!(out, "{}", header.join(","))?;
    for (i, value) in field.values().iter().enumerate() {
        for c in field.coord(i) {
            // Debug formatting is the shortest representation that round-trips.
            write!(out, "{c:?},")?;
        }
        writeln!(out, "{value:?}")?;
    }
    Ok(())
}

pub fn write_binary<W: Write>(field: &ScalarField, mut out: W) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(field.dims() as u32).to_le_bytes())?;
    out.write_all(&(field.len() as u64).to_le_bytes())?;
    match field.grid() {
        Some(spec) => {
            out.write_all(&[1])?;
            out.write_all(&(spec.r as u32).to_le_bytes())?;
        }
        None => out.write_all(&[0])?,
    }
    for x in field.coords().iter().chain(field.values()) {
        out.write_all(&x.to_le_bytes())?;
    }
    let mut prov = field.provenance().clone();
    if let Some(spec) = field.grid() {
        prov.insert(SCALE_KEY.into(), Value::from(spec.scale));
    }
    let blob = serde_json::to_vec(&Value::Object(prov))?;
    out.write_all(&(blob.len() as u64).to_le_bytes())?;
    out.write_all(&blob)
}

struct Cursor<'a, R> {
    inner: R,
    origin: &'a Path,
}

impl<R: Read> Cursor<'_, R> {
    fn bytes<const K: usize>(&mut self, what: &str) -> Result<[u8; K]> {
        let mut buf = [0u8; K];
        self.inner
            .read_exact(&mut buf)
            .map_err(|_| Error::format(self.origin, format!("truncated file while reading {what}")))?;
        Ok(buf)
    }

    fn f64s(&mut self, count: usize, what: &str) -> Result<Vec<f64>> {
        let len = count
            .checked_mul(8)
            .ok_or_else(|| Error::format(self.origin, format!("{what} length overflows")))?;
        let mut raw = Vec::new();
        (&mut self.inner)
            .take(len as u64)
            .read_to_end(&mut raw)
            .map_err(|e| Error::io(self.origin, e))?;
        if raw.len() != len {
            return Err(Error::format(self.origin, format!("truncated file while reading {what}")));
        }
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn read_binary<R: Read>(reader: R, origin: &Path) -> Result<ScalarField> {
    let mut cur = Cursor { inner: reader, origin };
    if &cur.bytes::<4>("magic")? != MAGIC {
        return Err(Error::format(origin, "missing TLPF magic"));
    }
    let version = u16::from_le_bytes(cur.bytes("version")?);
    if version != VERSION {
        return Err(Error::format(origin, format!("unsupported TLPF version {version}")));
    }
    let dims = u32::from_le_bytes(cur.bytes("n")?) as usize;
    let count = usize::try_from(u64::from_le_bytes(cur.bytes("N")?))
        .map_err(|_| Error::format(origin, "point count does not fit in memory"))?;
    let resolution = match cur.bytes::<1>("grid flag")?[0] {
        0 => None,
        1 => Some(u32::from_le_bytes(cur.bytes("r")?) as usize),
        flag => return Err(Error::format(origin, format!("invalid grid flag {flag}"))),
    };
    if dims == 0 {
        return Err(Error::format(origin, "n must be positive"));
    }
    let coord_len = count
        .checked_mul(dims)
        .ok_or_else(|| Error::format(origin, "N*n overflows"))?;
    let coords = cur.f64s(coord_len, "coordinates")?;
    let values = cur.f64s(count, "values")?;
    let blob_len = u64::from_le_bytes(cur.bytes("provenance length")?);
    let mut blob = Vec::new();
    (&mut cur.inner)
        .take(blob_len)
        .read_to_end(&mut blob)
        .map_err(|e| Error::io(origin, e))?;
    if blob.len() as u64 != blob_len {
        return Err(Error::format(origin, "truncated provenance"));
    }
    let mut trailing = [0u8; 1];
    if cur.inner.read(&mut trailing).map_err(|e| Error::io(origin, e))? != 0 {
        return Err(Error::format(origin, "trailing bytes after provenance"));
    }
    let mut provenance = match serde_json::from_slice(&blob)? {
        Value::Object(map) => map,
        _ => return Err(Error::format(origin, "provenance must be a JSON object")),
    };
    let scale = provenance.remove(SCALE_KEY).and_then(|v| v.as_f64());
    let grid = match resolution {
        Some(r) => Some(match scale {
            Some(s) => GridSpec::with_scale(dims, r, s)?,
            None => GridSpec::new(dims, r)?,
        }),
        None => None,
    };
    ScalarField::new(dims, coords, values, grid, provenance)
}
