//! Path serialization: single-column CSV and a little-endian binary format.
//!
//! Binary layout: 8-byte magic `FCLTPATH`, format version (u32 LE), value
//! count (u32 LE), then the values as f64 LE.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"FCLTPATH";
pub const VERSION: u32 = 1;

/// Shortest round-trip decimal form used in every CSV the crate writes.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:?}")
    }
}

pub(crate) fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("`{s}` is not a number: {e}")))
}

/// Writes values as CSV with header `x`.
pub fn write_csv<W: Write>(values: &[f64], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x"]).map_err(csv_err)?;
    for &v in values {
        out.write_record([fmt_f64(v)]).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a single-column CSV with header `x`.
pub fn read_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    if headers.len() != 1 || &headers[0] != "x" {
        return Err(Error::Parse("expected a single `x` column".into()));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        out.push(parse_f64(&rec[0])?);
    }
    Ok(out)
}

/// Writes values in the binary path format.
pub fn write_binary<W: Write>(values: &[f64], mut w: W) -> Result<()> {
    let len = u32::try_from(values.len())
        .map_err(|_| Error::Domain("path too long for the binary format".into()))?;
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&len.to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads values from the binary path format.
pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..8] != MAGIC {
        return Err(Error::Parse("bad magic".into()));
    }
    let version = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes"));
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported version {version}")));
    }
    let len = u32::from_le_bytes(head[12..16].try_into().expect("4 bytes")) as usize;
    let mut buf = vec![0u8; len * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}
