//! Snapshot files.
//!
//! Text form:
//!
//! ```text
//! BURG2D v1
//! n1 n2 x1_min x2_min h1 h2 t boundary
//! <n1·n2 values, row-major, one per line>
//! ```
//!
//! Raw form: the 8-byte tag `BURG2Dr1`, `n1` and `n2` as little-endian
//! `u64`, `x1_min x2_min h1 h2 t` as little-endian `f64`, one boundary byte
//! (0 outflow, 1 periodic), then the values as little-endian `f64`.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::config::SnapshotFormat;
use crate::grid::{Boundary, CellField, Grid2D};
use crate::{Error, Result};

pub const TEXT_TAG: &str = "BURG2D v1";
pub const RAW_TAG: &[u8; 8] = b"BURG2Dr1";

fn boundary_name(b: Boundary) -> &'static str {
    match b {
        Boundary::Outflow => "outflow",
        Boundary::Periodic => "periodic",
    }
}

pub fn encode_text(field: &CellField) -> String {
    let g = field.grid();
    let mut s = String::with_capacity(24 * (g.len() + 2));
    s.push_str(TEXT_TAG);
    s.push('\n');
    s.push_str(&format!(
        "{} {} {:e} {:e} {:e} {:e} {:e} {}\n",
        g.n1,
        g.n2,
        g.x1_min,
        g.x2_min,
        g.h1,
        g.h2,
        field.time(),
        boundary_name(g.boundary)
    ));
    for v in field.values() {
        s.push_str(&format!("{v:.16e}\n"));
    }
    s
}

pub fn decode_text(text: &str) -> Result<CellField> {
    let bad = |m: &str| Error::Snapshot(m.to_string());
    let mut lines = text.lines();
    if lines.next() != Some(TEXT_TAG) {
        return Err(bad("missing BURG2D v1 tag"));
    }
    let header: Vec<&str> = lines.next().ok_or_else(|| bad("missing header"))?.split_whitespace().collect();
    if header.len() != 8 {
        return Err(bad("header needs 8 fields"));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad("bad cell count"));
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad("header fields must be finite numbers"))
    };
    let boundary = match header[7] {
        "outflow" => Boundary::Outflow,
        "periodic" => Boundary::Periodic,
        _ => return Err(bad("unknown boundary")),
    };
    let grid = Grid2D::from_spacing(
        num(header[2])?,
        num(header[3])?,
        num(header[4])?,
        num(header[5])?,
        int(header[0])?,
        int(header[1])?,
        boundary,
    )?;
    let values = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.trim().parse::<f64>().map_err(|_| bad("bad value")))
        .collect::<Result<Vec<_>>>()?;
    if values.len() != grid.len() {
        return Err(bad(&format!("payload has {} values, header says {}", values.len(), grid.len())));
    }
    CellField::new(grid, values, num(header[6])?)
}

pub fn encode_raw(field: &CellField) -> Vec<u8> {
    let g = field.grid();
    let mut b = Vec::with_capacity(8 * (g.len() + 8));
    b.extend_from_slice(RAW_TAG);
    b.extend_from_slice(&(g.n1 as u64).to_le_bytes());
    b.extend_from_slice(&(g.n2 as u64).to_le_bytes());
    for v in [g.x1_min, g.x2_min, g.h1, g.h2, field.time()] {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b.push(u8::from(g.boundary == Boundary::Periodic));
    for v in field.values() {
        b.extend_from_slice(&v.to_le_bytes());
    }
    b
}

pub fn decode_raw(bytes: &[u8]) -> Result<CellField> {
    let bad = |m: &str| Error::Snapshot(m.to_string());
    const HEAD: usize = 8 + 16 + 40 + 1;
    if bytes.len() < HEAD || &bytes[..8] != RAW_TAG {
        return Err(bad("missing BURG2Dr1 tag"));
    }
    let word = |k: usize| <[u8; 8]>::try_from(&bytes[k..k + 8]).expect("length checked");
    let n1 = usize::try_from(u64::from_le_bytes(word(8))).map_err(|_| bad("cell count overflow"))?;
    let n2 = usize::try_from(u64::from_le_bytes(word(16))).map_err(|_| bad("cell count overflow"))?;
    let f: Vec<f64> = (0..5).map(|k| f64::from_le_bytes(word(24 + 8 * k))).collect();
    if f.iter().any(|v| !v.is_finite()) {
        return Err(bad("header fields must be finite"));
    }
    let boundary = match bytes[64] {
        0 => Boundary::Outflow,
        1 => Boundary::Periodic,
        _ => return Err(bad("unknown boundary")),
    };
    let grid = Grid2D::from_spacing(f[0], f[1], f[2], f[3], n1, n2, boundary)?;
    let payload = &bytes[HEAD..];
    if payload.len() != 8 * grid.len() {
        return Err(bad("payload length does not match n1·n2"));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    CellField::new(grid, values, f[4])
}

pub fn write_snapshot(path: &Path, field: &CellField, format: SnapshotFormat) -> Result<()> {
    let mut file = fs::File::create(path)?;
    match format {
        SnapshotFormat::Csv => file.write_all(encode_text(field).as_bytes())?,
        SnapshotFormat::Raw => file.write_all(&encode_raw(field))?,
    }
    Ok(())
}

/// Reads either form, chosen by the leading tag.
pub fn read_snapshot(path: &Path) -> Result<CellField> {
    let bytes = fs::read(path)?;
    if bytes.starts_with(RAW_TAG) {
        decode_raw(&bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Snapshot("not UTF-8".into()))?;
        decode_text(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rect;
    use proptest::prelude::*;

    fn field(vals: Vec<f64>, n1: usize, t: f64) -> CellField {
        let n2 = vals.len() / n1;
        let g = Grid2D::new(Rect::new((-0.3, 1.1), (0.0, 0.7)), n1, n2, Boundary::Periodic).unwrap();
        CellField::new(g, vals, t).unwrap()
    }

    #[test]
    fn header_is_tagged() {
        let f = field(vec![1.0, 2.0, 3.0, 4.0], 2, 0.5);
        let s = encode_text(&f);
        assert!(s.starts_with("BURG2D v1\n2 2 "));
        assert!(s.lines().nth(1).unwrap().ends_with("periodic"));
    }

    #[test]
    fn rejects_bad_payload() {
        let f = field(vec![1.0, 2.0, 3.0, 4.0], 2, 0.5);
        let s = encode_text(&f);
        let cut: String = s.lines().take(4).map(|l| format!("{l}\n")).collect();
        assert!(matches!(decode_text(&cut), Err(Error::Snapshot(_))));
        let b = encode_raw(&f);
        assert!(decode_raw(&b[..b.len() - 1]).is_err());
        assert!(decode_text("BURG2D v2\n").is_err());
    }

    proptest! {
        #[test]
        fn raw_round_trip_is_bit_exact(vals in prop::collection::vec(-1e300..1e300f64, 6), t in 0.0..10.0f64) {
            let f = field(vals, 3, t);
            let g = decode_raw(&encode_raw(&f)).unwrap();
            prop_assert_eq!(g.grid(), f.grid());
            prop_assert_eq!(g.time().to_bits(), f.time().to_bits());
            for (a, b) in f.values().iter().zip(g.values()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }

        #[test]
        fn text_round_trip_keeps_17_digits(vals in prop::collection::vec(-1e3..1e3f64, 6), t in 0.0..10.0f64) {
            let f = field(vals, 2, t);
            let g = decode_text(&encode_text(&f)).unwrap();
            prop_assert_eq!(g.grid(), f.grid());
            for (a, b) in f.values().iter().zip(g.values()) {
                prop_assert!((a - b).abs() <= 1e-16 * a.abs());
            }
        }
    }
}
