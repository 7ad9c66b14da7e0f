//! Binary and graymap serialization of grid fields.
//!
//! The binary record is a 16-byte header (`EGL1`, `u32` N, two reserved `u32`
//! words) followed by `N²` little-endian `f64` values, row-major, x fastest.

use std::io::{Read, Write};

use crate::error::{EglError, Result};
use crate::spectral::GridField;

pub const MAGIC: &[u8; 4] = b"EGL1";
pub const HEADER_LEN: usize = 16;

pub fn write_binary<W: Write>(f: &GridField, mut w: W) -> Result<()> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * f.values().len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(f.n() as u32).to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    buf.extend_from_slice(&0u32.to_le_bytes());
    for v in f.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<GridField> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(EglError::Format("bad magic".into()));
    }
    let n = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let count = n
        .checked_mul(n)
        .ok_or_else(|| EglError::Format(format!("resolution {n} overflows")))?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() != 8 * count {
        return Err(EglError::Format(format!(
            "expected {} payload bytes, found {}",
            8 * count,
            raw.len()
        )));
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    GridField::new(n, values)
}

/// Binary PGM (P5), linearly rescaled to 0..255, top row = largest y.
pub fn write_pgm<W: Write>(f: &GridField, mut w: W) -> Result<()> {
    let n = f.n();
    let (lo, hi) = (f.min(), f.max());
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut buf = format!("P5\n{n} {n}\n255\n").into_bytes();
    for j in (0..n).rev() {
        for i in 0..n {
            let s = ((f.get(i, j) - lo) / span * 255.0).round();
            buf.push(s.clamp(0.0, 255.0) as u8);
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_exact() {
        let f = GridField::from_fn(8, |x, y| (x * 1.7).sin() + y.cos() / 3.0).unwrap();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 8 * 64);
        assert_eq!(&buf[..4], b"EGL1");
        assert_eq!(read_binary(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn truncated_record_is_rejected() {
        let f = GridField::zeros(8).unwrap();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        buf.pop();
        assert!(matches!(read_binary(buf.as_slice()), Err(EglError::Format(_))));
        buf[0] = b'X';
        assert!(read_binary(buf.as_slice()).is_err());
    }

    #[test]
    fn pgm_spans_full_range() {
        let f = GridField::from_fn(8, |x, _| x).unwrap();
        let mut buf = Vec::new();
        write_pgm(&f, &mut buf).unwrap();
        let header = b"P5\n8 8\n255\n";
        assert_eq!(&buf[..header.len()], header);
        let px = &buf[header.len()..];
        assert_eq!(px.len(), 64);
        assert_eq!(px[0], 0);
        assert_eq!(px[7], 255);
    }
}
