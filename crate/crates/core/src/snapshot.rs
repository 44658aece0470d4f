//! Binary field snapshots.
//!
//! Layout: a 32-byte little-endian header
//!
//! | offset | size | content                         |
//! |--------|------|---------------------------------|
//! | 0      | 4    | magic `b"UNDU"`                 |
//! | 4      | 4    | format version (`u32`, = 1)     |
//! | 8      | 4    | kind (`u32`: 0 surface, 1 radial) |
//! | 12     | 4    | components (`u32`, 2 for a state) |
//! | 16     | 8    | `N_x` (`u64`)                   |
//! | 24     | 8    | `N_θ` (`u64`, 1 for radial)     |
//!
//! followed by each component in row-major order (`x` outer, `θ` inner) as
//! little-endian `f64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::field::{FhnParams, Field, FieldKind, State};
use crate::scalar::Scalar;

pub const MAGIC: [u8; 4] = *b"UNDU";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 32;

fn io_err(e: std::io::Error) -> Error {
    Error::Snapshot(e.to_string())
}

fn kind_code(kind: FieldKind) -> u32 {
    match kind {
        FieldKind::Surface => 0,
        FieldKind::Radial => 1,
    }
}

/// Writes `u₁` then `u₂`.
pub fn write_state<T: Scalar, W: Write>(mut out: W, u: &State<T>) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[0..4].copy_from_slice(&MAGIC);
    header[4..8].copy_from_slice(&VERSION.to_le_bytes());
    header[8..12].copy_from_slice(&kind_code(u.kind()).to_le_bytes());
    header[12..16].copy_from_slice(&2u32.to_le_bytes());
    header[16..24].copy_from_slice(&(u.u1.nx() as u64).to_le_bytes());
    header[24..32].copy_from_slice(&(u.u1.ntheta() as u64).to_le_bytes());
    out.write_all(&header).map_err(io_err)?;
    let mut buf = Vec::with_capacity(16 * u.u1.len());
    for f in [&u.u1, &u.u2] {
        for v in f.values() {
            buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
        }
    }
    out.write_all(&buf).map_err(io_err)
}

/// Reads a state written by [`write_state`], attaching `params`.
pub fn read_state<T: Scalar, R: Read>(mut input: R, params: FhnParams<T>) -> Result<State<T>> {
    let mut header = [0u8; HEADER_LEN];
    input.read_exact(&mut header).map_err(io_err)?;
    if header[0..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let word = |r: std::ops::Range<usize>| u32::from_le_bytes(header[r].try_into().expect("4 bytes"));
    let long = |r: std::ops::Range<usize>| u64::from_le_bytes(header[r].try_into().expect("8 bytes"));
    let version = word(4..8);
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let kind = match word(8..12) {
        0 => FieldKind::Surface,
        1 => FieldKind::Radial,
        k => return Err(Error::Snapshot(format!("unknown kind {k}"))),
    };
    let components = word(12..16);
    if components != 2 {
        return Err(Error::Snapshot(format!("expected 2 components, found {components}")));
    }
    let nx = usize::try_from(long(16..24)).map_err(|e| Error::Snapshot(e.to_string()))?;
    let ntheta = usize::try_from(long(24..32)).map_err(|e| Error::Snapshot(e.to_string()))?;
    if nx == 0 || ntheta == 0 || (kind == FieldKind::Radial && ntheta != 1) {
        return Err(Error::Snapshot(format!("invalid shape {nx} x {ntheta}")));
    }
    let n = nx
        .checked_mul(ntheta)
        .ok_or_else(|| Error::Snapshot("shape overflows".into()))?;
    let mut read_field = || -> Result<Field<T>> {
        let mut bytes = vec![0u8; 8 * n];
        input.read_exact(&mut bytes).map_err(io_err)?;
        let data = bytes
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        Ok(Field::from_data(kind, nx, ntheta, data))
    };
    let u1 = read_field()?;
    let u2 = read_field()?;
    State::new(u1, u2, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Grid;

    #[test]
    fn round_trip_surface_and_radial() {
        let g = Grid::new(16, 8, 3.0).unwrap();
        let p = FhnParams::new(0.25, 0.01, 0.02).unwrap();
        let u = State::new(
            Field::surface_from_fn(&g, |x: f64, t: f64| x.sin() + t.cos()),
            Field::surface_from_fn(&g, |x, t| x * t),
            p,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_state(&mut buf, &u).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 2 * 8 * 16 * 8);
        assert_eq!(&buf[0..4], b"UNDU");
        assert_eq!(read_state(buf.as_slice(), p).unwrap(), u);

        let r = u.project_radial();
        let mut buf = Vec::new();
        write_state(&mut buf, &r).unwrap();
        assert_eq!(read_state(buf.as_slice(), p).unwrap(), r);
    }

    #[test]
    fn rejects_corrupt_input() {
        let p = FhnParams::new(0.25, 0.01, 0.02).unwrap();
        let mut buf = Vec::new();
        write_state(&mut buf, &State::zeros_radial(&Grid::new(8, 8, 1.0).unwrap(), p)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_state::<f64, _>(bad.as_slice(), p).is_err());
        assert!(read_state::<f64, _>(&buf[..buf.len() - 1], p).is_err());
    }
}
