//! Binary cube and label files. All integers and floats are little-endian.
//!
//! Cube file (`HSX1`):
//!
//! | offset | size | field                               |
//! |--------|------|-------------------------------------|
//! | 0      | 4    | magic `b"HSX1"`                     |
//! | 4      | 4    | version, `u32` = 1                  |
//! | 8      | 4    | height `H`, `u32`                   |
//! | 12     | 4    | width `W`, `u32`                    |
//! | 16     | 4    | bands `D`, `u32`                    |
//! | 20     | 4HWD | `f32` values, pixel by pixel in row-major order, bands contiguous |
//!
//! Label file (`HSL1`):
//!
//! | offset | size | field                               |
//! |--------|------|-------------------------------------|
//! | 0      | 4    | magic `b"HSL1"`                     |
//! | 4      | 4    | height `H`, `u32`                   |
//! | 8      | 4    | width `W`, `u32`                    |
//! | 12     | 4    | class count `c`, `u32` (at most 65535) |
//! | 16     | 2HW  | `u16` labels, row-major, 0 = unlabeled |

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::cube::{HyperCube, LabelRaster};
use crate::error::{HsiError, Result};

pub const CUBE_MAGIC: &[u8; 4] = b"HSX1";
pub const LABEL_MAGIC: &[u8; 4] = b"HSL1";
pub const CUBE_VERSION: u32 = 1;
pub const CUBE_HEADER_LEN: usize = 20;
pub const LABEL_HEADER_LEN: usize = 16;

fn read_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_le_bytes(b.try_into().expect("4-byte slice")))
        .ok_or_else(|| HsiError::format(offset as u64, "file ends inside the header"))
}

fn check_magic(bytes: &[u8], magic: &[u8; 4]) -> Result<()> {
    match bytes.get(..4) {
        Some(m) if m == magic => Ok(()),
        Some(m) => Err(HsiError::format(
            0,
            format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(m),
                String::from_utf8_lossy(magic)
            ),
        )),
        None => Err(HsiError::format(0, "file shorter than its magic number")),
    }
}

fn payload_len(dims: &[u32], elem: usize, offset: usize) -> Result<usize> {
    dims.iter()
        .try_fold(elem, |acc, &d| acc.checked_mul(d as usize))
        .ok_or_else(|| HsiError::format(offset as u64, "dimensions overflow"))
}

fn check_payload(bytes: &[u8], header: usize, expected: usize) -> Result<()> {
    let actual = bytes.len() - header;
    if actual < expected {
        return Err(HsiError::format(
            bytes.len() as u64,
            format!("truncated payload: {actual} of {expected} bytes"),
        ));
    }
    if actual > expected {
        return Err(HsiError::format(
            (header + expected) as u64,
            format!("{} trailing bytes after payload", actual - expected),
        ));
    }
    Ok(())
}

pub fn decode_cube(bytes: &[u8]) -> Result<HyperCube> {
    check_magic(bytes, CUBE_MAGIC)?;
    let version = read_u32(bytes, 4)?;
    if version != CUBE_VERSION {
        return Err(HsiError::format(4, format!("unsupported version {version}")));
    }
    let (h, w, d) = (read_u32(bytes, 8)?, read_u32(bytes, 12)?, read_u32(bytes, 16)?);
    if h == 0 || w == 0 || d == 0 {
        return Err(HsiError::format(8, format!("zero dimension in {h}x{w}x{d}")));
    }
    let len = payload_len(&[h, w, d], 4, 8)?;
    check_payload(bytes, CUBE_HEADER_LEN, len)?;
    let mut data = Vec::with_capacity(len / 4);
    for (n, chunk) in bytes[CUBE_HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("4-byte chunk"));
        if !v.is_finite() {
            return Err(HsiError::format(
                (CUBE_HEADER_LEN + 4 * n) as u64,
                "non-finite value",
            ));
        }
        data.push(v as f64);
    }
    HyperCube::new(h as usize, w as usize, d as usize, data)
}

pub fn encode_cube(cube: &HyperCube) -> Result<Vec<u8>> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| HsiError::shape(format!("dimension {v} exceeds u32")));
    let mut out = Vec::with_capacity(CUBE_HEADER_LEN + 4 * cube.data().len());
    out.extend_from_slice(CUBE_MAGIC);
    out.extend_from_slice(&CUBE_VERSION.to_le_bytes());
    out.extend_from_slice(&dim(cube.height())?.to_le_bytes());
    out.extend_from_slice(&dim(cube.width())?.to_le_bytes());
    out.extend_from_slice(&dim(cube.bands())?.to_le_bytes());
    for &v in cube.data() {
        let f = v as f32;
        if !f.is_finite() {
            return Err(HsiError::shape(format!("value {v} does not fit in f32")));
        }
        out.extend_from_slice(&f.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_labels(bytes: &[u8]) -> Result<LabelRaster> {
    check_magic(bytes, LABEL_MAGIC)?;
    let (h, w, c) = (read_u32(bytes, 4)?, read_u32(bytes, 8)?, read_u32(bytes, 12)?);
    if h == 0 || w == 0 {
        return Err(HsiError::format(4, format!("zero dimension in {h}x{w}")));
    }
    if c == 0 || c > u16::MAX as u32 {
        return Err(HsiError::format(12, format!("class count {c} outside 1..=65535")));
    }
    let len = payload_len(&[h, w], 2, 4)?;
    check_payload(bytes, LABEL_HEADER_LEN, len)?;
    let mut labels = Vec::with_capacity(len / 2);
    for (n, chunk) in bytes[LABEL_HEADER_LEN..].chunks_exact(2).enumerate() {
        let l = u16::from_le_bytes([chunk[0], chunk[1]]);
        if l as u32 > c {
            return Err(HsiError::format(
                (LABEL_HEADER_LEN + 2 * n) as u64,
                format!("label {l} exceeds class count {c}"),
            ));
        }
        labels.push(l);
    }
    LabelRaster::new(h as usize, w as usize, c as u16, labels)
}

pub fn encode_labels(labels: &LabelRaster) -> Result<Vec<u8>> {
    let dim = |v: usize| u32::try_from(v).map_err(|_| HsiError::shape(format!("dimension {v} exceeds u32")));
    let mut out = Vec::with_capacity(LABEL_HEADER_LEN + 2 * labels.labels().len());
    out.extend_from_slice(LABEL_MAGIC);
    out.extend_from_slice(&dim(labels.height())?.to_le_bytes());
    out.extend_from_slice(&dim(labels.width())?.to_le_bytes());
    out.extend_from_slice(&(labels.classes() as u32).to_le_bytes());
    for &l in labels.labels() {
        out.extend_from_slice(&l.to_le_bytes());
    }
    Ok(out)
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| HsiError::Io(e.error))?;
    Ok(())
}

pub fn load_cube(path: &Path) -> Result<HyperCube> {
    decode_cube(&fs::read(path)?)
}

pub fn save_cube(cube: &HyperCube, path: &Path) -> Result<()> {
    write_atomic(path, &encode_cube(cube)?)
}

pub fn load_labels(path: &Path) -> Result<LabelRaster> {
    decode_labels(&fs::read(path)?)
}

pub fn save_labels(labels: &LabelRaster, path: &Path) -> Result<()> {
    write_atomic(path, &encode_labels(labels)?)
}
