//! File formats: BSAR binary matrices, PGM magnitude renders and JSON sidecars.
//!
//! BSAR layout (little-endian):
//!
//! ```text
//! 0   magic    "BSAR"
//! 4   u16      version = 1
//! 6   u16      flags (bit 0: focused)
//! 8   u32      rows
//! 12  u32      cols
//! 16  [u8;16]  reserved, zero
//! 32  payload  rows·cols × (f32 I, f32 Q), row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimate::{BlindEstimate, EstimateOptions};
use crate::matrix::ComplexMatrix;

pub const MAGIC: &[u8; 4] = b"BSAR";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
pub const FLAG_FOCUSED: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsarHeader {
    pub version: u16,
    pub flags: u16,
    pub rows: u32,
    pub cols: u32,
}

impl BsarHeader {
    pub fn focused(&self) -> bool {
        self.flags & FLAG_FOCUSED != 0
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[0..4].copy_from_slice(MAGIC);
        h[4..6].copy_from_slice(&self.version.to_le_bytes());
        h[6..8].copy_from_slice(&self.flags.to_le_bytes());
        h[8..12].copy_from_slice(&self.rows.to_le_bytes());
        h[12..16].copy_from_slice(&self.cols.to_le_bytes());
        h
    }

    pub fn parse(h: &[u8]) -> Result<Self> {
        if h.len() < HEADER_LEN {
            return Err(Error::format(h.len() as u64, "truncated header"));
        }
        if &h[0..4] != MAGIC {
            return Err(Error::format(0, format!("bad magic {:?}", String::from_utf8_lossy(&h[0..4]))));
        }
        let version = u16::from_le_bytes([h[4], h[5]]);
        if version != VERSION {
            return Err(Error::format(4, format!("unsupported version {version}")));
        }
        let flags = u16::from_le_bytes([h[6], h[7]]);
        let rows = u32::from_le_bytes(h[8..12].try_into().unwrap());
        let cols = u32::from_le_bytes(h[12..16].try_into().unwrap());
        if rows == 0 {
            return Err(Error::format(8, "zero rows"));
        }
        if cols == 0 {
            return Err(Error::format(12, "zero columns"));
        }
        Ok(Self {
            version,
            flags,
            rows,
            cols,
        })
    }
}

pub fn encode_matrix(matrix: &ComplexMatrix, flags: u16) -> Result<Vec<u8>> {
    let (rows, cols) = matrix.shape();
    let header = BsarHeader {
        version: VERSION,
        flags,
        rows: u32::try_from(rows).map_err(|_| Error::param("too many rows for BSAR"))?,
        cols: u32::try_from(cols).map_err(|_| Error::param("too many columns for BSAR"))?,
    };
    let mut out = Vec::with_capacity(HEADER_LEN + rows * cols * 8);
    out.extend_from_slice(&header.to_bytes());
    for v in matrix.as_slice() {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    Ok(out)
}

pub fn decode_matrix(bytes: &[u8]) -> Result<(ComplexMatrix, BsarHeader)> {
    let header = BsarHeader::parse(bytes)?;
    let count = header.rows as usize * header.cols as usize;
    let need = HEADER_LEN + count * 8;
    if bytes.len() < need {
        return Err(Error::format(
            bytes.len() as u64,
            format!("truncated payload: expected {need} bytes, found {}", bytes.len()),
        ));
    }
    if bytes.len() > need {
        return Err(Error::format(need as u64, "trailing bytes after payload"));
    }
    let data = bytes[HEADER_LEN..need]
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes(c[0..4].try_into().unwrap());
            let im = f32::from_le_bytes(c[4..8].try_into().unwrap());
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    Ok((ComplexMatrix::from_vec(header.rows as usize, header.cols as usize, data)?, header))
}

pub fn write_matrix(matrix: &ComplexMatrix, path: impl AsRef<Path>, flags: u16) -> Result<()> {
    let bytes = encode_matrix(matrix, flags)?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<(ComplexMatrix, BsarHeader)> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_matrix(&bytes)
}

/// Rounds every sample through `f32`, as a write/read cycle would.
pub fn quantize(matrix: &ComplexMatrix) -> ComplexMatrix {
    let data = matrix
        .as_slice()
        .iter()
        .map(|v| Complex64::new(v.re as f32 as f64, v.im as f32 as f64))
        .collect();
    ComplexMatrix::from_vec(matrix.rows(), matrix.cols(), data).expect("shape preserved")
}

/// 8-bit PGM (P5) of `20·log10(|z| / max|z|)` mapped from `[db_floor, 0]` to `[0, 255]`.
/// The flag is false when the input is all zero and the image is black.
pub fn render_pgm(matrix: &ComplexMatrix, db_floor: f64) -> Result<(Vec<u8>, bool)> {
    if !(db_floor < 0.0) {
        return Err(Error::param(format!("db floor {db_floor} must be negative")));
    }
    let (rows, cols) = matrix.shape();
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    let peak = matrix.max_abs();
    if peak == 0.0 {
        out.resize(out.len() + rows * cols, 0);
        return Ok((out, false));
    }
    out.extend(matrix.as_slice().iter().map(|v| {
        let db = 20.0 * (v.norm() / peak).log10();
        let x = (db - db_floor) / -db_floor * 255.0;
        x.round().clamp(0.0, 255.0) as u8
    }));
    Ok((out, true))
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Self-describing estimate file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateDocument {
    pub tool_version: String,
    /// SHA-256 of the options as JSON.
    pub config_hash: String,
    pub options: EstimateOptions,
    pub estimate: BlindEstimate,
}

impl EstimateDocument {
    pub fn new(options: EstimateOptions, estimate: BlindEstimate) -> Result<Self> {
        Ok(Self {
            tool_version: TOOL_VERSION.to_string(),
            config_hash: sha256_hex(&serde_json::to_vec(&options)?),
            options,
            estimate,
        })
    }

    /// Identifier of the estimate content.
    pub fn estimate_hash(&self) -> Result<String> {
        Ok(sha256_hex(&serde_json::to_vec(&self.estimate)?))
    }
}
