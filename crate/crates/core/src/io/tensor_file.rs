//! Single-file tensor container.
//!
//! One UTF-8 JSON header line terminated by `\n`, for example
//!
//! ```text
//! {"dtype":"f32","shape":[1,2,2],"order":"row-major","byte_order":"little"}
//! ```
//!
//! followed immediately by `4 * product(shape)` bytes of little-endian
//! IEEE-754 binary32 values in row-major order.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    dtype: String,
    shape: Vec<usize>,
    order: String,
    byte_order: String,
}

fn element_count(shape: &[usize]) -> Option<usize> {
    shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
}

pub fn encode_tensor(data: &[f32], shape: &[usize]) -> Result<Vec<u8>> {
    let count = element_count(shape).ok_or_else(|| Error::invalid("tensor shape overflows"))?;
    if count != data.len() {
        return Err(Error::invalid(format!(
            "shape {shape:?} holds {count} values but {} were given",
            data.len()
        )));
    }
    let header = Header {
        dtype: "f32".into(),
        shape: shape.to_vec(),
        order: "row-major".into(),
        byte_order: "little".into(),
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    out.reserve(4 * data.len());
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_tensor(bytes: &[u8], origin: &str) -> Result<(Vec<f32>, Vec<usize>)> {
    let malformed = |message: String| Error::Parse {
        path: origin.to_string(),
        line: 1,
        message,
    };
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| malformed("missing header line".into()))?;
    let header: Header = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| malformed(format!("malformed header: {e}")))?;
    if header.dtype != "f32" {
        return Err(malformed(format!("unsupported dtype {:?}", header.dtype)));
    }
    if header.order != "row-major" || header.byte_order != "little" {
        return Err(malformed(format!(
            "unsupported layout {} / {}",
            header.order, header.byte_order
        )));
    }
    let count = element_count(&header.shape)
        .ok_or_else(|| malformed("tensor shape overflows".into()))?;
    let payload = &bytes[newline + 1..];
    if payload.len() != 4 * count {
        return Err(malformed(format!(
            "payload is {} bytes, shape {:?} needs {}",
            payload.len(),
            header.shape,
            4 * count
        )));
    }
    let data = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();
    Ok((data, header.shape))
}

/// Writes a tensor. Shape/count mismatches are rejected before the file is touched.
pub fn write_tensor(path: impl AsRef<Path>, data: &[f32], shape: &[usize]) -> Result<()> {
    let bytes = encode_tensor(data, shape)?;
    super::write_file(path.as_ref(), bytes)
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<(Vec<f32>, Vec<usize>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes, &path.display().to_string())
}

/// Narrows to `f32` on the way out.
pub fn write_tensor_f64(path: impl AsRef<Path>, data: &[f64], shape: &[usize]) -> Result<()> {
    let narrow: Vec<f32> = data.iter().map(|&v| v as f32).collect();
    write_tensor(path, &narrow, shape)
}

pub fn read_tensor_f64(path: impl AsRef<Path>) -> Result<(Vec<f64>, Vec<usize>)> {
    let (data, shape) = read_tensor(path)?;
    Ok((data.into_iter().map(f64::from).collect(), shape))
}
