//! Shared model file helpers: one JSON header line ending in `\n`,
//! followed by a little-endian 64-bit float payload.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

pub(crate) fn path_str(path: &Path) -> String {
    path.display().to_string()
}

pub(crate) fn write_model(path: &Path, header: String, payload: &[f64]) -> Result<()> {
    let mut bytes = Vec::with_capacity(header.len() + 1 + payload.len() * 8);
    bytes.extend_from_slice(header.as_bytes());
    bytes.push(b'\n');
    for &v in payload {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path_str(path), e))
}

pub(crate) fn read_model<H: DeserializeOwned>(path: &Path) -> Result<(H, Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path_str(path), e))?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::data(path_str(path), "missing header line"))?;
    let header: H = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::data(path_str(path), format!("malformed header: {e}")))?;
    let payload = &bytes[newline + 1..];
    if payload.len() % 8 != 0 {
        return Err(Error::data(
            path_str(path),
            format!("payload of {} bytes is not a whole number of f64s", payload.len()),
        ));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, values))
}

pub(crate) fn expect_len(path: &Path, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::data(
            path_str(path),
            format!("payload holds {got} floats but the header requires {want}"),
        ));
    }
    Ok(())
}
