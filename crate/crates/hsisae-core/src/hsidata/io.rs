//! File formats: HSC cubes, PGM label maps and CSV label lists.
//!
//! HSC is a single JSON header line terminated by `\n`:
//!
//! ```text
//! {"magic":"HSC1","width":W,"height":H,"bands":B,"dtype":"f32","layout":"bsq"}
//! ```
//!
//! followed by W*H*B little-endian 32-bit floats, band-sequential
//! (band-major, then row-major within a band).
//!
//! Ground truth is either a 16-bit binary PGM (P5, big-endian samples, the
//! PGM convention) or a CSV of `row,col,label` lines; label 0 means
//! unlabeled in both.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{GroundTruth, HsiCube};
use crate::error::{Error, Result};

/// Parsed HSC header.
#[derive(Debug, Clone, Deserialize)]
pub struct CubeHeader {
    pub magic: String,
    pub width: usize,
    pub height: usize,
    pub bands: usize,
    pub dtype: String,
    pub layout: String,
}

fn path_str(path: &Path) -> String {
    path.display().to_string()
}

/// Write a cube as HSC. Values are stored as f32.
pub fn save_cube(cube: &HsiCube, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(96 + cube.data().len() * 4);
    bytes.extend_from_slice(
        format!(
            "{{\"magic\":\"HSC1\",\"width\":{},\"height\":{},\"bands\":{},\"dtype\":\"f32\",\"layout\":\"bsq\"}}\n",
            cube.width(),
            cube.height(),
            cube.bands()
        )
        .as_bytes(),
    );
    for &v in cube.data() {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path_str(path), e))
}

/// Read an HSC cube and its header.
pub fn load_cube(path: &Path) -> Result<(HsiCube, CubeHeader)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path_str(path), e))?;
    let newline = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::data(path_str(path), "missing header line"))?;
    let header: CubeHeader = serde_json::from_slice(&bytes[..newline])
        .map_err(|e| Error::data(path_str(path), format!("malformed header: {e}")))?;
    if header.magic != "HSC1" {
        return Err(Error::data(
            path_str(path),
            format!("field \"magic\": expected \"HSC1\", got {:?}", header.magic),
        ));
    }
    if header.dtype != "f32" {
        return Err(Error::data(
            path_str(path),
            format!("field \"dtype\": expected \"f32\", got {:?}", header.dtype),
        ));
    }
    if header.layout != "bsq" {
        return Err(Error::data(
            path_str(path),
            format!("field \"layout\": expected \"bsq\", got {:?}", header.layout),
        ));
    }
    if header.width == 0 || header.height == 0 || header.bands == 0 {
        return Err(Error::data(
            path_str(path),
            format!(
                "fields width/height/bands must be positive, got {}x{}x{}",
                header.width, header.height, header.bands
            ),
        ));
    }
    let expected = header.width * header.height * header.bands;
    let payload = &bytes[newline + 1..];
    if payload.len() != expected * 4 {
        return Err(Error::data(
            path_str(path),
            format!(
                "payload holds {} bytes ({} floats) but width*height*bands = {} requires {} bytes",
                payload.len(),
                payload.len() / 4,
                expected,
                expected * 4
            ),
        ));
    }
    let data: Vec<f64> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    let cube = HsiCube::new(header.width, header.height, header.bands, data)?;
    Ok((cube, header))
}

/// Write ground truth as a 16-bit binary PGM (maxval 65535).
pub fn save_labels_pgm(gt: &GroundTruth, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(32 + gt.labels().len() * 2);
    bytes.extend_from_slice(format!("P5\n{} {}\n65535\n", gt.width(), gt.height()).as_bytes());
    for &label in gt.labels() {
        bytes.extend_from_slice(&label.to_be_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path_str(path), e))
}

/// Read a binary PGM label map. Accepts 8-bit and 16-bit sample sizes.
pub fn load_labels_pgm(path: &Path) -> Result<GroundTruth> {
    let bytes = fs::read(path).map_err(|e| Error::io(path_str(path), e))?;
    let mut pos = 0;

    let mut token = |what: &str| -> Result<String> {
        // Skip whitespace and '#' comment lines between header tokens.
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::data(
                path_str(path),
                format!("truncated header, missing {what}"),
            ));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = token("magic")?;
    if magic != "P5" {
        return Err(Error::data(
            path_str(path),
            format!("expected binary PGM magic \"P5\", got {magic:?}"),
        ));
    }
    let width: usize = token("width")?
        .parse()
        .map_err(|_| Error::data(path_str(path), "width is not a number"))?;
    let height: usize = token("height")?
        .parse()
        .map_err(|_| Error::data(path_str(path), "height is not a number"))?;
    let maxval: u32 = token("maxval")?
        .parse()
        .map_err(|_| Error::data(path_str(path), "maxval is not a number"))?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::data(
            path_str(path),
            format!("maxval must be in 1..=65535, got {maxval}"),
        ));
    }
    // Exactly one whitespace byte separates the header from the payload.
    pos += 1;
    let payload = &bytes[pos.min(bytes.len())..];
    let n = width * height;
    let labels: Vec<u16> = if maxval > 255 {
        if payload.len() != n * 2 {
            return Err(Error::data(
                path_str(path),
                format!(
                    "payload holds {} bytes but {width}x{height} 16-bit needs {}",
                    payload.len(),
                    n * 2
                ),
            ));
        }
        payload
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    } else {
        if payload.len() != n {
            return Err(Error::data(
                path_str(path),
                format!(
                    "payload holds {} bytes but {width}x{height} 8-bit needs {n}",
                    payload.len()
                ),
            ));
        }
        payload.iter().map(|&b| b as u16).collect()
    };
    GroundTruth::new(width, height, labels)
}

/// Read a `row,col,label` CSV into a label map of the given size.
///
/// A literal `row,col,label` header line is allowed. Pixels not listed stay
/// unlabeled (0).
pub fn load_labels_csv(path: &Path, width: usize, height: usize) -> Result<GroundTruth> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path_str(path), e))?;
    let mut labels = vec![0u16; width * height];
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 && line.eq_ignore_ascii_case("row,col,label") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(Error::data(
                path_str(path),
                format!("line {}: expected row,col,label", lineno + 1),
            ));
        }
        let parse = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| {
                Error::data(
                    path_str(path),
                    format!("line {}: {what} {s:?} is not a number", lineno + 1),
                )
            })
        };
        let row = parse(fields[0], "row")?;
        let col = parse(fields[1], "col")?;
        let label = parse(fields[2], "label")?;
        if row >= height || col >= width {
            return Err(Error::data(
                path_str(path),
                format!(
                    "line {}: pixel ({row},{col}) outside {width}x{height}",
                    lineno + 1
                ),
            ));
        }
        if label > u16::MAX as usize {
            return Err(Error::data(
                path_str(path),
                format!("line {}: label {label} exceeds 65535", lineno + 1),
            ));
        }
        labels[row * width + col] = label as u16;
    }
    GroundTruth::new(width, height, labels)
}
