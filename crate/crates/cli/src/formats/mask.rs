//! Sampling masks as binary PBM (P4, 1 = sampled) plus a JSON sidecar with
//! the map's origin.

use std::path::Path;

use mlcs_core::sampling::{SamplingMap, Scheme};
use mlcs_core::Shape;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSidecar {
    pub shape: Shape,
    pub seed: u64,
    pub scheme: Scheme,
    pub level_counts: Vec<usize>,
    pub samples: usize,
    pub fraction: f64,
}

impl MaskSidecar {
    pub fn of(map: &SamplingMap) -> Self {
        MaskSidecar {
            shape: map.shape,
            seed: map.seed,
            scheme: map.scheme.clone(),
            level_counts: map.level_counts.clone(),
            samples: map.m(),
            fraction: map.fraction(),
        }
    }
}

fn dims(shape: Shape) -> (usize, usize) {
    match shape {
        Shape::D1(n) => (n, 1),
        Shape::D2(n) => (n, n),
    }
}

pub fn encode_pbm(mask: &[bool], width: usize, height: usize) -> Vec<u8> {
    let mut out = format!("P4\n{width} {height}\n").into_bytes();
    let stride = width.div_ceil(8);
    for row in mask.chunks(width).take(height) {
        let mut packed = vec![0u8; stride];
        for (c, _) in row.iter().enumerate().filter(|(_, &b)| b) {
            packed[c / 8] |= 0x80 >> (c % 8);
        }
        out.extend_from_slice(&packed);
    }
    out
}

/// Parses a P4 file; comments in the header are skipped.
pub fn decode_pbm(bytes: &[u8], path: &Path) -> Result<(Vec<bool>, usize, usize)> {
    let bad = |m: &str| CliError::malformed(path, m.to_string());
    let mut pos = 0;
    let mut fields = Vec::new();
    while fields.len() < 3 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad("truncated PBM header"));
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad("non-ASCII PBM header"))?);
    }
    if fields[0] != "P4" {
        return Err(bad("not a binary PBM (P4) file"));
    }
    let width: usize = fields[1].parse().map_err(|_| bad("bad PBM width"))?;
    let height: usize = fields[2].parse().map_err(|_| bad("bad PBM height"))?;
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let stride = width.div_ceil(8);
    let raster = bytes.get(pos..pos + stride * height).ok_or_else(|| bad("truncated PBM raster"))?;
    let mut mask = Vec::with_capacity(width * height);
    for row in raster.chunks(stride) {
        mask.extend((0..width).map(|c| row[c / 8] & (0x80 >> (c % 8)) != 0));
    }
    Ok((mask, width, height))
}

/// Writes `<stem>.pbm` and `<stem>.json`.
pub fn write_mask(pbm: &Path, json: &Path, map: &SamplingMap) -> Result<()> {
    let (w, h) = dims(map.shape);
    std::fs::write(pbm, encode_pbm(&map.mask, w, h)).map_err(|e| CliError::io(pbm, e))?;
    let text = serde_json::to_string_pretty(&MaskSidecar::of(map)).expect("sidecar serialises");
    std::fs::write(json, text).map_err(|e| CliError::io(json, e))
}

pub fn read_mask(pbm: &Path, json: &Path) -> Result<SamplingMap> {
    let bytes = std::fs::read(pbm).map_err(|e| CliError::io(pbm, e))?;
    let (mask, w, h) = decode_pbm(&bytes, pbm)?;
    let text = std::fs::read_to_string(json).map_err(|e| CliError::io(json, e))?;
    let meta: MaskSidecar = serde_json::from_str(&text).map_err(|e| CliError::malformed(json, e.to_string()))?;
    if dims(meta.shape) != (w, h) {
        return Err(CliError::malformed(pbm, format!("{w}x{h} raster but the sidecar says {:?}", meta.shape)));
    }
    if mask.iter().filter(|&&b| b).count() != meta.samples {
        return Err(CliError::malformed(pbm, "sample count disagrees with the sidecar"));
    }
    Ok(SamplingMap { shape: meta.shape, mask, seed: meta.seed, scheme: meta.scheme, level_counts: meta.level_counts })
}
