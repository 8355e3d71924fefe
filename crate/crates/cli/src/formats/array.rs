//! Raw little-endian arrays with a JSON sidecar describing type and shape.

use std::path::Path;

use mlcs_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    F64(Vec<f64>),
    /// Interleaved real and imaginary parts.
    C64(Vec<C64>),
    U64(Vec<u64>),
}

impl ArrayData {
    pub fn dtype(&self) -> &'static str {
        match self {
            ArrayData::F64(_) => "f64",
            ArrayData::C64(_) => "c64",
            ArrayData::U64(_) => "u64",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ArrayData::F64(v) => v.len(),
            ArrayData::C64(v) => v.len(),
            ArrayData::U64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            ArrayData::F64(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
            ArrayData::C64(v) => v.iter().flat_map(|z| [z.re.to_le_bytes(), z.im.to_le_bytes()]).flatten().collect(),
            ArrayData::U64(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        }
    }
}

/// Sidecar contents. `extra` carries producer-specific metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayMeta {
    pub dtype: String,
    pub byte_order: String,
    pub shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub extra: serde_json::Value,
}

impl ArrayMeta {
    pub fn new(data: &ArrayData, shape: Vec<usize>, extra: serde_json::Value) -> Self {
        ArrayMeta { dtype: data.dtype().into(), byte_order: "little".into(), shape, extra }
    }
}

/// Writes `<stem>.bin` and `<stem>.json`.
pub fn write_array(bin: &Path, json: &Path, data: &ArrayData, meta: &ArrayMeta) -> Result<()> {
    if meta.shape.iter().product::<usize>() != data.len() {
        return Err(CliError::validation("array.shape", format!("shape {:?} does not hold {} values", meta.shape, data.len())));
    }
    std::fs::write(bin, data.to_bytes()).map_err(|e| CliError::io(bin, e))?;
    let text = serde_json::to_string_pretty(meta).expect("metadata serialises");
    std::fs::write(json, text).map_err(|e| CliError::io(json, e))
}

pub fn read_array(bin: &Path, json: &Path) -> Result<(ArrayData, ArrayMeta)> {
    let text = std::fs::read_to_string(json).map_err(|e| CliError::io(json, e))?;
    let meta: ArrayMeta = serde_json::from_str(&text).map_err(|e| CliError::malformed(json, e.to_string()))?;
    if meta.byte_order != "little" {
        return Err(CliError::malformed(json, "only little-endian arrays are supported"));
    }
    let bytes = std::fs::read(bin).map_err(|e| CliError::io(bin, e))?;
    let count: usize = meta.shape.iter().product();
    let width = if meta.dtype == "c64" { 16 } else { 8 };
    if bytes.len() != count * width {
        return Err(CliError::malformed(bin, format!("{} bytes for shape {:?} of {}", bytes.len(), meta.shape, meta.dtype)));
    }
    let word = |c: &[u8]| <[u8; 8]>::try_from(c).expect("8-byte chunk");
    let data = match meta.dtype.as_str() {
        "f64" => ArrayData::F64(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(word(c))).collect()),
        "u64" => ArrayData::U64(bytes.chunks_exact(8).map(|c| u64::from_le_bytes(word(c))).collect()),
        "c64" => ArrayData::C64(
            bytes
                .chunks_exact(16)
                .map(|c| C64::new(f64::from_le_bytes(word(&c[..8])), f64::from_le_bytes(word(&c[8..]))))
                .collect(),
        ),
        other => return Err(CliError::malformed(json, format!("unknown dtype `{other}`"))),
    };
    Ok((data, meta))
}
