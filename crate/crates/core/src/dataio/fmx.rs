//! The FMX1 matrix container.
//!
//! ```text
//! "FMX1" | u32 LE header length H | H bytes UTF-8 JSON | rows·cols f32 LE, row-major
//! ```
//!
//! The JSON header always carries `rows`, `cols`, `ids` (one per row) and
//! `labels` (one per row, or `null`). Any other keys are kept in
//! [`FmxFile::extra`] and written back in sorted order.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"FMX1";

#[derive(Debug, Clone, PartialEq)]
pub struct FmxFile {
    pub rows: usize,
    pub cols: usize,
    pub ids: Vec<String>,
    pub labels: Option<Vec<String>>,
    pub extra: Map<String, Value>,
    /// row-major payload
    pub data: Vec<f32>,
}

impl FmxFile {
    pub fn from_matrix(
        m: &DMatrix<f64>,
        ids: Vec<String>,
        labels: Option<Vec<String>>,
    ) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| m.row(i).iter().map(|&v| v as f32).collect::<Vec<_>>())
            .collect();
        FmxFile {
            rows: m.nrows(),
            cols: m.ncols(),
            ids,
            labels,
            extra: Map::new(),
            data,
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_iterator(self.rows, self.cols, self.data.iter().map(|&v| f64::from(v)))
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut header = self.extra.clone();
        header.insert("rows".into(), self.rows.into());
        header.insert("cols".into(), self.cols.into());
        header.insert("ids".into(), self.ids.clone().into());
        header.insert(
            "labels".into(),
            self.labels.clone().map_or(Value::Null, Value::from),
        );
        let header = Value::Object(header).to_string();
        let mut out = Vec::with_capacity(8 + header.len() + 4 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(header.len() as u32).to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// `path` only labels errors.
    pub fn decode(bytes: &[u8], path: &Path) -> Result<Self> {
        let header_err = |msg: String| Error::Header {
            path: path.to_path_buf(),
            msg,
        };
        if bytes.len() < 4 || &bytes[..4] != MAGIC {
            return Err(Error::BadMagic {
                path: path.to_path_buf(),
                found: bytes[..bytes.len().min(4)].to_vec(),
            });
        }
        if bytes.len() < 8 {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected: 8,
                found: bytes.len(),
            });
        }
        let hlen = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let body = &bytes[8..];
        if body.len() < hlen {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected: 8 + hlen,
                found: bytes.len(),
            });
        }
        let header: Value = serde_json::from_slice(&body[..hlen])
            .map_err(|e| header_err(format!("invalid header JSON: {e}")))?;
        let Value::Object(mut header) = header else {
            return Err(header_err("header is not a JSON object".into()));
        };

        let mut dim = |key: &str| -> Result<usize> {
            header
                .remove(key)
                .and_then(|v| v.as_u64())
                .map(|v| v as usize)
                .ok_or_else(|| header_err(format!("missing or invalid \"{key}\"")))
        };
        let rows = dim("rows")?;
        let cols = dim("cols")?;
        let strings = |v: Value, key: &str| -> Result<Vec<String>> {
            match v {
                Value::Array(items) => items
                    .into_iter()
                    .map(|s| match s {
                        Value::String(s) => Ok(s),
                        _ => Err(header_err(format!("\"{key}\" must hold strings"))),
                    })
                    .collect(),
                _ => Err(header_err(format!("\"{key}\" must be an array"))),
            }
        };
        let ids = strings(
            header
                .remove("ids")
                .ok_or_else(|| header_err("missing \"ids\"".into()))?,
            "ids",
        )?;
        let labels = match header.remove("labels") {
            None | Some(Value::Null) => None,
            Some(v) => Some(strings(v, "labels")?),
        };
        if ids.len() != rows {
            return Err(header_err(format!("{} ids for {rows} rows", ids.len())));
        }
        if let Some(l) = &labels {
            if l.len() != rows {
                return Err(header_err(format!("{} labels for {rows} rows", l.len())));
            }
        }

        let payload = &body[hlen..];
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| header_err("dimensions overflow".into()))?;
        if payload.len() < expected {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected,
                found: payload.len(),
            });
        }
        if payload.len() > expected {
            return Err(header_err(format!(
                "payload has {} bytes but header declares {rows}x{cols} ({expected} bytes)",
                payload.len()
            )));
        }
        let data: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(header_err(format!(
                "non-finite value at row {}, column {}",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(FmxFile {
            rows,
            cols,
            ids,
            labels,
            extra: header,
            data,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode(&bytes, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()).map_err(|e| Error::io(path, e))
    }

    pub fn extra_f64(&self, key: &str, path: &Path) -> Result<f64> {
        self.extra
            .get(key)
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Header {
                path: PathBuf::from(path),
                msg: format!("missing or invalid \"{key}\""),
            })
    }
}
