//! Versioned binary container shared by model checkpoints: magic bytes, a
//! `u32` little-endian header length, a JSON header with sorted keys, then
//! every parameter value as little-endian `f64` in declaration order.

use serde_json::Value;

use super::Parameter;
use crate::error::{Error, Result};

pub fn encode_checkpoint<'a>(magic: &[u8], header: &Value, params: impl IntoIterator<Item = &'a Parameter>) -> Result<Vec<u8>> {
    let header_bytes = serde_json::to_vec(header)?;
    let header_len = u32::try_from(header_bytes.len())
        .map_err(|_| Error::Header("checkpoint header exceeds 4 GiB".into()))?;
    let mut out = Vec::with_capacity(magic.len() + 4 + header_bytes.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&header_bytes);
    for p in params {
        for v in p.value.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Splits a checkpoint into its parsed header and the raw parameter bytes.
pub fn decode_checkpoint<'b>(magic: &[u8], bytes: &'b [u8]) -> Result<(Value, &'b [u8])> {
    if bytes.len() < magic.len() || &bytes[..magic.len()] != magic {
        return Err(Error::Header(format!(
            "bad magic, expected {:?}",
            String::from_utf8_lossy(magic)
        )));
    }
    let rest = &bytes[magic.len()..];
    if rest.len() < 4 {
        return Err(Error::Truncated {
            offset: bytes.len(),
            msg: "missing header length".into(),
        });
    }
    let len = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
    let rest = &rest[4..];
    if rest.len() < len {
        return Err(Error::Truncated {
            offset: bytes.len(),
            msg: format!("header declares {len} bytes, {} present", rest.len()),
        });
    }
    let header = serde_json::from_slice(&rest[..len])?;
    Ok((header, &rest[len..]))
}

/// Overwrites parameter values from `payload`; its length must match exactly.
pub fn fill_parameters<'a>(payload: &[u8], params: impl IntoIterator<Item = &'a mut Parameter>) -> Result<()> {
    let mut chunks = payload.chunks_exact(8);
    let mut read = 0usize;
    for p in params {
        for v in p.value.data_mut() {
            let chunk = chunks.next().ok_or_else(|| Error::Truncated {
                offset: read * 8,
                msg: format!("parameter {} is incomplete", p.name),
            })?;
            *v = f64::from_le_bytes(chunk.try_into().expect("8 bytes"));
            read += 1;
        }
    }
    if !chunks.remainder().is_empty() || chunks.next().is_some() {
        return Err(Error::Header(format!(
            "{} trailing bytes after parameters",
            payload.len() - read * 8
        )));
    }
    Ok(())
}
