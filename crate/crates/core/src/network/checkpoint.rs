//! Model checkpoints.
//!
//! Layout: the 8 magic bytes `HGMODEL1`, a little-endian `u32` byte length `n`, `n` bytes of
//! UTF-8 canonical config text (see [`NetworkConfig::to_canonical_text`]), then every parameter
//! block of [`ModelParams::blocks`] as little-endian `f32` values, nothing after.

use std::fs;
use std::path::Path;

use crate::network::{ModelParams, NetworkConfig};
use crate::{Error, Result};

pub const MAGIC: &[u8; 8] = b"HGMODEL1";

pub fn encode_checkpoint(cfg: &NetworkConfig, params: &ModelParams<f32>) -> Result<Vec<u8>> {
    let expected = ModelParams::<f32>::zeros(cfg)?;
    params.check_shape(&expected)?;
    let text = cfg.to_canonical_text();
    let mut out = Vec::with_capacity(12 + text.len() + 4 * params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(text.len() as u32).to_le_bytes());
    out.extend_from_slice(text.as_bytes());
    for block in params.blocks() {
        for v in block.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<(NetworkConfig, ModelParams<f32>)> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(Error::Format("missing HGMODEL1 magic".into()));
    }
    let text_len = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
    let text_end = 12usize
        .checked_add(text_len)
        .filter(|&e| e <= bytes.len())
        .ok_or_else(|| Error::Format("config text runs past end of file".into()))?;
    let text = std::str::from_utf8(&bytes[12..text_end]).map_err(|_| Error::Format("config text is not UTF-8".into()))?;
    let cfg = NetworkConfig::from_canonical_text(text)?;
    let mut params = ModelParams::<f32>::zeros(&cfg)?;
    let payload = &bytes[text_end..];
    let expected = 4 * params.len();
    if payload.len() != expected {
        return Err(Error::SizeMismatch { expected, found: payload.len() });
    }
    let mut values = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")));
    for block in params.blocks_mut() {
        for v in block.data_mut() {
            *v = values.next().expect("length checked");
        }
    }
    Ok((cfg, params))
}

pub fn save_checkpoint(path: impl AsRef<Path>, cfg: &NetworkConfig, params: &ModelParams<f32>) -> Result<()> {
    fs::write(path, encode_checkpoint(cfg, params)?)?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<(NetworkConfig, ModelParams<f32>)> {
    decode_checkpoint(&fs::read(path)?)
}
