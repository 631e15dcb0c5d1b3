use std::path::Path;

use serde_json::{json, Value};

use super::model::{CcvaeDims, CcvaeModel};
use crate::error::{Error, Result};
use crate::nn::{decode_checkpoint, encode_checkpoint, fill_parameters, Parameterized};

pub const CCVAE_MAGIC: &[u8] = b"CCVAE1";

fn layer_sizes(dims: &[usize]) -> Vec<[usize; 2]> {
    dims.windows(2).map(|w| [w[0], w[1]]).collect()
}

/// Serializes the model with `config` echoed into the header.
pub fn checkpoint_bytes(model: &CcvaeModel, config: &Value) -> Result<Vec<u8>> {
    let dims = model.dims();
    let header = json!({
        "config": config,
        "decoder_layers": layer_sizes(&dims.decoder_dims()),
        "dims": dims,
        "encoder_layers": layer_sizes(&dims.encoder_dims()),
    });
    encode_checkpoint(CCVAE_MAGIC, &header, model.parameters())
}

/// Returns the model and the config echo stored with it.
pub fn checkpoint_from_bytes(bytes: &[u8]) -> Result<(CcvaeModel, Value)> {
    let (mut header, payload) = decode_checkpoint(CCVAE_MAGIC, bytes)?;
    let dims: CcvaeDims = serde_json::from_value(header.get("dims").cloned().unwrap_or(Value::Null))?;
    let expect = json!({
        "decoder_layers": layer_sizes(&dims.decoder_dims()),
        "encoder_layers": layer_sizes(&dims.encoder_dims()),
    });
    for key in ["decoder_layers", "encoder_layers"] {
        if header.get(key) != expect.get(key) {
            return Err(Error::Header(format!("{key} disagree with dims {dims:?}")));
        }
    }
    let mut model = CcvaeModel::zeros(dims)?;
    fill_parameters(payload, model.parameters_mut())?;
    let config = header.get_mut("config").map(Value::take).unwrap_or(Value::Null);
    Ok((model, config))
}

pub fn save_checkpoint(model: &CcvaeModel, config: &Value, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_bytes(model, config)?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(CcvaeModel, Value)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    checkpoint_from_bytes(&bytes)
}
