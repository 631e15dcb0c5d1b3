//! WebAssembly bindings for the browser demo. The `demo` module holds the
//! plain Rust logic; the exported functions only move JSON across.

pub mod demo;

use wasm_bindgen::prelude::*;

/// Synthetic benchmark preview as JSON. `config` is a JSON [`demo::DemoConfig`].
#[wasm_bindgen]
pub fn preview(config: &str) -> Result<String, JsError> {
    let cfg = demo::DemoConfig::from_json(config).map_err(|e| JsError::new(&e))?;
    let out = demo::preview(&cfg).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(serde_json::to_string(&out)?)
}

/// λ for every training step.
#[wasm_bindgen]
pub fn warmup_curve(lambda_max: f64, warmup_fraction: f64, epochs: usize, steps_per_epoch: usize) -> Vec<f64> {
    demo::warmup_curve(lambda_max, warmup_fraction, epochs, steps_per_epoch)
}

/// Trains on one split and scores Source-Only against CCVAE, as JSON.
#[wasm_bindgen]
pub fn run_split(config: &str) -> Result<String, JsError> {
    let cfg = demo::DemoConfig::from_json(config).map_err(|e| JsError::new(&e))?;
    let out = demo::run_split(&cfg).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(serde_json::to_string(&out)?)
}
