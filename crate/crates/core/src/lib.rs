//! Coupled conditional variational autoencoder (CCVAE) for generalized
//! zero-shot domain adaptation over precomputed feature vectors.
//!
//! The pipeline trains one domain-conditioned VAE on same-class
//! source/target pairs, uses cross-domain decoding to synthesize target
//! features for classes that have no labelled target data, and trains a
//! linear classifier on real plus synthetic features. [`eval`] runs that
//! pipeline against Source-Only and Baseline(1NN/NN) under the seen/unseen
//! harmonic-mean protocol.

pub mod ccvae;
pub mod classify;
pub mod commands;
pub mod data;
pub mod error;
pub mod eval;
pub mod nn;

pub use error::{Error, Result};
