//! Dense numerical core: matrices, MLPs with hand-derived gradients, Adam,
//! softmax cross-entropy, a seeded RNG and a finite-difference checker.

mod adam;
pub mod checkpoint;
pub mod gradcheck;
mod loss;
mod matrix;
mod mlp;
mod param;
mod rng;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, fill_parameters};
pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport};
pub use loss::{argmax_rows, softmax_cross_entropy};
pub use matrix::Matrix;
pub use mlp::{Dense, Mlp, MlpCache};
pub use param::{Parameter, Parameterized};
pub use rng::{derive_seed, Rng};
