//! The coupled conditional VAE: a single domain-conditioned encoder/decoder
//! pair trained with within-domain and cross-domain reconstruction.

mod checkpoint;
mod generate;
mod loss;
mod model;
mod train;

pub use checkpoint::{checkpoint_bytes, checkpoint_from_bytes, load_checkpoint, save_checkpoint, CCVAE_MAGIC};
pub use generate::{generate_cross_domain, generate_for_classes};
pub use loss::{ccvae_loss, kl_divergence, kl_row, reparameterize, reparameterize_with, LossBreakdown};
pub use model::{with_condition, CcvaeDims, CcvaeModel, ModelConfig, DOMAIN_DIM};
pub use train::{train, warmup_lambda, TrainConfig, TrainHistory, WarmupSchedule};
