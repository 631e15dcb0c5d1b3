use serde::{Deserialize, Serialize};

use crate::data::Domain;
use crate::error::{Error, Result};
use crate::nn::{Matrix, Mlp, Parameter, Parameterized, Rng};

pub const DOMAIN_DIM: usize = 2;

/// Layer widths of a CCVAE.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcvaeDims {
    pub feature_dim: usize,
    /// Hidden widths of the encoder; the decoder mirrors them.
    pub hidden: Vec<usize>,
    pub latent_dim: usize,
}

impl CcvaeDims {
    /// Widths scaled to the input: `[512] → 64` from 2048 features up,
    /// `[128] → 32` from 512, and `[64] → 3` below that.
    pub fn default_for(feature_dim: usize) -> Self {
        let (hidden, latent_dim) = if feature_dim >= 2048 {
            (512, 64)
        } else if feature_dim >= 512 {
            (128, 32)
        } else {
            (64, 3)
        };
        Self {
            feature_dim,
            hidden: vec![hidden],
            latent_dim,
        }
    }

    /// Encoder: `feature + domain → hidden… → 2·latent` (μ ‖ log σ²).
    pub fn encoder_dims(&self) -> Vec<usize> {
        let mut d = vec![self.feature_dim + DOMAIN_DIM];
        d.extend(&self.hidden);
        d.push(2 * self.latent_dim);
        d
    }

    /// Decoder: `latent + domain → hidden (reversed)… → feature`.
    pub fn decoder_dims(&self) -> Vec<usize> {
        let mut d = vec![self.latent_dim + DOMAIN_DIM];
        d.extend(self.hidden.iter().rev());
        d.push(self.feature_dim);
        d
    }
}

/// Optional overrides of [`CcvaeDims::default_for`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub hidden: Option<Vec<usize>>,
    pub latent_dim: Option<usize>,
}

impl ModelConfig {
    pub fn dims(&self, feature_dim: usize) -> Result<CcvaeDims> {
        let mut dims = CcvaeDims::default_for(feature_dim);
        if let Some(h) = &self.hidden {
            dims.hidden = h.clone();
        }
        if let Some(l) = self.latent_dim {
            dims.latent_dim = l;
        }
        if feature_dim == 0 || dims.latent_dim == 0 || dims.hidden.contains(&0) {
            return Err(Error::Config(format!("model: every layer width must be positive, got {dims:?}")));
        }
        Ok(dims)
    }
}

/// One encoder and one decoder shared by both domains; the domain enters
/// each network as a one-hot pair appended to its input.
#[derive(Debug, Clone, PartialEq)]
pub struct CcvaeModel {
    dims: CcvaeDims,
    pub(crate) encoder: Mlp,
    pub(crate) decoder: Mlp,
}

/// `[x | onehot(domain)]` for every row of `x`.
pub fn with_condition(x: &Matrix, domain: Domain) -> Result<Matrix> {
    x.hcat(&Matrix::broadcast_row(&domain.one_hot(), x.rows()))
}

impl CcvaeModel {
    pub fn new(dims: CcvaeDims, rng: &mut Rng) -> Result<Self> {
        let encoder = Mlp::new("encoder", &dims.encoder_dims(), rng)?;
        let decoder = Mlp::new("decoder", &dims.decoder_dims(), rng)?;
        Ok(Self {
            dims,
            encoder,
            decoder,
        })
    }

    pub fn zeros(dims: CcvaeDims) -> Result<Self> {
        let encoder = Mlp::zeros("encoder", &dims.encoder_dims())?;
        let decoder = Mlp::zeros("decoder", &dims.decoder_dims())?;
        Ok(Self {
            dims,
            encoder,
            decoder,
        })
    }

    pub fn dims(&self) -> &CcvaeDims {
        &self.dims
    }

    pub fn feature_dim(&self) -> usize {
        self.dims.feature_dim
    }

    pub fn latent_dim(&self) -> usize {
        self.dims.latent_dim
    }

    pub fn encoder(&self) -> &Mlp {
        &self.encoder
    }

    pub fn decoder(&self) -> &Mlp {
        &self.decoder
    }

    pub fn encoder_mut(&mut self) -> &mut Mlp {
        &mut self.encoder
    }

    pub fn decoder_mut(&mut self) -> &mut Mlp {
        &mut self.decoder
    }

    /// Posterior `q(z | x, domain)` as `(μ, log σ²)`.
    pub fn encode(&self, x: &Matrix, domain: Domain) -> Result<(Matrix, Matrix)> {
        if x.cols() != self.dims.feature_dim {
            return Err(Error::Dimension {
                op: "encode",
                left: x.shape(),
                right: (x.rows(), self.dims.feature_dim),
            });
        }
        let out = self.encoder.predict(&with_condition(x, domain)?)?;
        Ok(out.split_cols(self.dims.latent_dim))
    }

    pub fn decode(&self, z: &Matrix, domain: Domain) -> Result<Matrix> {
        if z.cols() != self.dims.latent_dim {
            return Err(Error::Dimension {
                op: "decode",
                left: z.shape(),
                right: (z.rows(), self.dims.latent_dim),
            });
        }
        self.decoder.predict(&with_condition(z, domain)?)
    }
}

impl Parameterized for CcvaeModel {
    fn parameters(&self) -> Vec<&Parameter> {
        let mut p = self.encoder.parameters();
        p.extend(self.decoder.parameters());
        p
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        let mut p = self.encoder.parameters_mut();
        p.extend(self.decoder.parameters_mut());
        p
    }
}
