//! Fully-connected networks with ReLU on every hidden layer and a linear
//! output layer. Gradients are derived by hand.

use super::{Matrix, Parameter, Parameterized, Rng};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    /// `in × out`
    pub weight: Parameter,
    /// `1 × out`
    pub bias: Parameter,
}

impl Dense {
    pub fn in_dim(&self) -> usize {
        self.weight.value.rows()
    }

    pub fn out_dim(&self) -> usize {
        self.weight.value.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

/// Everything the backward pass needs from a forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    /// Input to each layer.
    inputs: Vec<Matrix>,
    /// Pre-activation output of each layer.
    pre: Vec<Matrix>,
}

impl Mlp {
    /// Glorot-uniform weights, zero biases. `dims` lists every layer width
    /// including input and output, so `dims.len() - 1` layers are built.
    pub fn new(name: &str, dims: &[usize], rng: &mut Rng) -> Result<Self> {
        Self::build(name, dims, |fan_in, fan_out| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            rng.uniform_matrix(fan_in, fan_out, -limit, limit)
        })
    }

    pub fn zeros(name: &str, dims: &[usize]) -> Result<Self> {
        Self::build(name, dims, Matrix::zeros)
    }

    fn build(
        name: &str,
        dims: &[usize],
        mut init: impl FnMut(usize, usize) -> Matrix,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::Config(format!(
                "{name}: layer widths must be positive and at least two, got {dims:?}"
            )));
        }
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| Dense {
                weight: Parameter::new(format!("{name}.{i}.weight"), init(w[0], w[1])),
                bias: Parameter::new(format!("{name}.{i}.bias"), Matrix::zeros(1, w[1])),
            })
            .collect();
        Ok(Self { layers })
    }

    /// Assembles a network from explicit layers; consecutive widths must chain.
    pub fn from_layers(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Dimension {
                    op: "from_layers",
                    left: pair[0].weight.value.shape(),
                    right: pair[1].weight.value.shape(),
                });
            }
        }
        for l in &layers {
            if l.bias.value.shape() != (1, l.out_dim()) {
                return Err(Error::Dimension {
                    op: "from_layers",
                    left: l.weight.value.shape(),
                    right: l.bias.value.shape(),
                });
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Layer widths, input first.
    pub fn dims(&self) -> Vec<usize> {
        let mut d = vec![self.in_dim()];
        d.extend(self.layers.iter().map(Dense::out_dim));
        d
    }

    pub fn forward(&self, input: &Matrix) -> Result<(Matrix, MlpCache)> {
        if input.cols() != self.in_dim() {
            return Err(Error::Dimension {
                op: "mlp_forward",
                left: input.shape(),
                right: self.layers[0].weight.value.shape(),
            });
        }
        let last = self.layers.len() - 1;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut x = input.clone();
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = x.matmul(&layer.weight.value)?;
            z.add_row(&layer.bias.value)?;
            let next = if i == last {
                z.clone()
            } else {
                z.map(|v| v.max(0.0))
            };
            inputs.push(x);
            pre.push(z);
            x = next;
        }
        Ok((x, MlpCache { inputs, pre }))
    }

    /// Forward pass without keeping the cache.
    pub fn predict(&self, input: &Matrix) -> Result<Matrix> {
        self.forward(input).map(|(out, _)| out)
    }

    /// Accumulates `∂loss/∂param` into each parameter's `grad` and returns
    /// `∂loss/∂input`.
    pub fn backward(&mut self, cache: &MlpCache, output_grad: &Matrix) -> Result<Matrix> {
        if cache.pre.len() != self.layers.len() {
            return Err(Error::Dimension {
                op: "mlp_backward",
                left: (cache.pre.len(), 0),
                right: (self.layers.len(), 0),
            });
        }
        let last = self.layers.len() - 1;
        let expected = cache.pre[last].shape();
        if output_grad.shape() != expected {
            return Err(Error::Dimension {
                op: "mlp_backward",
                left: output_grad.shape(),
                right: expected,
            });
        }
        let mut g = output_grad.clone();
        for i in (0..self.layers.len()).rev() {
            if i != last {
                // ReLU passes gradient only where the pre-activation was positive.
                for (gv, &z) in g.data_mut().iter_mut().zip(cache.pre[i].data()) {
                    if z <= 0.0 {
                        *gv = 0.0;
                    }
                }
            }
            let layer = &mut self.layers[i];
            let dw = cache.inputs[i].t_matmul(&g)?;
            layer.weight.grad.add_assign(&dw)?;
            layer.bias.grad.add_assign(&g.sum_rows())?;
            g = g.matmul_t(&layer.weight.value)?;
        }
        Ok(g)
    }
}

impl Parameterized for Mlp {
    fn parameters(&self) -> Vec<&Parameter> {
        self.layers
            .iter()
            .flat_map(|l| [&l.weight, &l.bias])
            .collect()
    }

    fn parameters_mut(&mut self) -> Vec<&mut Parameter> {
        self.layers
            .iter_mut()
            .flat_map(|l| [&mut l.weight, &mut l.bias])
            .collect()
    }
}
