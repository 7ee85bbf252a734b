use rand::Rng;

use crate::nn::init_xavier;
use crate::numerics::{NodeId, Parameter, Tape, Tensor};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputActivation {
    None,
    Softmax,
    Sigmoid,
}

struct Layer {
    w: Parameter,
    b: Parameter,
}

/// Affine stack with tanh between layers and a configurable output
/// activation.
pub struct FeedForward {
    layers: Vec<Layer>,
    output: OutputActivation,
}

/// Logit value added to masked columns before a softmax output; exp of
/// anything this far below the row max is exactly 0 in f64.
const MASK_LOGIT: f64 = -1e30;

impl FeedForward {
    /// `sizes` lists the layer widths, input first. Two entries make a
    /// single affine map; the usual heads here are `[in, 256, out]`.
    pub fn new(name: &str, sizes: &[usize], output: OutputActivation, rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "feed-forward needs at least input and output sizes");
        let layers = sizes
            .windows(2)
            .enumerate()
            .map(|(i, pair)| Layer {
                w: Parameter::new(
                    format!("{name}/w{i}"),
                    init_xavier(pair[0], pair[1], pair[0], pair[1], rng),
                ),
                b: Parameter::new(format!("{name}/b{i}"), Tensor::zeros(1, pair[1])),
            })
            .collect();
        FeedForward { layers, output }
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.shape().0
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].w.shape().1
    }

    pub fn params(&self) -> Vec<Parameter> {
        self.layers.iter().flat_map(|l| [l.w.clone(), l.b.clone()]).collect()
    }

    pub fn forward(&self, tape: &mut Tape, x: NodeId) -> Result<NodeId> {
        self.forward_masked(tape, x, None)
    }

    /// Forward pass with an optional action mask applied to the output
    /// logits (softmax heads only): masked columns get probability exactly
    /// 0 and the rest renormalize.
    pub fn forward_masked(&self, tape: &mut Tape, x: NodeId, mask: Option<&[bool]>) -> Result<NodeId> {
        if tape.value(x).cols() != self.input_dim() {
            return Err(Error::ShapeMismatch {
                op: "ff_forward",
                lhs: format!("input_dim {}", self.input_dim()),
                rhs: tape.value(x).shape_str(),
            });
        }
        let mut h = x;
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let w = tape.param(&layer.w);
            let b = tape.param(&layer.b);
            let xw = tape.matmul(h, w)?;
            h = tape.add(xw, b)?;
            if i < last {
                h = tape.tanh(h);
            }
        }
        if let Some(mask) = mask {
            if self.output != OutputActivation::Softmax {
                return Err(Error::invalid("ff_forward", "action masks require a softmax output"));
            }
            if mask.len() != self.output_dim() {
                return Err(Error::ShapeMismatch {
                    op: "ff_forward mask",
                    lhs: format!("output_dim {}", self.output_dim()),
                    rhs: format!("mask len {}", mask.len()),
                });
            }
            if mask.iter().all(|&m| m) {
                return Err(Error::invalid("ff_forward", "every action is masked"));
            }
            let rows = tape.value(h).rows();
            let mut penalty = Tensor::zeros(rows, mask.len());
            for r in 0..rows {
                for (c, &masked) in mask.iter().enumerate() {
                    if masked {
                        penalty.set(r, c, MASK_LOGIT);
                    }
                }
            }
            let p = tape.constant(penalty);
            h = tape.add(h, p)?;
        }
        match self.output {
            OutputActivation::None => Ok(h),
            OutputActivation::Softmax => tape.softmax_rows(h),
            OutputActivation::Sigmoid => Ok(tape.sigmoid(h)),
        }
    }
}
