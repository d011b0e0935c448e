//! Invariant graph networks: stacks of linear equivariant layers with a
//! pointwise activation in between, ending in an invariant (order 0) or
//! equivariant (order 1) readout.

mod activation;
mod counterexample;
mod init;
mod kernel;
mod layer;

pub use activation::Activation;
pub use counterexample::{counterexample_ign, counterexample_limit};
pub use init::{random_init, Arch, LayerShape};
pub use layer::{layer_apply, layer_apply_general, BasisKind, LayerSpec};

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::graphon::{sample_fixed, GraphonModel, Signal};
use crate::scalar::Scalar;
use crate::tensor::KTensor;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputMode {
    /// Order-0 readout: a `d`-vector per graph.
    #[default]
    Invariant,
    /// Order-1 readout: a `d`-vector per node.
    Equivariant,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IgnModel<T> {
    /// Hidden layers followed by the readout layer. The activation is
    /// applied after every layer except the last.
    pub layers: Vec<LayerSpec<T>>,
    pub activation: Activation,
    pub output: OutputMode,
}

impl<T: Scalar> IgnModel<T> {
    /// Checks that layer shapes chain from an order-2 input to the readout.
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.layers.first() else {
            bail!(Validation, "model has no layers");
        };
        if first.in_order != 2 {
            bail!(Validation, "first layer must read order 2, reads order {}", first.in_order);
        }
        for (t, pair) in self.layers.windows(2).enumerate() {
            let (a, b) = (&pair[0], &pair[1]);
            if a.out_order != b.in_order || a.out_channels != b.in_channels {
                bail!(
                    Validation,
                    "layer {t} outputs (order {}, {} channels) but layer {} expects (order {}, {} channels)",
                    a.out_order, a.out_channels, t + 1, b.in_order, b.in_channels
                );
            }
            if a.out_order == 0 {
                bail!(Validation, "hidden layer {t} collapses to order 0");
            }
        }
        for l in &self.layers {
            l.validate()?;
        }
        let last = self.layers.last().expect("non-empty").out_order;
        let want = match self.output {
            OutputMode::Invariant => 0,
            OutputMode::Equivariant => 1,
        };
        if last != want {
            bail!(Validation, "{:?} readout must produce order {want}, last layer produces order {last}", self.output);
        }
        Ok(())
    }

    pub fn in_channels(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_channels)
    }

    pub fn out_channels(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_channels)
    }

    /// Largest coefficient magnitude over all layers.
    pub fn max_abs_coeff(&self) -> T {
        self.layers.iter().fold(T::zero(), |m, l| m.max(l.max_abs_coeff()))
    }

    /// Widest channel count anywhere in the network.
    pub fn max_width(&self) -> usize {
        self.layers.iter().map(|l| l.in_channels.max(l.out_channels)).max().unwrap_or(0)
    }

    pub fn cast<U: Scalar>(&self) -> IgnModel<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::of(x.as_f64())).collect();
        IgnModel {
            layers: self
                .layers
                .iter()
                .map(|l| LayerSpec {
                    in_order: l.in_order,
                    out_order: l.out_order,
                    in_channels: l.in_channels,
                    out_channels: l.out_channels,
                    basis: l.basis,
                    coeffs: conv(&l.coeffs),
                    bias: conv(&l.bias),
                })
                .collect(),
            activation: self.activation,
            output: self.output,
        }
    }
}

/// Runs the network on an order-2 input whose channels are
/// `[adjacency, Diag(x_1), ..., Diag(x_d)]` (see [`graph_input`]).
pub fn forward<T: Scalar>(model: &IgnModel<T>, input: &KTensor<T>) -> Result<KTensor<T>> {
    model.validate()?;
    if input.order() != 2 || input.channels() != model.in_channels() {
        bail!(
            Argument,
            "model expects an order-2 input with {} channels, got order {} with {}",
            model.in_channels(), input.order(), input.channels()
        );
    }
    let act = model.activation;
    let mut h = layer_apply(&model.layers[0], input)?;
    for layer in &model.layers[1..] {
        h.map_in_place(|v| act.apply(v));
        h = layer_apply(layer, &h)?;
    }
    Ok(h)
}

/// Stacks a weight matrix and an optional node signal into the network input
/// `[A, Diag(x_1), ..., Diag(x_d)]`.
pub fn graph_input<T: Scalar>(weights: &KTensor<T>, signal: Option<&KTensor<T>>) -> Result<KTensor<T>> {
    if weights.order() != 2 || weights.channels() != 1 {
        bail!(Argument, "weights must be a single-channel matrix");
    }
    let Some(x) = signal else {
        return Ok(weights.clone());
    };
    if x.order() != 1 || x.n() != weights.n() {
        bail!(Shape, "signal must be order 1 with n = {}", weights.n());
    }
    let diag = x.diag_embed()?;
    KTensor::concat_channels(&[weights, &diag])
}

/// Surrogate for the network applied to a graphon: the discrete network on
/// the deterministic grid sample of size `n_ref`. Its bias relative to the
/// exact continuous network shrinks as `n_ref` grows.
pub fn continuous_forward(
    model: &IgnModel<f64>,
    w: &GraphonModel,
    x: Option<&Signal>,
    n_ref: usize,
) -> Result<KTensor<f64>> {
    if n_ref < 256 {
        bail!(Argument, "reference size must be at least 256, got {n_ref}");
    }
    let g = sample_fixed(w, x, n_ref)?;
    forward(model, &g.input()?)
}
