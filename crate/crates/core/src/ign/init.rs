use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Activation, BasisKind, IgnModel, LayerSpec, OutputMode};
use crate::error::{bail, Result};
use crate::rng::keyed_rng;
use crate::scalar::Scalar;

/// Order and channel count of one hidden layer's output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub order: usize,
    pub width: usize,
}

/// Network shape: input channels, hidden layers, readout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arch {
    pub in_channels: usize,
    pub hidden: Vec<LayerShape>,
    pub out_dim: usize,
    #[serde(default)]
    pub output: OutputMode,
    #[serde(default)]
    pub activation: Activation,
    /// Basis the random coefficients are drawn in.
    #[serde(default)]
    pub basis: BasisKind,
}

impl Default for Arch {
    /// Four order-2 hidden layers of width 16 plus the readout: five linear
    /// equivariant layers in total, reading `[A, Diag(x)]`.
    fn default() -> Self {
        Self {
            in_channels: 2,
            hidden: vec![LayerShape { order: 2, width: 16 }; 4],
            out_dim: 1,
            output: OutputMode::Invariant,
            activation: Activation::Relu,
            basis: BasisKind::Strict,
        }
    }
}

/// Model with every coefficient drawn uniformly from `[-a2, a2]` and zero
/// biases. Each coefficient has its own generator keyed by
/// `(seed, layer, partition, i, j)`, so the draw does not depend on
/// iteration order.
pub fn random_init<T: Scalar>(arch: &Arch, a2: f64, seed: u64) -> Result<IgnModel<T>> {
    if !(a2 > 0.0 && a2.is_finite()) {
        bail!(Argument, "coefficient bound must be positive, got {a2}");
    }
    if arch.in_channels == 0 || arch.out_dim == 0 || arch.hidden.iter().any(|h| h.width == 0 || h.order == 0) {
        bail!(Argument, "channel counts and hidden orders must be positive");
    }
    let out_order = match arch.output {
        OutputMode::Invariant => 0,
        OutputMode::Equivariant => 1,
    };
    let mut shapes = vec![LayerShape { order: 2, width: arch.in_channels }];
    shapes.extend(arch.hidden.iter().copied());
    shapes.push(LayerShape { order: out_order, width: arch.out_dim });

    let mut layers = Vec::with_capacity(shapes.len() - 1);
    for (t, pair) in shapes.windows(2).enumerate() {
        let (a, b) = (pair[0], pair[1]);
        let mut spec = LayerSpec::<T>::zeros(a.order, b.order, a.width, b.width)?.with_basis(arch.basis);
        let (din, dout) = (a.width, b.width);
        for (k, c) in spec.coeffs.iter_mut().enumerate() {
            let (g, i, j) = (k / (din * dout), (k / dout) % din, k % dout);
            let u: f64 = keyed_rng(&[seed, t as u64, g as u64, i as u64, j as u64]).gen();
            *c = T::of(a2 * (2.0 * u - 1.0));
        }
        layers.push(spec);
    }
    let model = IgnModel { layers, activation: arch.activation, output: arch.output };
    model.validate()?;
    Ok(model)
}
