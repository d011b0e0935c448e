use serde::{Deserialize, Serialize};

use crate::error::{bail, Error, Result};
use crate::ign::{counterexample_ign, forward, graph_input, random_init, Arch, OutputMode};
use crate::sgnn::{sgnn_forward, sgnn_random_init, SgnnArch, SgnnModel};
use crate::tensor::KTensor;
use crate::IgnModel;

/// Everything needed to rebuild a model bit for bit. Serialized as a TOML
/// table with a `kind` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelRecord {
    /// Random IGN with coefficients uniform on `[-a2, a2]`.
    Ign {
        seed: u64,
        #[serde(default = "one")]
        a2: f64,
        #[serde(default)]
        arch: Arch,
    },
    /// Thresholding network separating graphons from their 0-1 samples.
    IgnCounterexample {
        c_max: f64,
        #[serde(default = "half")]
        margin: f64,
    },
    /// Random spectral GNN with filter coefficients uniform on `[-bound, bound]`.
    Sgnn {
        seed: u64,
        #[serde(default = "one")]
        bound: f64,
        #[serde(default)]
        arch: SgnnArch,
    },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

impl Default for ModelRecord {
    fn default() -> Self {
        ModelRecord::Ign { seed: 0, a2: 1.0, arch: Arch::default() }
    }
}

impl ModelRecord {
    /// Short label used in the `model_id` column.
    pub fn id(&self) -> String {
        match self {
            ModelRecord::Ign { seed, .. } => format!("ign-{seed}"),
            ModelRecord::IgnCounterexample { .. } => "ign-counterexample".into(),
            ModelRecord::Sgnn { seed, .. } => format!("sgnn-{seed}"),
        }
    }

    pub fn build(&self) -> Result<BuiltModel> {
        Ok(match self {
            ModelRecord::Ign { seed, a2, arch } => BuiltModel::Ign(random_init(arch, *a2, *seed)?),
            ModelRecord::IgnCounterexample { c_max, margin } => BuiltModel::Ign(counterexample_ign(*c_max, *margin)?),
            ModelRecord::Sgnn { seed, bound, arch } => BuiltModel::Sgnn(sgnn_random_init(arch, *bound, *seed)?),
        })
    }

    pub fn to_text(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_text(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug)]
pub enum BuiltModel {
    Ign(IgnModel<f64>),
    Sgnn(SgnnModel<f64>),
}

impl BuiltModel {
    pub fn output_mode(&self) -> OutputMode {
        match self {
            BuiltModel::Ign(m) => m.output,
            BuiltModel::Sgnn(_) => OutputMode::Equivariant,
        }
    }

    /// Number of node-signal channels the model reads.
    pub fn signal_channels(&self) -> usize {
        match self {
            BuiltModel::Ign(m) => m.in_channels().saturating_sub(1),
            BuiltModel::Sgnn(m) => m.layers[0].in_channels,
        }
    }

    /// Runs the model on a weight matrix and optional node signal.
    pub fn forward(&self, weights: &KTensor<f64>, signal: Option<&KTensor<f64>>) -> Result<KTensor<f64>> {
        match self {
            BuiltModel::Ign(m) => forward(m, &graph_input(weights, signal)?),
            BuiltModel::Sgnn(m) => {
                let Some(x) = signal else {
                    bail!(Argument, "spectral models need a node signal");
                };
                sgnn_forward(m, weights, x)
            }
        }
    }
}
