//! Invariant graph networks on dense tensors, graphon sampling, and the
//! convergence experiments that tie them together.

pub mod error;
pub mod experiments;
pub mod graphon;
pub mod ign;
pub mod le_basis;
pub mod metrics;
pub mod partitions;
pub mod rng;
pub mod scalar;
pub mod sgnn;
pub mod smoothing;
pub mod tensor;

pub use error::{Error, Result};
pub use graphon::{GraphonModel, SampledGraph, Signal};
pub use ign::{Activation, IgnModel, LayerSpec, OutputMode};
pub use partitions::{bell, enumerate_partitions, is_finer, is_member, split_io, IoDecomposition, Partition};
pub use scalar::Scalar;
pub use tensor::{KTensor, NormKind, PartitionNormValue};

pub type Tensor = KTensor<f64>;
pub type Tensor32 = KTensor<f32>;
pub type Model = IgnModel<f64>;
pub type Model32 = IgnModel<f32>;
