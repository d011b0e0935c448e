use std::fmt;

use super::{slice, KTensor};
use crate::error::{bail, Result};
use crate::partitions::{enumerate_partitions, Partition};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NormKind {
    L2,
    Linf,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::L2 => "l2",
            NormKind::Linf => "linf",
        })
    }
}

/// One non-negative component per partition of the tensor's axes, in
/// canonical enumeration order (the full diagonal comes first).
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionNormValue<T> {
    pub components: Vec<T>,
    pub kind: NormKind,
}

impl<T: Scalar> PartitionNormValue<T> {
    /// Componentwise `self <= other + tol`.
    pub fn dominated_by(&self, other: &Self, tol: T) -> bool {
        self.components.len() == other.components.len()
            && self.components.iter().zip(&other.components).all(|(&a, &b)| a <= b + tol)
    }

    /// Every component at most `eps + tol`.
    pub fn bounded_by(&self, eps: T, tol: T) -> bool {
        self.components.iter().all(|&a| a <= eps + tol)
    }

    pub fn max_component(&self) -> T {
        self.components.iter().fold(T::zero(), |m, &v| m.max(v))
    }
}

/// Partition norm of an order `k >= 1` tensor: for each partition `gamma` of
/// the axes, the normalized L2 norm (`n^{-|gamma|/2} ||X_gamma||_2`) or the
/// max-abs of the slice `X_gamma`, summed over channels.
pub fn partition_norm<T: Scalar>(x: &KTensor<T>, kind: NormKind) -> Result<PartitionNormValue<T>> {
    let k = x.order();
    if k == 0 {
        bail!(Argument, "partition norm needs order >= 1; use invariant_norm for order 0");
    }
    let components = enumerate_partitions(k)?
        .iter()
        .map(|g| component(x, g, kind))
        .collect::<Result<Vec<_>>>()?;
    Ok(PartitionNormValue { components, kind })
}

fn component<T: Scalar>(x: &KTensor<T>, gamma: &Partition, kind: NormKind) -> Result<T> {
    let s = slice(x, gamma)?;
    let d = s.channels();
    let mut acc = vec![T::zero(); d];
    for (i, &v) in s.data().iter().enumerate() {
        let c = i % d;
        acc[c] = match kind {
            NormKind::L2 => acc[c] + v * v,
            NormKind::Linf => acc[c].max(v.abs()),
        };
    }
    Ok(match kind {
        NormKind::L2 => {
            let scale = T::of_usize(x.n()).powi(gamma.len() as i32).sqrt();
            acc.into_iter().map(|a| a.sqrt() / scale).sum()
        }
        NormKind::Linf => acc.into_iter().sum(),
    })
}

/// Euclidean norm of an order-0 tensor's channel vector.
pub fn invariant_norm<T: Scalar>(x: &KTensor<T>) -> Result<T> {
    if x.order() != 0 {
        bail!(Argument, "invariant_norm expects order 0, got {}", x.order());
    }
    Ok(x.frobenius())
}
