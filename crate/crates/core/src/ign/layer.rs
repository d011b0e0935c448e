use serde::{Deserialize, Serialize};

use super::kernel;
use crate::error::{bail, Result};
use crate::le_basis::{apply_basis, basis_ops, strict_to_weak_coeffs, weak_from_strict, weak_to_strict_coeffs};
use crate::partitions::{partitions_of, Partition};
use crate::scalar::Scalar;
use crate::tensor::{for_each_index, KTensor};

/// Which operator family a layer's coefficients refer to.
///
/// `Strict` uses the linearly independent basis. `Weak` uses the
/// whole-tensor operators of the closed-form tables (identity copies the
/// diagonal too, the total average includes it); a weak-coefficient layer
/// means the same map at every `n`, which is what all-mean reference models
/// need.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    #[default]
    Strict,
    Weak,
}

/// One linear equivariant layer from order `l`, `d_in` channels to order
/// `m`, `d_out` channels.
///
/// `coeffs` holds one `d_in x d_out` matrix per partition of `[l + m]` in
/// canonical order, flattened as `[(gamma * d_in + i) * d_out + j]`.
/// `bias` holds one `d_out` vector per partition of `[m]`, flattened as
/// `[beta * d_out + j]`; partition `beta` adds a constant on the index
/// tuples of its pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSpec<T> {
    pub in_order: usize,
    pub out_order: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    pub basis: BasisKind,
    pub coeffs: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> LayerSpec<T> {
    pub fn zeros(in_order: usize, out_order: usize, in_channels: usize, out_channels: usize) -> Result<Self> {
        if in_order + out_order > crate::le_basis::MAX_ORDER_SUM {
            bail!(Bounds, "l + m = {} is too large", in_order + out_order);
        }
        if in_channels == 0 || out_channels == 0 {
            bail!(Argument, "layers need at least one input and one output channel");
        }
        let nc = partitions_of(in_order + out_order).len() * in_channels * out_channels;
        let nb = partitions_of(out_order).len() * out_channels;
        Ok(Self {
            in_order,
            out_order,
            in_channels,
            out_channels,
            basis: BasisKind::Strict,
            coeffs: vec![T::zero(); nc],
            bias: vec![T::zero(); nb],
        })
    }

    pub fn with_basis(mut self, basis: BasisKind) -> Self {
        self.basis = basis;
        self
    }

    /// Partitions indexing the coefficient matrices.
    pub fn partitions(&self) -> Vec<Partition> {
        partitions_of(self.in_order + self.out_order)
    }

    /// Partitions indexing the bias vectors.
    pub fn bias_partitions(&self) -> Vec<Partition> {
        partitions_of(self.out_order)
    }

    fn position(&self, gamma: &Partition) -> Result<usize> {
        self.partitions()
            .iter()
            .position(|p| p == gamma)
            .ok_or_else(|| crate::Error::Argument(format!("{gamma} is not a partition of [{}]", self.in_order + self.out_order)))
    }

    pub fn coeff(&self, gamma: &Partition, i: usize, j: usize) -> Result<T> {
        let g = self.position(gamma)?;
        Ok(self.coeffs[(g * self.in_channels + i) * self.out_channels + j])
    }

    pub fn set_coeff(&mut self, gamma: &Partition, i: usize, j: usize, v: T) -> Result<()> {
        let g = self.position(gamma)?;
        self.check_channels(i, j)?;
        self.coeffs[(g * self.in_channels + i) * self.out_channels + j] = v;
        Ok(())
    }

    pub fn set_bias(&mut self, beta: &Partition, j: usize, v: T) -> Result<()> {
        let b = self
            .bias_partitions()
            .iter()
            .position(|p| p == beta)
            .ok_or_else(|| crate::Error::Argument(format!("{beta} is not a partition of [{}]", self.out_order)))?;
        self.check_channels(0, j)?;
        self.bias[b * self.out_channels + j] = v;
        Ok(())
    }

    fn check_channels(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.in_channels || j >= self.out_channels {
            bail!(Argument, "channel pair ({i}, {j}) outside {} x {}", self.in_channels, self.out_channels);
        }
        Ok(())
    }

    /// Checks storage sizes and finiteness.
    pub fn validate(&self) -> Result<()> {
        let want = partitions_of(self.in_order + self.out_order).len() * self.in_channels * self.out_channels;
        if self.coeffs.len() != want {
            bail!(Validation, "layer {}->{} needs {want} coefficients, has {}", self.in_order, self.out_order, self.coeffs.len());
        }
        let want = partitions_of(self.out_order).len() * self.out_channels;
        if self.bias.len() != want {
            bail!(Validation, "layer {}->{} needs {want} bias values, has {}", self.in_order, self.out_order, self.bias.len());
        }
        if self.coeffs.iter().chain(&self.bias).any(|v| !v.is_finite()) {
            bail!(Validation, "non-finite layer parameter");
        }
        Ok(())
    }

    /// Largest coefficient magnitude.
    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Coefficients of the same map in the strict basis at axis size `n`.
    pub fn strict_coeffs(&self, n: usize) -> Result<Vec<T>> {
        match self.basis {
            BasisKind::Strict => Ok(self.coeffs.clone()),
            BasisKind::Weak => self.convert(|c| weak_to_strict_coeffs(self.in_order, self.out_order, n, c)),
        }
    }

    /// Coefficients of the same map in the weak basis at axis size `n`.
    pub fn weak_coeffs(&self, n: usize) -> Result<Vec<T>> {
        match self.basis {
            BasisKind::Weak => Ok(self.coeffs.clone()),
            BasisKind::Strict => self.convert(|c| strict_to_weak_coeffs(self.in_order, self.out_order, n, c)),
        }
    }

    fn convert(&self, f: impl Fn(&[T]) -> Result<Vec<T>>) -> Result<Vec<T>> {
        let (din, dout) = (self.in_channels, self.out_channels);
        let parts = partitions_of(self.in_order + self.out_order).len();
        let mut out = vec![T::zero(); self.coeffs.len()];
        let mut column = vec![T::zero(); parts];
        for i in 0..din {
            for j in 0..dout {
                for (g, c) in column.iter_mut().enumerate() {
                    *c = self.coeffs[(g * din + i) * dout + j];
                }
                for (g, v) in f(&column)?.into_iter().enumerate() {
                    out[(g * din + i) * dout + j] = v;
                }
            }
        }
        Ok(out)
    }

    /// Bias values per strict output pattern.
    pub fn strict_bias(&self) -> Result<Vec<T>> {
        if self.basis == BasisKind::Strict {
            return Ok(self.bias.clone());
        }
        // a weak pattern indicator is the sum of the strict indicators it covers
        let parts = self.bias_partitions();
        let d = self.out_channels;
        let mut out = vec![T::zero(); self.bias.len()];
        for (b, beta) in parts.iter().enumerate() {
            for term in weak_from_strict(beta, 0, self.out_order)? {
                let t = parts.iter().position(|p| *p == term.partition).expect("same enumeration");
                for j in 0..d {
                    out[t * d + j] += self.bias[b * d + j];
                }
            }
        }
        Ok(out)
    }
}

/// Applies a layer: basis operators mixed across channels, plus the
/// pattern-constant bias.
pub fn layer_apply<T: Scalar>(spec: &LayerSpec<T>, x: &KTensor<T>) -> Result<KTensor<T>> {
    check_input(spec, x)?;
    if let Some(y) = kernel::apply(spec, x)? {
        return Ok(y);
    }
    layer_apply_general(spec, x)
}

fn check_input<T: Scalar>(spec: &LayerSpec<T>, x: &KTensor<T>) -> Result<()> {
    spec.validate()?;
    if x.order() != spec.in_order || x.channels() != spec.in_channels {
        bail!(
            Argument,
            "layer expects order {} with {} channels, got order {} with {}",
            spec.in_order, spec.in_channels, x.order(), x.channels()
        );
    }
    Ok(())
}

/// Reference implementation through the four-step executor, for any
/// orders. Slow; used where no closed-form kernel exists and in tests.
pub fn layer_apply_general<T: Scalar>(spec: &LayerSpec<T>, x: &KTensor<T>) -> Result<KTensor<T>> {
    check_input(spec, x)?;
    let n = x.n();
    let (din, dout) = (spec.in_channels, spec.out_channels);
    let coeffs = spec.strict_coeffs(n)?;
    let m = spec.out_order;
    let positions = n.pow(m as u32);
    let mut out = vec![T::zero(); positions * dout];
    let channels: Vec<KTensor<T>> = (0..din).map(|i| x.channel(i)).collect();
    for (g, op) in basis_ops(spec.in_order, m)?.iter().enumerate() {
        let block = &coeffs[g * din * dout..(g + 1) * din * dout];
        if block.iter().all(|&c| c == T::zero()) {
            continue;
        }
        for (i, xi) in channels.iter().enumerate() {
            let w = &block[i * dout..(i + 1) * dout];
            if w.iter().all(|&c| c == T::zero()) {
                continue;
            }
            let y = apply_basis(op, xi)?;
            for (p, &v) in y.data().iter().enumerate() {
                if v != T::zero() {
                    for j in 0..dout {
                        out[p * dout + j] += w[j] * v;
                    }
                }
            }
        }
    }
    add_bias(&mut out, &spec.strict_bias()?, m, n, dout);
    KTensor::from_vec(m, n, dout, out)
}

fn add_bias<T: Scalar>(out: &mut [T], bias: &[T], m: usize, n: usize, dout: usize) {
    if bias.iter().all(|&b| b == T::zero()) {
        return;
    }
    let parts = partitions_of(m);
    let mut p = 0;
    for_each_index(m, n, |idx| {
        let b = parts.iter().position(|beta| beta.matches_strict(idx)).expect("every tuple has a pattern");
        for j in 0..dout {
            out[p * dout + j] += bias[b * dout + j];
        }
        p += 1;
    });
}
