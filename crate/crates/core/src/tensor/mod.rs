//! Dense order-k tensors with `n` entries per axis and `d` channels.
//!
//! Storage is row-major over the `k` axes with the channel as the fastest
//! varying dimension, so entry `(i_1, ..., i_k; c)` lives at
//! `((i_1 * n + i_2) * n + ... + i_k) * d + c`. Indices are 0-based here even
//! though partition notation is 1-based.

mod io;
mod norm;

pub use io::{read_binary, write_binary, write_binary_to, write_partition_norm_csv};
pub use norm::{invariant_norm, partition_norm, NormKind, PartitionNormValue};

use crate::error::{bail, Result};
use crate::partitions::Partition;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct KTensor<T> {
    order: usize,
    n: usize,
    channels: usize,
    data: Vec<T>,
}

/// Calls `f` with every index tuple of `[0, n)^order`, row-major.
pub fn for_each_index(order: usize, n: usize, mut f: impl FnMut(&[usize])) {
    if order > 0 && n == 0 {
        return;
    }
    let mut idx = vec![0usize; order];
    loop {
        f(&idx);
        let mut pos = order;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

pub(crate) fn flat_index(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

impl<T: Scalar> KTensor<T> {
    pub fn zeros(order: usize, n: usize, channels: usize) -> Self {
        assert!(channels >= 1, "tensors carry at least one channel");
        Self { order, n, channels, data: vec![T::zero(); n.pow(order as u32) * channels] }
    }

    /// Wraps existing data; length must be `n^order * channels` and every value finite.
    pub fn from_vec(order: usize, n: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if channels == 0 {
            bail!(Shape, "tensors carry at least one channel");
        }
        let want = n.pow(order as u32) * channels;
        if data.len() != want {
            bail!(Shape, "expected {want} values for order {order}, n {n}, {channels} channels; got {}", data.len());
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            bail!(Argument, "non-finite value at flat position {pos}");
        }
        Ok(Self { order, n, channels, data })
    }

    /// Builds a tensor entry by entry. Panics if `f` returns a non-finite value.
    pub fn from_fn(order: usize, n: usize, channels: usize, mut f: impl FnMut(&[usize], usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n.pow(order as u32) * channels);
        for_each_index(order, n, |idx| {
            for c in 0..channels {
                let v = f(idx, c);
                assert!(v.is_finite(), "non-finite tensor entry at {idx:?}");
                data.push(v);
            }
        });
        Self { order, n, channels, data }
    }

    /// Single-channel `n x n` matrix from row-major values.
    pub fn matrix(n: usize, values: Vec<T>) -> Result<Self> {
        Self::from_vec(2, n, 1, values)
    }

    /// Single-channel order-1 signal.
    pub fn vector(values: Vec<T>) -> Result<Self> {
        let n = values.len();
        Self::from_vec(1, n, 1, values)
    }

    /// Order-0 tensor holding a `d`-vector.
    pub fn invariant(values: Vec<T>) -> Result<Self> {
        let d = values.len();
        Self::from_vec(0, 0, d, values)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Number of index tuples, `n^order`.
    pub fn positions(&self) -> usize {
        self.n.pow(self.order as u32)
    }

    pub fn get(&self, idx: &[usize], channel: usize) -> T {
        debug_assert_eq!(idx.len(), self.order);
        self.data[flat_index(idx, self.n) * self.channels + channel]
    }

    pub(crate) fn set(&mut self, idx: &[usize], channel: usize, v: T) {
        let pos = flat_index(idx, self.n) * self.channels + channel;
        self.data[pos] = v;
    }

    /// One channel as a single-channel tensor.
    pub fn channel(&self, c: usize) -> KTensor<T> {
        assert!(c < self.channels, "channel {c} out of range");
        let data = self.data.iter().skip(c).step_by(self.channels).copied().collect();
        KTensor { order: self.order, n: self.n, channels: 1, data }
    }

    /// Concatenates tensors of equal order and size along the channel axis.
    pub fn concat_channels(parts: &[&KTensor<T>]) -> Result<KTensor<T>> {
        let first = parts.first().ok_or_else(|| crate::Error::Argument("nothing to concatenate".into()))?;
        let (order, n) = (first.order, first.n);
        if parts.iter().any(|p| p.order != order || p.n != n) {
            bail!(Shape, "concatenated tensors must share order and axis size");
        }
        let channels: usize = parts.iter().map(|p| p.channels).sum();
        let positions = first.positions();
        let mut data = Vec::with_capacity(positions * channels);
        for pos in 0..positions {
            for p in parts {
                data.extend_from_slice(&p.data[pos * p.channels..(pos + 1) * p.channels]);
            }
        }
        Ok(KTensor { order, n, channels, data })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> KTensor<T> {
        KTensor { order: self.order, n: self.n, channels: self.channels, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn map_in_place(&mut self, f: impl Fn(T) -> T) {
        for v in &mut self.data {
            *v = f(*v);
        }
    }

    pub fn zip_map(&self, other: &KTensor<T>, f: impl Fn(T, T) -> T) -> Result<KTensor<T>> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(KTensor { order: self.order, n: self.n, channels: self.channels, data })
    }

    pub fn sub(&self, other: &KTensor<T>) -> Result<KTensor<T>> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn add(&self, other: &KTensor<T>) -> Result<KTensor<T>> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn scale(&self, s: T) -> KTensor<T> {
        self.map(|v| v * s)
    }

    pub(crate) fn check_same_shape(&self, other: &KTensor<T>) -> Result<()> {
        if (self.order, self.n, self.channels) != (other.order, other.n, other.channels) {
            bail!(
                Shape,
                "(order {}, n {}, d {}) vs (order {}, n {}, d {})",
                self.order, self.n, self.channels, other.order, other.n, other.channels
            );
        }
        Ok(())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Euclidean norm of all entries (all channels together).
    pub fn frobenius(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn cast<U: Scalar>(&self) -> KTensor<U> {
        KTensor {
            order: self.order,
            n: self.n,
            channels: self.channels,
            data: self.data.iter().map(|v| U::of(v.as_f64())).collect(),
        }
    }

    /// `Diag(v)`: order-1 tensor to the order-2 tensor with `v` on the diagonal.
    pub fn diag_embed(&self) -> Result<KTensor<T>> {
        if self.order != 1 {
            bail!(Argument, "diag_embed expects an order-1 tensor, got order {}", self.order);
        }
        let (n, d) = (self.n, self.channels);
        let mut out = KTensor::zeros(2, n, d);
        for i in 0..n {
            for c in 0..d {
                out.data[(i * n + i) * d + c] = self.data[i * d + c];
            }
        }
        Ok(out)
    }
}

/// Slice of `x` induced by `gamma`: the order-`|gamma|` tensor obtained by
/// identifying the axes inside each block. Axes of the result follow the
/// canonical block order of `gamma`. Every channel is sliced.
pub fn slice<T: Scalar>(x: &KTensor<T>, gamma: &Partition) -> Result<KTensor<T>> {
    if gamma.k() != x.order() {
        bail!(Argument, "partition covers [{}] but tensor has order {}", gamma.k(), x.order());
    }
    let labels = gamma.labels().to_vec();
    let mut full = vec![0usize; x.order()];
    Ok(KTensor::from_fn(gamma.len(), x.n(), x.channels(), |j, c| {
        for (axis, &b) in labels.iter().enumerate() {
            full[axis] = j[b];
        }
        x.get(&full, c)
    }))
}

/// Like [`slice`] but zero wherever two blocks receive the same index value,
/// so only tuples strictly matching `gamma` survive.
pub fn strict_slice<T: Scalar>(x: &KTensor<T>, gamma: &Partition) -> Result<KTensor<T>> {
    let mut s = slice(x, gamma)?;
    let d = s.channels();
    let n = s.n();
    let mut pos = 0;
    let mut zero = Vec::new();
    for_each_index(s.order(), n, |j| {
        if !all_distinct(j) {
            zero.push(pos);
        }
        pos += 1;
    });
    for p in zero {
        s.data[p * d..(p + 1) * d].fill(T::zero());
    }
    Ok(s)
}

/// Relabels index values: `out(i_1, ..., i_k) = x(sigma(i_1), ..., sigma(i_k))`.
/// `sigma` is 0-based and must be a bijection of `[0, n)`.
pub fn permute<T: Scalar>(x: &KTensor<T>, sigma: &[usize]) -> Result<KTensor<T>> {
    check_permutation(sigma, x.n())?;
    let mut src = vec![0usize; x.order()];
    Ok(KTensor::from_fn(x.order(), x.n(), x.channels(), |idx, c| {
        for (s, &i) in src.iter_mut().zip(idx) {
            *s = sigma[i];
        }
        x.get(&src, c)
    }))
}

pub(crate) fn check_permutation(sigma: &[usize], n: usize) -> Result<()> {
    if sigma.len() != n {
        bail!(Argument, "permutation has length {}, expected {n}", sigma.len());
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || std::mem::replace(&mut seen[s], true) {
            bail!(Argument, "{sigma:?} is not a bijection of 0..{n}");
        }
    }
    Ok(())
}

/// Inverse of a 0-based permutation.
pub fn invert_permutation(sigma: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; sigma.len()];
    for (i, &s) in sigma.iter().enumerate() {
        inv[s] = i;
    }
    inv
}

/// Writes `y` (order `|gamma|`) back into an order-`gamma.k()` tensor on the
/// index tuples that strictly match `gamma`; everything else is zero.
pub fn embed_slice<T: Scalar>(y: &KTensor<T>, gamma: &Partition) -> Result<KTensor<T>> {
    if y.order() != gamma.len() {
        bail!(Argument, "slice has order {} but partition has {} blocks", y.order(), gamma.len());
    }
    let n = y.n();
    let d = y.channels();
    let mut out = KTensor::zeros(gamma.k(), n, d);
    let blocks = gamma.blocks();
    let mut full = vec![0usize; gamma.k()];
    for_each_index(gamma.len(), n, |j| {
        if !all_distinct(j) {
            return;
        }
        for (b, block) in blocks.iter().enumerate() {
            for &e in block {
                full[e - 1] = j[b];
            }
        }
        for c in 0..d {
            out.set(&full, c, y.get(j, c));
        }
    });
    Ok(out)
}

pub(crate) fn all_distinct(v: &[usize]) -> bool {
    v.iter().enumerate().all(|(i, a)| !v[i + 1..].contains(a))
}

/// Averages over the given 0-based axes; the remaining axes keep their order.
pub fn mean_over_axes<T: Scalar>(x: &KTensor<T>, axes: &[usize]) -> Result<KTensor<T>> {
    if axes.iter().any(|&a| a >= x.order()) || !all_distinct(axes) {
        bail!(Argument, "axes {axes:?} invalid for order {}", x.order());
    }
    let keep: Vec<usize> = (0..x.order()).filter(|a| !axes.contains(a)).collect();
    let n = x.n();
    let d = x.channels();
    let mut out = KTensor::zeros(keep.len(), n, d);
    let norm = T::of_usize(n).powi(axes.len() as i32);
    let mut kept = vec![0usize; keep.len()];
    for_each_index(x.order(), n, |idx| {
        for (k, &a) in kept.iter_mut().zip(&keep) {
            *k = idx[a];
        }
        let pos = flat_index(&kept, n) * d;
        for c in 0..d {
            out.data[pos + c] += x.get(idx, c) / norm;
        }
    });
    Ok(out)
}

/// Copies `x` along `extra` new axes appended after the existing ones.
pub fn replicate<T: Scalar>(x: &KTensor<T>, extra: usize) -> KTensor<T> {
    let k = x.order();
    KTensor::from_fn(k + extra, x.n(), x.channels(), |idx, c| x.get(&idx[..k], c))
}
