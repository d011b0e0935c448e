//! Spectral GNN baseline: layers of polynomial filters in the normalized
//! adjacency `L = (1/n) D^{-1/2} A D^{-1/2}`, where `D = diag(A 1) / n`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::ign::Activation;
use crate::rng::{keyed_rng, label_id};
use crate::scalar::Scalar;
use crate::tensor::KTensor;

/// `(1/n) D^{-1/2} A D^{-1/2}` with mean degrees `D = diag(A 1) / n`.
/// Fails when some mean degree is zero or below `degree_floor`.
pub fn normalized_adjacency<T: Scalar>(a: &KTensor<T>, degree_floor: T) -> Result<KTensor<T>> {
    if a.order() != 2 || a.channels() != 1 {
        bail!(Argument, "adjacency must be a single-channel matrix");
    }
    let n = a.n();
    let nf = T::of_usize(n);
    let d = a.data();
    if d.iter().any(|&v| v < T::zero()) {
        bail!(Argument, "adjacency must be non-negative");
    }
    let mut inv_sqrt = Vec::with_capacity(n);
    for (i, row) in d.chunks(n).enumerate() {
        let deg = row.iter().copied().sum::<T>() / nf;
        if deg <= T::zero() || deg < degree_floor {
            bail!(Degenerate, "mean degree {deg} of node {i} below floor {degree_floor}");
        }
        inv_sqrt.push(deg.sqrt().recip());
    }
    Ok(KTensor::from_fn(2, n, 1, |idx, _| d[idx[0] * n + idx[1]] * inv_sqrt[idx[0]] * inv_sqrt[idx[1]] / nf))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnnLayer<T> {
    pub in_channels: usize,
    pub out_channels: usize,
    /// Polynomial degree `K`.
    pub degree: usize,
    /// `beta[i][j][k]` stored at `(i * out_channels + j) * (degree + 1) + k`.
    pub coeffs: Vec<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> SgnnLayer<T> {
    pub fn zeros(in_channels: usize, out_channels: usize, degree: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            degree,
            coeffs: vec![T::zero(); in_channels * out_channels * (degree + 1)],
            bias: vec![T::zero(); out_channels],
        }
    }

    fn filter(&self, i: usize, j: usize) -> &[T] {
        let k = self.degree + 1;
        let at = (i * self.out_channels + j) * k;
        &self.coeffs[at..at + k]
    }

    pub fn set_coeff(&mut self, i: usize, j: usize, k: usize, v: T) {
        let at = (i * self.out_channels + j) * (self.degree + 1) + k;
        self.coeffs[at] = v;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SgnnModel<T> {
    pub layers: Vec<SgnnLayer<T>>,
    /// Applied after every layer, the last included.
    pub activation: Activation,
    pub degree_floor: f64,
}

impl<T: Scalar> SgnnModel<T> {
    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            bail!(Validation, "model has no layers");
        }
        for (t, l) in self.layers.iter().enumerate() {
            if l.coeffs.len() != l.in_channels * l.out_channels * (l.degree + 1) || l.bias.len() != l.out_channels {
                bail!(Validation, "layer {t} has malformed coefficient storage");
            }
            if l.coeffs.iter().chain(&l.bias).any(|v| !v.is_finite()) {
                bail!(Validation, "layer {t} has non-finite coefficients");
            }
        }
        for (t, pair) in self.layers.windows(2).enumerate() {
            if pair[0].out_channels != pair[1].in_channels {
                bail!(
                    Validation,
                    "layer {t} outputs {} channels but layer {} expects {}",
                    pair[0].out_channels, t + 1, pair[1].in_channels
                );
            }
        }
        Ok(())
    }
}

/// `y = L y` for an order-1 single-channel vector stored densely.
fn matvec<T: Scalar>(l: &[T], n: usize, x: &[T], y: &mut [T]) {
    for (yi, row) in y.iter_mut().zip(l.chunks(n)) {
        *yi = row.iter().zip(x).map(|(&a, &b)| a * b).sum();
    }
}

/// `z_j <- act(sum_i h_ij(L) z_i + b_j)` layer by layer; each filter
/// `h_ij(L) z_i` is evaluated by Horner's rule with matrix-vector products.
pub fn sgnn_forward<T: Scalar>(model: &SgnnModel<T>, a: &KTensor<T>, x: &KTensor<T>) -> Result<KTensor<T>> {
    model.validate()?;
    if x.order() != 1 || x.n() != a.n() || x.channels() != model.layers[0].in_channels {
        bail!(
            Argument,
            "signal must be order 1 with n = {} and {} channels",
            a.n(), model.layers[0].in_channels
        );
    }
    let lap = normalized_adjacency(a, T::of(model.degree_floor))?;
    let n = a.n();
    let ld = lap.data();
    // channel-major working copy: z[c][node]
    let mut z: Vec<Vec<T>> = (0..x.channels()).map(|c| (0..n).map(|v| x.data()[v * x.channels() + c]).collect()).collect();
    let (mut acc, mut tmp) = (vec![T::zero(); n], vec![T::zero(); n]);
    for layer in &model.layers {
        let mut out = vec![vec![T::zero(); n]; layer.out_channels];
        for (j, oj) in out.iter_mut().enumerate() {
            for (i, zi) in z.iter().enumerate() {
                let beta = layer.filter(i, j);
                if beta.iter().all(|b| b.is_zero()) {
                    continue;
                }
                acc.iter_mut().zip(zi).for_each(|(a, &v)| *a = beta[layer.degree] * v);
                for k in (0..layer.degree).rev() {
                    matvec(ld, n, &acc, &mut tmp);
                    acc.iter_mut().zip(&tmp).zip(zi).for_each(|((a, &t), &v)| *a = t + beta[k] * v);
                }
                oj.iter_mut().zip(&acc).for_each(|(o, &a)| *o += a);
            }
            oj.iter_mut().for_each(|o| *o = model.activation.apply(*o + layer.bias[j]));
        }
        z = out;
    }
    let d = z.len();
    let data = (0..n * d).map(|t| z[t % d][t / d]).collect();
    KTensor::from_vec(1, n, d, data)
}

/// Channel widths and filter degree of a spectral network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgnnArch {
    pub in_channels: usize,
    pub hidden: Vec<usize>,
    pub out_dim: usize,
    pub degree: usize,
    #[serde(default)]
    pub activation: Activation,
    #[serde(default = "default_floor")]
    pub degree_floor: f64,
}

fn default_floor() -> f64 {
    0.01
}

impl Default for SgnnArch {
    fn default() -> Self {
        Self { in_channels: 1, hidden: vec![16; 2], out_dim: 1, degree: 3, activation: Activation::Relu, degree_floor: 0.01 }
    }
}

/// Filter coefficients uniform on `[-bound, bound]`, keyed per entry like the
/// IGN initializer; zero biases.
pub fn sgnn_random_init<T: Scalar>(arch: &SgnnArch, bound: f64, seed: u64) -> Result<SgnnModel<T>> {
    if !(bound > 0.0 && bound.is_finite()) {
        bail!(Argument, "coefficient bound must be positive, got {bound}");
    }
    if !(arch.degree_floor >= 0.0) {
        bail!(Argument, "degree floor must be non-negative");
    }
    let mut widths = vec![arch.in_channels];
    widths.extend(&arch.hidden);
    widths.push(arch.out_dim);
    if widths.contains(&0) {
        bail!(Argument, "channel counts must be positive");
    }
    let tag = label_id("sgnn");
    let layers = widths
        .windows(2)
        .enumerate()
        .map(|(t, w)| {
            let mut l = SgnnLayer::zeros(w[0], w[1], arch.degree);
            for (e, c) in l.coeffs.iter_mut().enumerate() {
                let u: f64 = keyed_rng(&[tag, seed, t as u64, e as u64]).gen();
                *c = T::of(bound * (2.0 * u - 1.0));
            }
            l
        })
        .collect();
    let model = SgnnModel { layers, activation: arch.activation, degree_floor: arch.degree_floor };
    model.validate()?;
    Ok(model)
}
