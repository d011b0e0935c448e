//! Closed-form layer kernels for orders up to two.
//!
//! The layer is rewritten in the weak basis, where every operator is a
//! matrix, transpose, row/column/diagonal summary or constant, so a full
//! layer costs one pass over the input plus `O(n^2 d_in d_out)` for the
//! identity and transpose terms.

use super::layer::LayerSpec;
use crate::error::Result;
use crate::le_basis::table_partition;
use crate::partitions::{partitions_of, Partition};
use crate::scalar::Scalar;
use crate::tensor::KTensor;

/// Tile edge for the identity/transpose pass; keeps `X(a, b)` and `X(b, a)`
/// tiles in cache together.
const TILE: usize = 32;

/// Returns `None` when no closed form exists for the layer's orders.
pub(super) fn apply<T: Scalar>(spec: &LayerSpec<T>, x: &KTensor<T>) -> Result<Option<KTensor<T>>> {
    let table = match (spec.in_order, spec.out_order) {
        (2, 2) => 1,
        (1, 2) => 2,
        (2, 1) => 3,
        (2, 0) => 0,
        _ => return Ok(None),
    };
    let n = x.n();
    let w = Weights::new(spec, n, table)?;
    let bias = spec.strict_bias()?;
    let y = match table {
        1 => matrix_to_matrix(&w, &bias, x),
        2 => vector_to_matrix(&w, &bias, x),
        3 => matrix_to_vector(&w, &bias, x),
        _ => matrix_to_invariant(&w, &bias, x),
    };
    Ok(Some(y))
}

/// Weak-basis coefficient matrices (`d_in x d_out`) addressed by table row.
struct Weights<T> {
    rows: Vec<Vec<T>>,
    din: usize,
    dout: usize,
}

impl<T: Scalar> Weights<T> {
    fn new(spec: &LayerSpec<T>, n: usize, table: usize) -> Result<Self> {
        let weak = spec.weak_coeffs(n)?;
        let parts = partitions_of(spec.in_order + spec.out_order);
        let (din, dout) = (spec.in_channels, spec.out_channels);
        let row_parts: Vec<Partition> = match table {
            0 => vec!["{{1,2}}".parse()?, "{{1},{2}}".parse()?],
            t => (1..=crate::le_basis::table_rows(t)?.len()).map(|r| table_partition(t, r)).collect::<Result<_>>()?,
        };
        let rows = row_parts
            .iter()
            .map(|p| {
                let g = parts.iter().position(|q| q == p).expect("table partitions are canonical");
                weak[g * din * dout..(g + 1) * din * dout].to_vec()
            })
            .collect();
        Ok(Self { rows, din, dout })
    }

    /// Matrix of 1-based table row `r`.
    fn row(&self, r: usize) -> &[T] {
        &self.rows[r - 1]
    }

    /// `out[j] += sum_i W_r[i, j] * v[i]`.
    fn mix(&self, r: usize, v: &[T], out: &mut [T]) {
        let w = self.row(r);
        for (i, &vi) in v.iter().enumerate() {
            if vi == T::zero() {
                continue;
            }
            for (o, &wij) in out.iter_mut().zip(&w[i * self.dout..(i + 1) * self.dout]) {
                *o += wij * vi;
            }
        }
    }
}

/// Per-channel row means, column means, diagonal, total mean, diagonal mean.
struct Summaries<T> {
    row: Vec<T>,
    col: Vec<T>,
    diag: Vec<T>,
    total: Vec<T>,
    diag_mean: Vec<T>,
}

fn summaries<T: Scalar>(x: &KTensor<T>) -> Summaries<T> {
    let (n, d) = (x.n(), x.channels());
    let nf = T::of_usize(n);
    let data = x.data();
    let mut row = vec![T::zero(); n * d];
    let mut col = vec![T::zero(); n * d];
    let mut diag = vec![T::zero(); n * d];
    for a in 0..n {
        let r = &mut row[a * d..(a + 1) * d];
        for b in 0..n {
            let v = &data[(a * n + b) * d..(a * n + b + 1) * d];
            for (acc, &x) in r.iter_mut().zip(v) {
                *acc += x;
            }
            for (acc, &x) in col[b * d..(b + 1) * d].iter_mut().zip(v) {
                *acc += x;
            }
        }
        diag[a * d..(a + 1) * d].copy_from_slice(&data[(a * n + a) * d..(a * n + a + 1) * d]);
    }
    let mut total = vec![T::zero(); d];
    let mut diag_mean = vec![T::zero(); d];
    for a in 0..n {
        for c in 0..d {
            total[c] += row[a * d + c];
            diag_mean[c] += diag[a * d + c];
        }
    }
    for v in row.iter_mut().chain(col.iter_mut()) {
        *v /= nf;
    }
    for c in 0..d {
        total[c] /= nf * nf;
        diag_mean[c] /= nf;
    }
    Summaries { row, col, diag, total, diag_mean }
}

/// Output of a layer onto matrices, as `Y(a, b) = full(a, b) + R(a) + C(b) + K + [a = b] D(a)`.
struct Parts<T> {
    r: Vec<T>,
    c: Vec<T>,
    k: Vec<T>,
    d: Vec<T>,
}

impl<T: Scalar> Parts<T> {
    fn new(n: usize, dout: usize, bias: &[T]) -> Self {
        // strict output patterns of order 2: {{1,2}} (diagonal), {{1},{2}} (off-diagonal)
        let k: Vec<T> = bias[dout..2 * dout].to_vec();
        let diag_extra: Vec<T> = (0..dout).map(|j| bias[j] - bias[dout + j]).collect();
        let mut d = vec![T::zero(); n * dout];
        for a in 0..n {
            d[a * dout..(a + 1) * dout].copy_from_slice(&diag_extra);
        }
        Self { r: vec![T::zero(); n * dout], c: vec![T::zero(); n * dout], k, d }
    }

    /// Base value `R(a) + C(b) + K (+ D(a))` written into `y`.
    fn base(&self, a: usize, b: usize, y: &mut [T]) {
        let dout = y.len();
        let (r, c) = (&self.r[a * dout..(a + 1) * dout], &self.c[b * dout..(b + 1) * dout]);
        for j in 0..dout {
            y[j] = r[j] + c[j] + self.k[j];
        }
        if a == b {
            for (v, &dj) in y.iter_mut().zip(&self.d[a * dout..(a + 1) * dout]) {
                *v += dj;
            }
        }
    }

    fn assemble(&self, n: usize, dout: usize) -> Vec<T> {
        let mut out = vec![T::zero(); n * n * dout];
        for a in 0..n {
            for b in 0..n {
                self.base(a, b, &mut out[(a * n + b) * dout..(a * n + b + 1) * dout]);
            }
        }
        out
    }
}

fn matrix_to_matrix<T: Scalar>(w: &Weights<T>, bias: &[T], x: &KTensor<T>) -> KTensor<T> {
    let (n, din, dout) = (x.n(), w.din, w.dout);
    let s = summaries(x);
    let mut p = Parts::new(n, dout, bias);
    for a in 0..n {
        let sl = a * din..(a + 1) * din;
        let (r, c, g) = (&s.row[sl.clone()], &s.col[sl.clone()], &s.diag[sl]);
        let o = a * dout..(a + 1) * dout;
        w.mix(4, r, &mut p.r[o.clone()]);
        w.mix(7, c, &mut p.r[o.clone()]);
        w.mix(14, g, &mut p.r[o.clone()]);
        w.mix(5, r, &mut p.c[o.clone()]);
        w.mix(8, c, &mut p.c[o.clone()]);
        w.mix(15, g, &mut p.c[o.clone()]);
        w.mix(3, g, &mut p.d[o.clone()]);
        w.mix(6, r, &mut p.d[o.clone()]);
        w.mix(9, c, &mut p.d[o.clone()]);
        w.mix(11, &s.total, &mut p.d[o.clone()]);
        w.mix(13, &s.diag_mean, &mut p.d[o]);
    }
    w.mix(10, &s.total, &mut p.k);
    w.mix(12, &s.diag_mean, &mut p.k);

    let mut out = p.assemble(n, dout);
    let (w1, w2) = (w.row(1), w.row(2));
    let use_transpose = w2.iter().any(|&v| v != T::zero());
    let use_identity = w1.iter().any(|&v| v != T::zero());
    if !use_identity && !use_transpose {
        return KTensor::from_vec(2, n, dout, out).expect("finite closed-form output");
    }
    let data = x.data();
    for ta in (0..n).step_by(TILE) {
        for tb in (0..n).step_by(TILE) {
            for a in ta..(ta + TILE).min(n) {
                for b in tb..(tb + TILE).min(n) {
                    let xab = &data[(a * n + b) * din..(a * n + b + 1) * din];
                    let xba = &data[(b * n + a) * din..(b * n + a + 1) * din];
                    let y = &mut out[(a * n + b) * dout..(a * n + b + 1) * dout];
                    for i in 0..din {
                        let (u, v) = (xab[i], xba[i]);
                        let r1 = &w1[i * dout..(i + 1) * dout];
                        if use_transpose {
                            let r2 = &w2[i * dout..(i + 1) * dout];
                            for ((y, &p), &q) in y.iter_mut().zip(r1).zip(r2) {
                                *y += p * u + q * v;
                            }
                        } else {
                            for (y, &p) in y.iter_mut().zip(r1) {
                                *y += p * u;
                            }
                        }
                    }
                }
            }
        }
    }
    KTensor::from_vec(2, n, dout, out).expect("finite closed-form output")
}

fn vector_to_matrix<T: Scalar>(w: &Weights<T>, bias: &[T], x: &KTensor<T>) -> KTensor<T> {
    let (n, din, dout) = (x.n(), w.din, w.dout);
    let data = x.data();
    let nf = T::of_usize(n);
    let mut mean = vec![T::zero(); din];
    for a in 0..n {
        for i in 0..din {
            mean[i] += data[a * din + i] / nf;
        }
    }
    let mut p = Parts::new(n, dout, bias);
    for a in 0..n {
        let v = &data[a * din..(a + 1) * din];
        let o = a * dout..(a + 1) * dout;
        w.mix(1, v, &mut p.d[o.clone()]);
        w.mix(2, v, &mut p.r[o.clone()]);
        w.mix(3, v, &mut p.c[o.clone()]);
        w.mix(4, &mean, &mut p.d[o]);
    }
    w.mix(5, &mean, &mut p.k);
    KTensor::from_vec(2, n, dout, p.assemble(n, dout)).expect("finite closed-form output")
}

fn matrix_to_vector<T: Scalar>(w: &Weights<T>, bias: &[T], x: &KTensor<T>) -> KTensor<T> {
    let (n, din, dout) = (x.n(), w.din, w.dout);
    let s = summaries(x);
    let mut out = vec![T::zero(); n * dout];
    let mut constant = bias[..dout].to_vec();
    w.mix(4, &s.total, &mut constant);
    w.mix(5, &s.diag_mean, &mut constant);
    for a in 0..n {
        let sl = a * din..(a + 1) * din;
        let o = &mut out[a * dout..(a + 1) * dout];
        o.copy_from_slice(&constant);
        w.mix(1, &s.diag[sl.clone()], o);
        w.mix(2, &s.row[sl.clone()], o);
        w.mix(3, &s.col[sl], o);
    }
    KTensor::from_vec(1, n, dout, out).expect("finite closed-form output")
}

fn matrix_to_invariant<T: Scalar>(w: &Weights<T>, bias: &[T], x: &KTensor<T>) -> KTensor<T> {
    let s = summaries(x);
    let mut out = bias[..w.dout].to_vec();
    w.mix(1, &s.diag_mean, &mut out);
    w.mix(2, &s.total, &mut out);
    KTensor::from_vec(0, x.n(), w.dout, out).expect("finite closed-form output")
}
