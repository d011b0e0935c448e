//! Basis of linear permutation-equivariant maps from order-`l` to order-`m`
//! tensors.
//!
//! There is one operator per partition `gamma` of `[l + m]`; axes `1..=l`
//! index the input and `l+1..=l+m` the output. The operator maps `X` to
//!
//! ```text
//! Y(b) = n^{-|S1|} * sum over a with (a, b) strictly matching gamma of X(a)
//! ```
//!
//! where `S1` are the blocks of `gamma` lying entirely on the input side.
//! "Strictly matching" means equal values inside each block and distinct
//! values across blocks, which makes the operators linearly independent.
//! The tables' closed forms use the weak pattern instead (no distinctness
//! across blocks); [`weak`] converts between the two.

mod oracle;
mod tables;
mod verify;
pub mod weak;

pub use oracle::{build_basis_matrix, build_weak_matrix, BasisMatrix, ORACLE_CAP};
pub use tables::{closed_form_2ign, table_orders, table_partition, table_rows, TableRow};
pub use verify::{verify_basis, Check, VerifyConfig, VerifyReport};
pub use weak::{strict_from_weak, strict_to_weak_coeffs, weak_from_strict, weak_to_strict_coeffs, Term};

use crate::error::{bail, Result};
use crate::partitions::{partitions_of, split_io, IoDecomposition, Partition};
use crate::scalar::Scalar;
use crate::tensor::{all_distinct, embed_slice, for_each_index, strict_slice, KTensor};

/// Largest `l + m` handled by the operator code.
pub const MAX_ORDER_SUM: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LEBasisOp {
    gamma: Partition,
    l: usize,
    m: usize,
    dec: IoDecomposition,
}

impl LEBasisOp {
    pub fn new(gamma: Partition, l: usize, m: usize) -> Result<Self> {
        if l + m > MAX_ORDER_SUM {
            bail!(Bounds, "l + m = {} exceeds {MAX_ORDER_SUM}", l + m);
        }
        let dec = split_io(&gamma, l, m)?;
        Ok(Self { gamma, l, m, dec })
    }

    pub fn gamma(&self) -> &Partition {
        &self.gamma
    }

    pub fn in_order(&self) -> usize {
        self.l
    }

    pub fn out_order(&self) -> usize {
        self.m
    }

    pub fn decomposition(&self) -> &IoDecomposition {
        &self.dec
    }

    /// `|S1|`: the operator divides by `n` to this power.
    pub fn normalization_exponent(&self) -> usize {
        self.dec.s1.len()
    }
}

/// Every basis operator for `(l, m)`, in canonical partition order.
pub fn basis_ops(l: usize, m: usize) -> Result<Vec<LEBasisOp>> {
    if l + m > MAX_ORDER_SUM {
        bail!(Bounds, "l + m = {} exceeds {MAX_ORDER_SUM}", l + m);
    }
    partitions_of(l + m).into_iter().map(|g| LEBasisOp::new(g, l, m)).collect()
}

/// Applies the operator channel by channel.
///
/// Runs in four steps: take the strict slice of `X` on the input side of
/// `gamma`; sort its axes into reduction axes and axes tied to an output
/// block; average the reduction axes over index values the output tuple does
/// not use; replicate along output-only blocks and embed into an order-`m`
/// tensor that is zero off the output pattern.
pub fn apply_basis<T: Scalar>(op: &LEBasisOp, x: &KTensor<T>) -> Result<KTensor<T>> {
    let (l, m) = (op.l, op.m);
    if x.order() != l {
        bail!(Argument, "operator expects order {l}, got order {}", x.order());
    }
    let g = &op.gamma;
    let g_in = g.restrict(1, l);
    let g_out = g.restrict(l + 1, l + m);

    // 1. strict slice on the input blocks
    let z = strict_slice(x, &g_in)?;

    // 2. axes of z: reduction blocks are summed, mixed blocks follow an output block
    let mut reduce_axes = Vec::new();
    let mut mixed_axes = Vec::new();
    for (axis, b) in g_in.blocks().iter().enumerate() {
        let gb = g.block_of(b[0]);
        if g.blocks()[gb].iter().all(|&e| e <= l) {
            reduce_axes.push(axis);
        } else {
            mixed_axes.push((axis, gb));
        }
    }
    let norm = T::of_usize(x.n()).powi(reduce_axes.len() as i32);

    // 3. each output block either feeds a mixed axis of z or is free
    let source: Vec<Option<usize>> = g_out
        .blocks()
        .iter()
        .map(|b| {
            let gb = g.block_of(b[0] + l);
            mixed_axes.iter().find(|(_, mb)| *mb == gb).map(|(axis, _)| *axis)
        })
        .collect();

    // 4. average the reduction axes over values unused by the output tuple,
    //    replicating along free blocks; embed on the strict output pattern
    let n = x.n();
    let mut zi = vec![0usize; z.order()];
    let v = KTensor::from_fn(g_out.len(), n, x.channels(), |j, c| {
        if !all_distinct(j) {
            return T::zero();
        }
        for (axis, src) in source.iter().enumerate() {
            if let Some(s) = src {
                zi[*s] = j[axis];
            }
        }
        let mut acc = T::zero();
        for_each_index(reduce_axes.len(), n, |a| {
            if all_distinct(a) && !a.iter().any(|v| j.contains(v)) {
                for (&axis, &val) in reduce_axes.iter().zip(a) {
                    zi[axis] = val;
                }
                acc += z.get(&zi, c);
            }
        });
        acc / norm
    });
    embed_slice(&v, &g_out)
}

/// Sum of `coeffs[i] * T_i(X)` over the canonical operators for `(l, m)`.
pub fn apply_combination<T: Scalar>(l: usize, m: usize, coeffs: &[T], x: &KTensor<T>) -> Result<KTensor<T>> {
    let ops = basis_ops(l, m)?;
    if coeffs.len() != ops.len() {
        bail!(Shape, "{} coefficients for {} operators", coeffs.len(), ops.len());
    }
    let mut out = KTensor::zeros(m, x.n(), x.channels());
    for (op, &c) in ops.iter().zip(coeffs) {
        if c != T::zero() {
            out = out.add(&apply_basis(op, x)?.scale(c))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(s: &str, l: usize, m: usize) -> LEBasisOp {
        LEBasisOp::new(s.parse().unwrap(), l, m).unwrap()
    }

    #[test]
    fn average_of_everything() {
        let x = KTensor::matrix(2, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        // four distinct values are needed, so nothing survives at n = 2
        let y = apply_basis(&op("{{1},{2},{3},{4}}", 2, 2), &x).unwrap();
        assert_eq!(y.data(), &[0.0; 4]);

        let x = KTensor::matrix(4, (0..16).map(f64::from).collect()).unwrap();
        let y = apply_basis(&op("{{1},{2},{3},{4}}", 2, 2), &x).unwrap();
        // Y(0,1) averages X(a,b) over {a,b} = {2,3}: (11 + 14) / 16
        assert_eq!(y.get(&[0, 1], 0), 25.0 / 16.0);
        assert_eq!(y.get(&[2, 2], 0), 0.0);
    }

    #[test]
    fn identity_is_off_diagonal_plus_diagonal() {
        let x = KTensor::matrix(3, (1..=9).map(f64::from).collect()).unwrap();
        let a = apply_basis(&op("{{1,3},{2,4}}", 2, 2), &x).unwrap();
        let b = apply_basis(&op("{{1,2,3,4}}", 2, 2), &x).unwrap();
        assert_eq!(a.add(&b).unwrap(), x);
    }

    #[test]
    fn order_three_replicated_diagonal_mean() {
        let x = KTensor::from_fn(3, 4, 1, |i, _| (i[0] * 16 + i[1] * 4 + i[2]) as f64);
        let y = apply_basis(&op("{{1,2},{3,6},{4},{5}}", 3, 3), &x).unwrap();
        crate::tensor::for_each_index(3, 4, |idx| {
            let (i, j, l) = (idx[0], idx[1], idx[2]);
            let distinct = i != j && i != l && j != l;
            let want = if distinct {
                // a must avoid every output value
                (0..4).filter(|a| ![i, j, l].contains(a)).map(|a| x.get(&[a, a, l], 0)).sum::<f64>() / 4.0
            } else {
                0.0
            };
            assert!((y.get(idx, 0) - want).abs() < 1e-12, "{idx:?}");
        });
    }

    #[test]
    fn counts_and_errors() {
        assert_eq!(basis_ops(2, 2).unwrap().len(), 15);
        assert_eq!(basis_ops(1, 2).unwrap().len(), 5);
        assert_eq!(basis_ops(2, 0).unwrap().len(), 2);
        assert!(basis_ops(4, 3).is_err());
        let x = KTensor::vector(vec![1.0, 2.0]).unwrap();
        assert!(apply_basis(&op("{{1,3},{2,4}}", 2, 2), &x).is_err());
    }

    #[test]
    fn invariant_output() {
        let x = KTensor::matrix(2, vec![1.0, 3.0, 5.0, 7.0]).unwrap();
        let off = apply_basis(&op("{{1},{2}}", 2, 0), &x).unwrap();
        assert_eq!(off.order(), 0);
        assert_eq!(off.data(), &[2.0]);
        let diag = apply_basis(&op("{{1,2}}", 2, 0), &x).unwrap();
        assert_eq!(diag.data(), &[4.0]);
    }
}
