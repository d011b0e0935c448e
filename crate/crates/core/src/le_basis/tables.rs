//! Closed forms of every linear equivariant map between vectors and matrices.
//!
//! Table 1 covers matrix to matrix (15 rows), table 2 vector to matrix (5
//! rows), table 3 matrix to vector (5 rows). The formulas act on whole
//! tensors, i.e. they are weak-pattern operators. Each row records the
//! partition whose weak operator it equals, with input axes numbered before
//! output axes and the first output axis indexing rows.

use crate::error::{bail, Result};
use crate::partitions::Partition;
use crate::scalar::Scalar;
use crate::tensor::KTensor;

#[derive(Clone, Copy, Debug)]
pub struct TableRow {
    pub description: &'static str,
    pub formula: &'static str,
    pub partition: &'static str,
}

const fn row(description: &'static str, formula: &'static str, partition: &'static str) -> TableRow {
    TableRow { description, formula, partition }
}

const MATRIX_TO_MATRIX: [TableRow; 15] = [
    row("identity", "T(A) = A", "{{1,3},{2,4}}"),
    row("transpose", "T(A) = A^T", "{{1,4},{2,3}}"),
    row("diag", "T(A) = Diag(Diag*(A))", "{{1,2,3,4}}"),
    row("row averages replicated on rows", "T(A) = (1/n) A 1 1^T", "{{1,3},{2},{4}}"),
    row("row averages replicated on columns", "T(A) = (1/n) 1 (A 1)^T", "{{1,4},{2},{3}}"),
    row("row averages on the diagonal", "T(A) = (1/n) Diag(A 1)", "{{1,3,4},{2}}"),
    row("column averages replicated on rows", "T(A) = (1/n) A^T 1 1^T", "{{1},{2,3},{4}}"),
    row("column averages replicated on columns", "T(A) = (1/n) 1 (A^T 1)^T", "{{1},{2,4},{3}}"),
    row("column averages on the diagonal", "T(A) = (1/n) Diag(A^T 1)", "{{1},{2,3,4}}"),
    row("total average replicated everywhere", "T(A) = (1/n^2) (1^T A 1) 1 1^T", "{{1},{2},{3},{4}}"),
    row("total average on the diagonal", "T(A) = (1/n^2) (1^T A 1) Diag(1)", "{{1},{2},{3,4}}"),
    row("diagonal average replicated everywhere", "T(A) = (1/n) (1^T Diag*(A)) 1 1^T", "{{1,2},{3},{4}}"),
    row("diagonal average on the diagonal", "T(A) = (1/n) (1^T Diag*(A)) Diag(1)", "{{1,2},{3,4}}"),
    row("diagonal replicated on rows", "T(A) = Diag*(A) 1^T", "{{1,2,3},{4}}"),
    row("diagonal replicated on columns", "T(A) = 1 Diag*(A)^T", "{{1,2,4},{3}}"),
];

const VECTOR_TO_MATRIX: [TableRow; 5] = [
    row("replicate to the diagonal", "T(v) = Diag(v)", "{{1,2,3}}"),
    row("replicate along rows", "T(v)_ij = v_i", "{{1,2},{3}}"),
    row("replicate along columns", "T(v)_ij = v_j", "{{1,3},{2}}"),
    row("mean on the diagonal", "T(v)_ii = (1/n) 1^T v", "{{1},{2,3}}"),
    row("mean everywhere", "T(v)_ij = (1/n) 1^T v", "{{1},{2},{3}}"),
];

const MATRIX_TO_VECTOR: [TableRow; 5] = [
    row("diagonal", "T(A) = Diag*(A)", "{{1,2,3}}"),
    row("row averages", "T(A) = (1/n) A 1", "{{1,3},{2}}"),
    row("column averages", "T(A) = (1/n) A^T 1", "{{1},{2,3}}"),
    row("total average", "T(A)_i = (1/n^2) 1^T A 1", "{{1},{2},{3}}"),
    row("diagonal average", "T(A)_i = (1/n) 1^T Diag*(A)", "{{1,2},{3}}"),
];

/// Rows of table 1, 2 or 3.
pub fn table_rows(table: usize) -> Result<&'static [TableRow]> {
    Ok(match table {
        1 => &MATRIX_TO_MATRIX,
        2 => &VECTOR_TO_MATRIX,
        3 => &MATRIX_TO_VECTOR,
        _ => bail!(Argument, "no table {table}; expected 1, 2 or 3"),
    })
}

/// Input and output orders of a table.
pub fn table_orders(table: usize) -> Result<(usize, usize)> {
    Ok(match table {
        1 => (2, 2),
        2 => (1, 2),
        3 => (2, 1),
        _ => bail!(Argument, "no table {table}; expected 1, 2 or 3"),
    })
}

fn lookup(table: usize, row: usize) -> Result<&'static TableRow> {
    let rows = table_rows(table)?;
    if row == 0 || row > rows.len() {
        bail!(Argument, "table {table} has rows 1..={}, got {row}", rows.len());
    }
    Ok(&rows[row - 1])
}

/// The partition whose weak-pattern operator a row realizes.
pub fn table_partition(table: usize, row: usize) -> Result<Partition> {
    lookup(table, row)?.partition.parse()
}

/// Per-channel summaries of a matrix used by the closed forms.
struct Stats<T> {
    row_mean: Vec<T>,
    col_mean: Vec<T>,
    total: T,
    diag_mean: T,
}

fn stats<T: Scalar>(a: &KTensor<T>, c: usize) -> Stats<T> {
    let n = a.n();
    let nf = T::of_usize(n);
    let mut row_mean = vec![T::zero(); n];
    let mut col_mean = vec![T::zero(); n];
    let mut diag = T::zero();
    for i in 0..n {
        for j in 0..n {
            let v = a.get(&[i, j], c);
            row_mean[i] += v / nf;
            col_mean[j] += v / nf;
        }
        diag += a.get(&[i, i], c);
    }
    let total = row_mean.iter().copied().sum::<T>() / nf;
    Stats { row_mean, col_mean, total, diag_mean: diag / nf }
}

/// Evaluates a row's formula literally, channel by channel. Rows are 1-based.
pub fn closed_form_2ign<T: Scalar>(table: usize, row: usize, x: &KTensor<T>) -> Result<KTensor<T>> {
    lookup(table, row)?;
    let (l, m) = table_orders(table)?;
    if x.order() != l {
        bail!(Argument, "table {table} expects order {l}, got order {}", x.order());
    }
    let n = x.n();
    let d = x.channels();
    let zero = T::zero();
    if table == 2 {
        let means: Vec<T> = (0..d).map(|c| (0..n).map(|i| x.get(&[i], c)).sum::<T>() / T::of_usize(n)).collect();
        return Ok(KTensor::from_fn(m, n, d, |ij, c| {
            let (i, j) = (ij[0], ij[1]);
            match row {
                1 => if i == j { x.get(&[i], c) } else { zero },
                2 => x.get(&[i], c),
                3 => x.get(&[j], c),
                4 => if i == j { means[c] } else { zero },
                _ => means[c],
            }
        }));
    }
    let st: Vec<Stats<T>> = (0..d).map(|c| stats(x, c)).collect();
    if table == 3 {
        return Ok(KTensor::from_fn(m, n, d, |i, c| {
            let (i, s) = (i[0], &st[c]);
            match row {
                1 => x.get(&[i, i], c),
                2 => s.row_mean[i],
                3 => s.col_mean[i],
                4 => s.total,
                _ => s.diag_mean,
            }
        }));
    }
    Ok(KTensor::from_fn(m, n, d, |ij, c| {
        let (i, j, s) = (ij[0], ij[1], &st[c]);
        let on_diag = |v: T| if i == j { v } else { zero };
        match row {
            1 => x.get(&[i, j], c),
            2 => x.get(&[j, i], c),
            3 => on_diag(x.get(&[i, i], c)),
            4 => s.row_mean[i],
            5 => s.row_mean[j],
            6 => on_diag(s.row_mean[i]),
            7 => s.col_mean[i],
            8 => s.col_mean[j],
            9 => on_diag(s.col_mean[i]),
            10 => s.total,
            11 => on_diag(s.total),
            12 => s.diag_mean,
            13 => on_diag(s.diag_mean),
            14 => x.get(&[i, i], c),
            _ => x.get(&[j, j], c),
        }
    }))
}
