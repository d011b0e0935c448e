//! Brute-force dense matrices of the basis operators, built entry by entry
//! from pattern membership. Only meant for small `n`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{bail, Result};
use crate::partitions::Partition;
use crate::tensor::{for_each_index, KTensor};

/// Largest `n^(l+m)` the oracle will materialize.
pub const ORACLE_CAP: u64 = 10_000_000;

/// Row-major `rows x cols` matrix; rows index output tuples, columns input
/// tuples, both flattened like tensor storage.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl BasisMatrix {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// Matrix-vector product on a single-channel tensor.
    pub fn apply(&self, x: &KTensor<f64>, out_order: usize) -> Result<KTensor<f64>> {
        if x.channels() != 1 || x.positions() != self.cols {
            bail!(Shape, "matrix has {} columns, tensor has {} positions and {} channels", self.cols, x.positions(), x.channels());
        }
        let xs = x.data();
        let y = (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(xs).map(|(a, b)| a * b).sum())
            .collect();
        KTensor::from_vec(out_order, x.n(), 1, y)
    }
}

type Key = (Partition, usize, usize, usize, bool);

fn cache() -> &'static RwLock<HashMap<Key, Arc<BasisMatrix>>> {
    static CACHE: OnceLock<RwLock<HashMap<Key, Arc<BasisMatrix>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Matrix of the strict-pattern operator for `gamma`.
pub fn build_basis_matrix(gamma: &Partition, l: usize, m: usize, n: usize) -> Result<Arc<BasisMatrix>> {
    cached(gamma, l, m, n, true)
}

/// Matrix of the weak-pattern operator for `gamma` (the tables' convention).
pub fn build_weak_matrix(gamma: &Partition, l: usize, m: usize, n: usize) -> Result<Arc<BasisMatrix>> {
    cached(gamma, l, m, n, false)
}

fn cached(gamma: &Partition, l: usize, m: usize, n: usize, strict: bool) -> Result<Arc<BasisMatrix>> {
    let key = (gamma.clone(), l, m, n, strict);
    if let Some(hit) = cache().read().expect("oracle cache poisoned").get(&key) {
        return Ok(hit.clone());
    }
    let built = Arc::new(build(gamma, l, m, n, strict)?);
    cache().write().expect("oracle cache poisoned").insert(key, built.clone());
    Ok(built)
}

fn build(gamma: &Partition, l: usize, m: usize, n: usize, strict: bool) -> Result<BasisMatrix> {
    if gamma.k() != l + m {
        bail!(Argument, "partition covers [{}], expected [{}]", gamma.k(), l + m);
    }
    let size = (n as u64).checked_pow((l + m) as u32).unwrap_or(u64::MAX);
    if size > ORACLE_CAP {
        bail!(Bounds, "n^(l+m) = {n}^{} exceeds the oracle cap {ORACLE_CAP}", l + m);
    }
    let reduce = gamma.blocks().iter().filter(|b| b.iter().all(|&e| e <= l)).count();
    let value = (n as f64).powi(-(reduce as i32));
    let rows = n.pow(m as u32);
    let cols = n.pow(l as u32);
    let mut data = vec![0.0; rows * cols];
    // tuples are enumerated input-major, so position t is (col, row) = divmod(t, rows)
    let mut t = 0usize;
    for_each_index(l + m, n, |tuple| {
        let hit = if strict { gamma.matches_strict(tuple) } else { gamma.matches_weak(tuple) };
        if hit {
            data[(t % rows) * cols + t / rows] = value;
        }
        t += 1;
    });
    Ok(BasisMatrix { rows, cols, data })
}
