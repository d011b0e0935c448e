//! Error functionals used by the experiments.

use serde::{Deserialize, Serialize};

use crate::error::{bail, Result};
use crate::graphon::{Evaluable, GraphonModel};
use crate::scalar::Scalar;
use crate::tensor::KTensor;

/// One measurement. The field order is the CSV column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub model_id: String,
    pub graphon: String,
    pub mode: String,
    pub n: usize,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
}

/// Node-level RMS error `|| S f - n^{-k/2} x ||_2` between a normalized
/// sample of the limit object and a raw discrete output of order `k`.
pub fn mse_u<T: Scalar>(f_sampled: &KTensor<T>, x: &KTensor<T>) -> Result<T> {
    f_sampled.check_same_shape(x)?;
    let k = x.order();
    if !(1..=2).contains(&k) {
        bail!(Argument, "node-level error needs order 1 or 2, got {k}");
    }
    let scale = T::of_usize(x.n()).powf(T::of(-(k as f64) / 2.0));
    let s: T = f_sampled.data().iter().zip(x.data()).map(|(&f, &v)| (f - scale * v).powi(2)).sum();
    Ok(s.sqrt())
}

/// Euclidean distance between two outputs of the same shape.
pub fn output_distance<T: Scalar>(a: &KTensor<T>, b: &KTensor<T>) -> Result<T> {
    Ok(a.sub(b)?.frobenius())
}

/// A quadrature value together with the resolution it was taken at.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L2Estimate {
    pub value: f64,
    /// Midpoints per axis of the final evaluation.
    pub resolution: usize,
    /// Whether the last doubling changed the value by less than 1%.
    pub converged: bool,
}

pub const QUADRATURE_START: usize = 4096;
pub const QUADRATURE_MAX: usize = 16384;

/// Midpoint rule for `(int (f - g)^2)^{1/2}` with `m` points per axis.
pub fn l2_distance_at(f: &dyn Evaluable, g: &dyn Evaluable, m: usize) -> Result<f64> {
    let k = f.order();
    if g.order() != k || !(1..=2).contains(&k) {
        bail!(Argument, "L2 distance needs two functions of the same order 1 or 2");
    }
    if m == 0 {
        bail!(Argument, "quadrature needs at least one point");
    }
    let pts: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let sq = |p: &[f64]| (f.eval_at(p) - g.eval_at(p)).powi(2);
    let total: f64 = if k == 1 {
        pts.iter().map(|&u| sq(&[u])).sum::<f64>() / m as f64
    } else {
        pts.iter().map(|&u| pts.iter().map(|&v| sq(&[u, v])).sum::<f64>()).sum::<f64>() / (m * m) as f64
    };
    Ok(total.sqrt())
}

/// L2 distance by midpoint quadrature, starting at 4096 points per axis and
/// doubling until the value moves by less than 1% (at most 16384).
pub fn l2_distance(f: &dyn Evaluable, g: &dyn Evaluable) -> Result<L2Estimate> {
    let mut m = QUADRATURE_START;
    let mut prev = l2_distance_at(f, g, m)?;
    while m < QUADRATURE_MAX {
        m *= 2;
        let next = l2_distance_at(f, g, m)?;
        if (next - prev).abs() <= 0.01 * next.max(prev) {
            return Ok(L2Estimate { value: next, resolution: m, converged: true });
        }
        prev = next;
    }
    Ok(L2Estimate { value: prev, resolution: m, converged: false })
}

pub fn graphon_l2_distance(w1: &GraphonModel, w2: &GraphonModel) -> Result<L2Estimate> {
    l2_distance(w1, w2)
}

struct Diagonal<'a>(&'a GraphonModel);

impl Evaluable for Diagonal<'_> {
    fn order(&self) -> usize {
        1
    }

    fn eval_at(&self, p: &[f64]) -> f64 {
        self.0.eval(p[0], p[0])
    }
}

/// L2 distance of the diagonals `u -> W(u, u)`; together with
/// [`graphon_l2_distance`] this is the continuous partition norm of `w1 - w2`.
pub fn diag_l2_distance(w1: &GraphonModel, w2: &GraphonModel) -> Result<L2Estimate> {
    l2_distance(&Diagonal(w1), &Diagonal(w2))
}

/// Least-squares slope of `log(error)` against `log(n)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        bail!(Argument, "slope fit needs at least 3 points, got {}", points.len());
    }
    if let Some(&(n, e)) = points.iter().find(|&&(n, e)| !(n > 0.0 && e > 0.0 && e.is_finite())) {
        bail!(Argument, "log-log fit needs positive sizes and errors, got ({n}, {e})");
    }
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        bail!(Argument, "slope fit needs at least two distinct sizes");
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

/// Median, averaging the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { (v[h - 1] + v[h]) / 2.0 })
}
