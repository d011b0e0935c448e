use super::{GraphonModel, Signal};
use crate::error::{bail, Result};
use crate::tensor::KTensor;

/// A function on `[0, 1]^k` that can be sampled at node positions.
pub trait Evaluable {
    fn order(&self) -> usize;
    fn eval_at(&self, points: &[f64]) -> f64;
}

impl Evaluable for GraphonModel {
    fn order(&self) -> usize {
        2
    }

    fn eval_at(&self, p: &[f64]) -> f64 {
        self.eval(p[0], p[1])
    }
}

impl Evaluable for Signal {
    fn order(&self) -> usize {
        1
    }

    fn eval_at(&self, p: &[f64]) -> f64 {
        self.eval(p[0])
    }
}

/// The grid `1/n, 2/n, ..., 1` used by the operator `S_n`.
pub fn grid_points(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / n as f64).collect()
}

/// `f` evaluated at every tuple of `points`, without normalization.
pub fn sample_points(f: &dyn Evaluable, points: &[f64]) -> Result<KTensor<f64>> {
    let k = f.order();
    if !(1..=2).contains(&k) {
        bail!(Argument, "sampling needs order 1 or 2, got {k}");
    }
    let mut buf = [0.0; 2];
    let out = KTensor::from_fn(k, points.len(), 1, |idx, _| {
        for (b, &i) in buf.iter_mut().zip(idx) {
            *b = points[i];
        }
        f.eval_at(&buf[..k])
    });
    Ok(out)
}

/// Normalized sampling operator: `n^{-k/2} f(p_{i_1}, ..., p_{i_k})`. Pass
/// latents for `S_U` or [`grid_points`] for `S_n`.
pub fn sampling_operator(f: &dyn Evaluable, points: &[f64]) -> Result<KTensor<f64>> {
    let t = sample_points(f, points)?;
    let scale = (points.len() as f64).powf(-(f.order() as f64) / 2.0);
    Ok(t.scale(scale))
}

/// `(W X)(u) = int W(u, v) X(v) dv` for a step graphon and step signal on the
/// same breakpoints, computed exactly cell by cell.
pub fn integral_operator(w: &GraphonModel, x: &Signal) -> Result<Signal> {
    let (GraphonModel::Grid { breakpoints, values }, Signal::Grid { breakpoints: bx, values: xv }) = (w, x) else {
        bail!(Argument, "exact integral operator needs a grid graphon and a grid signal");
    };
    if breakpoints != bx {
        bail!(Argument, "graphon and signal grids differ");
    }
    let widths: Vec<f64> = breakpoints.windows(2).map(|b| b[1] - b[0]).collect();
    let out = values
        .iter()
        .map(|row| row.iter().zip(xv).zip(&widths).map(|((w, x), h)| w * x * h).sum())
        .collect();
    Ok(Signal::Grid { breakpoints: breakpoints.clone(), values: out })
}
